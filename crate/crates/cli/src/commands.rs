use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use twovar::equilibrium::EQUIVALENCE_TOLERANCE;
use twovar::oracle::PlayerAudit;
use twovar::{
    audit_case, BestResponseOptions, ClosedFormCase, EquilibriumReport, EquivalenceVerdict, Market, MarketParams,
    Method, MinimaxReport, MinimaxTolerances, PatternAssignment,
};

use crate::error::{CliError, CliResult};
use crate::format::{sig9, Table};
use crate::sweep::{self, SweepSpec};

pub const OK: u8 = 0;
pub const FAILED: u8 = 1;

/// Text for stdout plus the exit code.
pub struct Outcome {
    pub stdout: String,
    pub code: u8,
}

pub fn load_params(path: &Path) -> CliResult<MarketParams> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(MarketParams::from_json(&text)?)
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Splits on commas and whitespace.
pub fn parse_patterns(items: &[String], n: usize) -> CliResult<Vec<PatternAssignment>> {
    items
        .iter()
        .flat_map(|s| s.split(|c: char| c == ',' || c.is_whitespace()))
        .filter(|s| !s.is_empty())
        .map(|s| PatternAssignment::parse_for(s, n).map_err(CliError::from))
        .collect()
}

pub struct SolveArgs {
    pub params: PathBuf,
    pub pattern: String,
    pub method: Method,
    pub damping: f64,
    pub tol: f64,
    pub csv: Option<PathBuf>,
}

fn solve_with(market: &Market, pattern: &PatternAssignment, method: Method, damping: f64, tol: f64) -> CliResult<EquilibriumReport> {
    let report = match method {
        Method::FocSolve => twovar::solve_foc(&market.params, &market.system, pattern)?,
        Method::BestResponse => {
            let opts = BestResponseOptions { damping, tol, ..Default::default() };
            twovar::solve_best_response(&market.params, &market.system, pattern, &opts)?
        }
    };
    Ok(report)
}

pub fn solve(args: &SolveArgs) -> CliResult<Outcome> {
    let market = Market::new(load_params(&args.params)?)?;
    let pattern = market.pattern(&args.pattern)?;
    let r = solve_with(&market, &pattern, args.method, args.damping, args.tol)?;

    let mut out = String::new();
    writeln!(out, "pattern {}  method {}  iterations {}  residual {:.3e}", r.pattern, r.method, r.iterations, r.residual).unwrap();
    let mut table = Table::new(["player", "variable", "strategy", "x", "p", "pi", "phi"]);
    for i in 0..r.params.n {
        table.push(vec![
            i.to_string(),
            r.pattern.get(i).to_string(),
            sig9(r.strategy[i]),
            sig9(r.outcome.quantities[i]),
            sig9(r.outcome.prices[i]),
            sig9(r.payoffs.absolute[i]),
            sig9(r.payoffs.relative[i]),
        ]);
    }
    out.push_str(&table.render());
    if !r.is_interior() {
        let list: Vec<String> = r.boundary.iter().map(usize::to_string).collect();
        writeln!(out, "warning: strategy outside its domain for players {}", list.join(",")).unwrap();
    }

    if let Some(path) = &args.csv {
        let mut csv = String::from("pattern,player,variable,strategy,x,p,pi,phi\n");
        for i in 0..r.params.n {
            writeln!(
                csv,
                "{},{},{},{},{},{},{},{}",
                r.pattern,
                i,
                r.pattern.get(i),
                r.strategy[i],
                r.outcome.quantities[i],
                r.outcome.prices[i],
                r.payoffs.absolute[i],
                r.payoffs.relative[i]
            )
            .unwrap();
        }
        write_file(path, &csv)?;
    }
    Ok(Outcome { stdout: out, code: OK })
}

pub struct CompareArgs {
    pub params: PathBuf,
    pub patterns: Vec<String>,
    pub method: Method,
    pub damping: f64,
    pub tol: Option<f64>,
}

pub fn compare(args: &CompareArgs) -> CliResult<Outcome> {
    let market = Market::new(load_params(&args.params)?)?;
    let patterns = parse_patterns(&args.patterns, market.params.n)?;
    if patterns.len() != 2 {
        return Err(CliError::Config(format!("compare needs exactly two patterns, got {}", patterns.len())));
    }
    let tol = args.tol.unwrap_or(EQUIVALENCE_TOLERANCE);
    if !(tol > 0.0) {
        return Err(CliError::Config(format!("tolerance must be positive, got {tol}")));
    }
    let r1 = solve_with(&market, &patterns[0], args.method, args.damping, 1e-12)?;
    let r2 = solve_with(&market, &patterns[1], args.method, args.damping, 1e-12)?;
    let verdict = twovar::compare_equilibria(&r1, &r2, tol)?;

    let mut out = String::new();
    let mut table = Table::new(["player", "x_1", "x_2", "dx", "p_1", "p_2", "dp"]);
    for i in 0..market.params.n {
        let (x1, x2) = (r1.outcome.quantities[i], r2.outcome.quantities[i]);
        let (p1, p2) = (r1.outcome.prices[i], r2.outcome.prices[i]);
        table.push(vec![
            i.to_string(),
            sig9(x1),
            sig9(x2),
            sig9((x2 - x1).abs()),
            sig9(p1),
            sig9(p2),
            sig9((p2 - p1).abs()),
        ]);
    }
    writeln!(out, "compare {} vs {}  tolerance {:e}", r1.pattern, r2.pattern, tol).unwrap();
    out.push_str(&table.render());
    let code = match verdict {
        EquivalenceVerdict::Equivalent { max_deviation } => {
            writeln!(out, "equivalent: max deviation {}", sig9(max_deviation)).unwrap();
            OK
        }
        EquivalenceVerdict::NotEquivalent { max_deviation, component } => {
            writeln!(out, "not equivalent: max deviation {} at {component}", sig9(max_deviation)).unwrap();
            FAILED
        }
    };
    Ok(Outcome { stdout: out, code })
}

pub struct VerifyArgs {
    pub params: PathBuf,
    pub samples: usize,
    pub seed: u64,
    pub tol: Option<f64>,
    pub csv: Option<PathBuf>,
}

pub fn verify_minimax(args: &VerifyArgs) -> CliResult<Outcome> {
    let market = Market::new(load_params(&args.params)?)?;
    let mut tol = MinimaxTolerances::default();
    if let Some(t) = args.tol {
        if !(t > 0.0) {
            return Err(CliError::Config(format!("tolerance must be positive, got {t}")));
        }
        tol.agreement = t;
    }
    let alien = market.params.alien();

    let mut rows: Vec<(usize, String, MinimaxReport)> = Vec::new();
    for player in 0..alien {
        rows.push((player, "eq".into(), market.minimax_at_equilibrium(player, &tol)?));
        let seed = args.seed.wrapping_add(player as u64);
        for (k, frozen) in market.random_frozen(player, args.samples, seed)?.into_iter().enumerate() {
            let r = twovar::lemma2_check(&market.params, &market.system, player, &frozen, &tol)?;
            rows.push((player, format!("r{}", k + 1), r));
        }
    }

    let mut table = Table::new([
        "player", "point", "min_tn_max_ti", "min_sn_max_ti", "max_ti_min_sn", "max_ti_min_tn", "spread", "status",
    ]);
    let mut all_hold = true;
    let mut notes = String::new();
    for (player, label, r) in &rows {
        let ok = r.holds() && r.weak_duality_ok();
        all_hold &= ok;
        let mut row = vec![player.to_string(), label.clone()];
        row.extend(r.values().iter().map(|&v| sig9(v)));
        row.push(format!("{:.3e}", r.max_spread));
        row.push(if ok { "ok" } else { "FAIL" }.into());
        table.push(row);
        if !r.weak_duality_ok() {
            writeln!(notes, "player {player} {label}: weak duality violated by {:e}", r.weak_duality_violation).unwrap();
        }
        for s in &r.shape_violations {
            writeln!(notes, "player {player} {label}: shape violation: {s}").unwrap();
        }
        for s in &r.domain_issues {
            writeln!(notes, "player {player} {label}: {s}").unwrap();
        }
    }

    let mut out = String::new();
    writeln!(out, "minimax check  agreement tolerance {:e}  seed {}", tol.agreement, args.seed).unwrap();
    out.push_str(&table.render());
    out.push_str(&notes);
    writeln!(out, "{}", if all_hold { "all spreads within tolerance" } else { "minimax check failed" }).unwrap();

    if let Some(path) = &args.csv {
        let mut csv = String::from("player,point,min_tn_max_ti,min_sn_max_ti,max_ti_min_sn,max_ti_min_tn,spread,weak_duality_violation\n");
        for (player, label, r) in &rows {
            let v = r.values();
            writeln!(csv, "{player},{label},{},{},{},{},{},{}", v[0], v[1], v[2], v[3], r.max_spread, r.weak_duality_violation).unwrap();
        }
        write_file(path, &csv)?;
    }
    Ok(Outcome { stdout: out, code: if all_hold { OK } else { FAILED } })
}

pub struct ClosedFormArgs {
    pub params: PathBuf,
    pub tol: Option<f64>,
    pub csv: Option<PathBuf>,
}

pub fn closed_form(args: &ClosedFormArgs) -> CliResult<Outcome> {
    let market = Market::new(load_params(&args.params)?)?;
    if market.params.n != 4 {
        return Err(CliError::Config(format!("closed forms exist for n = 4 only, got n = {}", market.params.n)));
    }
    let tol = args.tol.unwrap_or(1e-8);
    let cases: Vec<ClosedFormCase> = ClosedFormCase::all().into_iter().filter(|c| c.fits(&market.params)).collect();
    if cases.is_empty() {
        return Err(CliError::Config("cost vector fits no closed-form case".into()));
    }

    let mut table = Table::new(["case", "pattern", "player", "printed", "solved", "delta", "status"]);
    let mut csv = String::from("case,pattern,player,printed,solved,delta,status\n");
    let mut consistent = true;
    for case in &cases {
        let pattern = case.label.pattern();
        let report = market.solve(&pattern, Method::FocSolve)?;
        let verdict = audit_case(case, &market.params, &report, tol)?;
        consistent &= verdict.consistent();
        for (i, audit) in verdict.players.iter().enumerate() {
            let status = match audit {
                PlayerAudit::Match { .. } => "match",
                PlayerAudit::Mismatch { .. } if case.erratum_flags.contains(&i) => "erratum",
                PlayerAudit::Mismatch { .. } => "MISMATCH",
            };
            let delta = audit.printed() - audit.solved();
            table.push(vec![
                case.label.to_string(),
                pattern.to_string(),
                i.to_string(),
                sig9(audit.printed()),
                sig9(audit.solved()),
                sig9(delta),
                status.into(),
            ]);
            writeln!(csv, "{},{},{},{},{},{},{}", case.label, pattern, i, audit.printed(), audit.solved(), delta, status).unwrap();
        }
    }

    let mut out = String::new();
    writeln!(out, "closed-form audit  tolerance {tol:e}").unwrap();
    out.push_str(&table.render());
    writeln!(out, "{}", if consistent { "every mismatch is a known erratum" } else { "unexpected mismatches found" }).unwrap();
    if let Some(path) = &args.csv {
        write_file(path, &csv)?;
    }
    Ok(Outcome { stdout: out, code: if consistent { OK } else { FAILED } })
}

pub struct SweepArgs {
    pub params: PathBuf,
    pub sweep: SweepSpec,
    pub patterns: Vec<String>,
    pub method: Method,
    pub per_player: bool,
    pub csv: Option<PathBuf>,
}

pub fn run_sweep(args: &SweepArgs) -> CliResult<Outcome> {
    let base = load_params(&args.params)?;
    let patterns = if args.patterns.is_empty() {
        sweep::default_patterns(base.n)
    } else {
        parse_patterns(&args.patterns, base.n)?
    };
    if patterns.is_empty() {
        return Err(CliError::Config("no patterns given".into()));
    }
    let points = sweep::run(&base, &args.sweep, &patterns, args.method)?;
    let csv = if args.per_player {
        sweep::per_player_csv(&points)
    } else {
        sweep::wide_csv(&points, &patterns, base.n)
    };
    match &args.csv {
        Some(path) => {
            write_file(path, &csv)?;
            Ok(Outcome {
                stdout: format!("{} grid points written to {}\n", points.len(), path.display()),
                code: OK,
            })
        }
        None => Ok(Outcome { stdout: csv, code: OK }),
    }
}
