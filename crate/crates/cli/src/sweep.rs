//! Parameter sweeps: grid parsing, parallel evaluation, CSV assembly.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use twovar::equilibrium::outcome_deviation;
use twovar::{EquilibriumReport, Market, MarketParams, Method, PatternAssignment};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    A,
    B,
    /// Cost of the last player.
    CAlien,
    /// Cost of the last player minus the cost of the first.
    CostGap,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::A => "a",
            SweepParam::B => "b",
            SweepParam::CAlien => "c_alien",
            SweepParam::CostGap => "cost_gap",
        }
    }

    pub fn apply(self, base: &MarketParams, value: f64) -> MarketParams {
        let mut p = base.clone();
        let alien = p.n - 1;
        match self {
            SweepParam::A => p.a = value,
            SweepParam::B => p.b = value,
            SweepParam::CAlien => p.costs[alien] = value,
            SweepParam::CostGap => p.costs[alien] = p.costs[0] + value,
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl FromStr for SweepSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [name, lo, hi, step] = parts[..] else {
            return Err(format!("sweep must look like name:lo:hi:step, got {s:?}"));
        };
        let param = match name {
            "a" => SweepParam::A,
            "b" => SweepParam::B,
            "c_alien" => SweepParam::CAlien,
            "cost_gap" => SweepParam::CostGap,
            other => return Err(format!("unknown sweep parameter {other:?} (expected a, b, c_alien or cost_gap)")),
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}"));
        let spec = SweepSpec { param, lo: num(lo)?, hi: num(hi)?, step: num(step)? };
        spec.validate()?;
        Ok(spec)
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(format!("sweep step must be positive, got {}", self.step));
        }
        if !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(format!("sweep needs lo < hi, got {} and {}", self.lo, self.hi));
        }
        Ok(())
    }

    /// `lo + k step` up to `hi`, each rounded to 12 decimals.
    pub fn grid(&self) -> Vec<f64> {
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=count)
            .map(|k| ((self.lo + k as f64 * self.step) * 1e12).round() / 1e12)
            .collect()
    }
}

/// All-quantity, all-quantity with the alien on price, all-price with the
/// alien on quantity, all-price.
pub fn default_patterns(n: usize) -> Vec<PatternAssignment> {
    use twovar::Variable::{Price, Quantity};
    vec![
        PatternAssignment::uniform(n, Quantity),
        PatternAssignment::uniform_except(n, Quantity, n - 1),
        PatternAssignment::uniform_except(n, Price, n - 1),
        PatternAssignment::uniform(n, Price),
    ]
}

pub struct SweepPoint {
    pub value: f64,
    pub reports: Vec<EquilibriumReport>,
}

pub fn run(
    base: &MarketParams,
    spec: &SweepSpec,
    patterns: &[PatternAssignment],
    method: Method,
) -> CliResult<Vec<SweepPoint>> {
    spec.grid()
        .into_par_iter()
        .map(|value| {
            let params = spec.param.apply(base, value);
            let market = Market::new(params)
                .map_err(|e| CliError::from(e).at(spec.param.name(), value))?;
            let reports = patterns
                .iter()
                .map(|p| market.solve(p, method))
                .collect::<twovar::Result<Vec<_>>>()
                .map_err(|e| CliError::from(e).at(spec.param.name(), value))?;
            Ok(SweepPoint { value, reports })
        })
        .collect()
}

impl CliError {
    fn at(self, name: &str, value: f64) -> Self {
        let ctx = |m: String| format!("{name}={value}: {m}");
        match self {
            CliError::Config(m) => CliError::Config(ctx(m)),
            CliError::Solver(m) => CliError::Solver(ctx(m)),
            CliError::Io(m) => CliError::Io(ctx(m)),
        }
    }
}

/// One row per grid point: swept value, every pattern's quantities and
/// prices, then the outcome deviation of every pattern pair.
pub fn wide_csv(points: &[SweepPoint], patterns: &[PatternAssignment], n: usize) -> String {
    let mut header = vec!["param".to_string()];
    for p in patterns {
        header.extend((0..n).map(|i| format!("{p}_x{i}")));
        header.extend((0..n).map(|i| format!("{p}_p{i}")));
    }
    for (i, j) in pairs(patterns.len()) {
        header.push(format!("dev_{}_{}", patterns[i], patterns[j]));
    }
    let mut out = header.join(",");
    out.push('\n');
    for point in points {
        let mut row = vec![point.value.to_string()];
        for r in &point.reports {
            row.extend(r.outcome.quantities.iter().map(f64::to_string));
            row.extend(r.outcome.prices.iter().map(f64::to_string));
        }
        for (i, j) in pairs(patterns.len()) {
            row.push(outcome_deviation(&point.reports[i].outcome, &point.reports[j].outcome).0.to_string());
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub const PER_PLAYER_HEADER: &str = "param,pattern,player,x,p,pi,phi";

pub fn per_player_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from(PER_PLAYER_HEADER);
    out.push('\n');
    for point in points {
        for r in &point.reports {
            for i in 0..r.params.n {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    point.value,
                    r.pattern,
                    i,
                    r.outcome.quantities[i],
                    r.outcome.prices[i],
                    r.outcome.absolute_profits[i],
                    r.outcome.relative_profits[i]
                )
                .expect("write to string");
            }
        }
    }
    out
}

fn pairs(k: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..k).flat_map(move |i| (i + 1..k).map(move |j| (i, j)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_grids() {
        let s: SweepSpec = "b:0.1:0.9:0.1".parse().unwrap();
        assert_eq!(s.param, SweepParam::B);
        let g = s.grid();
        assert_eq!(g.len(), 9);
        assert_eq!(g[2], 0.3);
        assert_eq!(g[8], 0.9);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!("b:0.1:0.9:0".parse::<SweepSpec>().is_err());
        assert!("b:0.1:0.9:-0.1".parse::<SweepSpec>().is_err());
        assert!("b:0.9:0.1:0.1".parse::<SweepSpec>().is_err());
        assert!("q:0.1:0.9:0.1".parse::<SweepSpec>().is_err());
        assert!("b:0.1:0.9".parse::<SweepSpec>().is_err());
    }

    #[test]
    fn cost_gap_moves_alien_only() {
        let base = MarketParams::one_alien(4, 2.0, 0.5, 1.0, 1.0).unwrap();
        let p = SweepParam::CostGap.apply(&base, -0.25);
        assert_eq!(p.costs, vec![1.0, 1.0, 1.0, 0.75]);
    }
}
