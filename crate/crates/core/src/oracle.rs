//! Published closed-form equilibrium outputs for the four-firm market,
//! stored as coefficient tuples and audited against the numeric solver.
//!
//! Each output is `(a * A(b) + c_A * CA(b) + c_D * CD(b)) / D(b)` where
//! `A`, `CA`, `CD` are quadratics in `b` and `D` is a scaled product of
//! linear factors in `b`. In the two-alien cases `c_D` is the cost shared by
//! firms C and D.

use std::fmt;

use crate::equilibrium::EquilibriumReport;
use crate::error::{Error, Result};
use crate::market::{MarketParams, PatternAssignment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseLabel {
    OneAlienP1,
    OneAlienP2,
    OneAlienP3,
    OneAlienP4,
    TwoAlienP1,
    TwoAlienP2,
}

impl CaseLabel {
    pub const ALL: [CaseLabel; 6] = [
        CaseLabel::OneAlienP1,
        CaseLabel::OneAlienP2,
        CaseLabel::OneAlienP3,
        CaseLabel::OneAlienP4,
        CaseLabel::TwoAlienP1,
        CaseLabel::TwoAlienP2,
    ];

    pub fn pattern(self) -> PatternAssignment {
        let s = match self {
            CaseLabel::OneAlienP1 => "QQQQ",
            CaseLabel::OneAlienP2 => "QQQP",
            CaseLabel::OneAlienP3 => "PPPQ",
            CaseLabel::OneAlienP4 => "PPPP",
            CaseLabel::TwoAlienP1 => "QQQQ",
            CaseLabel::TwoAlienP2 => "QQPP",
        };
        s.parse().expect("static pattern")
    }

    pub fn is_two_alien(self) -> bool {
        matches!(self, CaseLabel::TwoAlienP1 | CaseLabel::TwoAlienP2)
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// `c0 + c1 b + c2 b^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadratic(pub [f64; 3]);

impl Quadratic {
    pub fn eval(&self, b: f64) -> f64 {
        self.0[0] + b * (self.0[1] + b * self.0[2])
    }
}

/// `scale * prod (k0 + k1 b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Denominator {
    pub scale: f64,
    pub factors: Vec<(f64, f64)>,
}

impl Denominator {
    pub fn eval(&self, b: f64) -> f64 {
        self.factors
            .iter()
            .fold(self.scale, |acc, (k0, k1)| acc * (k0 + k1 * b))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputFormula {
    pub a: Quadratic,
    pub c_a: Quadratic,
    pub c_d: Quadratic,
    pub denominator: Denominator,
}

impl OutputFormula {
    pub fn eval(&self, a: f64, b: f64, c_a: f64, c_d: f64) -> f64 {
        (a * self.a.eval(b) + c_a * self.c_a.eval(b) + c_d * self.c_d.eval(b)) / self.denominator.eval(b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormCase {
    pub label: CaseLabel,
    /// One formula per firm A..D.
    pub formulas: [OutputFormula; 4],
    /// Firms whose printed formula fails independent FOC verification.
    pub erratum_flags: Vec<usize>,
}

fn den_one_alien_qty() -> Denominator {
    // 2(3-b)(b+1)
    Denominator { scale: 2.0, factors: vec![(3.0, -1.0), (1.0, 1.0)] }
}

fn den_one_alien_price() -> Denominator {
    // 2(1-b)(b+1)(7b+3)
    Denominator { scale: 2.0, factors: vec![(1.0, -1.0), (1.0, 1.0), (3.0, 7.0)] }
}

fn den_two_alien_mixed() -> Denominator {
    // 6(1-b)(b+1)
    Denominator { scale: 6.0, factors: vec![(1.0, -1.0), (1.0, 1.0)] }
}

fn formula(a: [f64; 3], c_a: [f64; 3], c_d: [f64; 3], denominator: Denominator) -> OutputFormula {
    OutputFormula {
        a: Quadratic(a),
        c_a: Quadratic(c_a),
        c_d: Quadratic(c_d),
        denominator,
    }
}

impl ClosedFormCase {
    pub fn get(label: CaseLabel) -> ClosedFormCase {
        match label {
            CaseLabel::OneAlienP1 | CaseLabel::OneAlienP2 => {
                // (b c_D - 3 c_A - a b + 3a) / (2(3-b)(b+1)), printed for all four firms
                let f = formula([3.0, -1.0, 0.0], [-3.0, 0.0, 0.0], [0.0, 1.0, 0.0], den_one_alien_qty());
                ClosedFormCase {
                    label,
                    formulas: [f.clone(), f.clone(), f.clone(), f],
                    erratum_flags: vec![3],
                }
            }
            CaseLabel::OneAlienP3 | CaseLabel::OneAlienP4 => {
                // (3b^2 c_D + b c_D + 4b^2 c_A - 5b c_A - 3c_A - 7ab^2 + 4ab + 3a) / den
                let sym = formula([3.0, 4.0, -7.0], [-3.0, -5.0, 4.0], [0.0, 1.0, 3.0], den_one_alien_price());
                // (3a - 2b^2 c_D - 7b c_D - 3c_D + 9b^2 c_A + 3b c_A - 7ab^2 + 4ab) / den
                let alien = formula([3.0, 4.0, -7.0], [0.0, 3.0, 9.0], [-3.0, -7.0, -2.0], den_one_alien_price());
                ClosedFormCase {
                    label,
                    formulas: [sym.clone(), sym.clone(), sym, alien],
                    erratum_flags: vec![],
                }
            }
            CaseLabel::TwoAlienP1 => {
                // (2b c_D - b c_A - 3c_A - ab + 3a) / (2(3-b)(b+1))
                let ab = formula([3.0, -1.0, 0.0], [-3.0, -1.0, 0.0], [0.0, 2.0, 0.0], den_one_alien_qty());
                // (3a - b c_D - 3c_D + 2b c_A - ab) / (2(3-b)(b+1))
                let cd = formula([3.0, -1.0, 0.0], [0.0, 2.0, 0.0], [-3.0, -1.0, 0.0], den_one_alien_qty());
                ClosedFormCase {
                    label,
                    formulas: [ab.clone(), ab, cd.clone(), cd],
                    erratum_flags: vec![],
                }
            }
            CaseLabel::TwoAlienP2 => {
                // (2b c_D + b c_A - 3c_A - 3ab + 3a) / (6(1-b)(b+1))
                let ab = formula([3.0, -3.0, 0.0], [-3.0, 1.0, 0.0], [0.0, 2.0, 0.0], den_two_alien_mixed());
                // (b c_D - 3c_D + 2b c_A - 3ab + 3a) / (6(1-b)(b+1))
                let cd = formula([3.0, -3.0, 0.0], [0.0, 2.0, 0.0], [-3.0, 1.0, 0.0], den_two_alien_mixed());
                ClosedFormCase {
                    label,
                    formulas: [ab.clone(), ab, cd.clone(), cd],
                    erratum_flags: vec![],
                }
            }
        }
    }

    pub fn all() -> Vec<ClosedFormCase> {
        CaseLabel::ALL.iter().map(|&l| Self::get(l)).collect()
    }

    /// Whether `params` has the cost structure this case was derived for.
    pub fn fits(&self, params: &MarketParams) -> bool {
        if params.n != 4 {
            return false;
        }
        let c = &params.costs;
        if self.label.is_two_alien() {
            c[0] == c[1] && c[2] == c[3]
        } else {
            c[0] == c[1] && c[1] == c[2]
        }
    }

    /// Cost arguments `(c_A, c_D)` for this case.
    fn cost_args(&self, params: &MarketParams) -> (f64, f64) {
        (params.costs[0], params.costs[3])
    }
}

/// Printed outputs of firms A..D at `params`.
pub fn evaluate_case(case: &ClosedFormCase, params: &MarketParams) -> Result<Vec<f64>> {
    if !case.fits(params) {
        return Err(Error::CostStructureMismatch(case.label.to_string()));
    }
    let (c_a, c_d) = case.cost_args(params);
    Ok(case
        .formulas
        .iter()
        .map(|f| f.eval(params.a, params.b, c_a, c_d))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlayerAudit {
    Match { printed: f64, solved: f64 },
    Mismatch { printed: f64, solved: f64, delta: f64 },
}

impl PlayerAudit {
    pub fn is_match(&self) -> bool {
        matches!(self, PlayerAudit::Match { .. })
    }

    pub fn printed(&self) -> f64 {
        match *self {
            PlayerAudit::Match { printed, .. } | PlayerAudit::Mismatch { printed, .. } => printed,
        }
    }

    pub fn solved(&self) -> f64 {
        match *self {
            PlayerAudit::Match { solved, .. } | PlayerAudit::Mismatch { solved, .. } => solved,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditVerdict {
    pub label: CaseLabel,
    pub players: Vec<PlayerAudit>,
    /// Flagged players whose printed value nonetheless matched (possible
    /// only when the flagged formula coincides with the truth, e.g. at
    /// symmetric costs).
    pub flagged_but_matching: Vec<usize>,
    /// Unflagged players that mismatched. Empty in every valid audit.
    pub unexpected_mismatches: Vec<usize>,
}

impl AuditVerdict {
    /// Every mismatch is carried by an erratum flag.
    pub fn consistent(&self) -> bool {
        self.unexpected_mismatches.is_empty()
    }

    pub fn mismatches(&self) -> Vec<usize> {
        self.players
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_match())
            .map(|(i, _)| i)
            .collect()
    }
}

/// Compares printed outputs with a solver report, player by player.
pub fn audit_case(
    case: &ClosedFormCase,
    params: &MarketParams,
    report: &EquilibriumReport,
    tol: f64,
) -> Result<AuditVerdict> {
    if report.params != *params {
        return Err(Error::ParamMismatch);
    }
    let printed = evaluate_case(case, params)?;
    let players: Vec<PlayerAudit> = printed
        .iter()
        .zip(&report.outcome.quantities)
        .map(|(&printed, &solved)| {
            let delta = printed - solved;
            if delta.abs() <= tol {
                PlayerAudit::Match { printed, solved }
            } else {
                PlayerAudit::Mismatch { printed, solved, delta }
            }
        })
        .collect();
    let flagged_but_matching = case
        .erratum_flags
        .iter()
        .copied()
        .filter(|&i| players[i].is_match())
        .collect();
    let unexpected_mismatches = players
        .iter()
        .enumerate()
        .filter(|&(i, a)| !a.is_match() && !case.erratum_flags.contains(&i))
        .map(|(i, _)| i)
        .collect();
    Ok(AuditVerdict {
        label: case.label,
        players,
        flagged_but_matching,
        unexpected_mismatches,
    })
}
