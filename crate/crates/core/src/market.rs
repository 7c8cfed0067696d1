//! Market primitives, the linear demand system, and resolution of mixed
//! quantity/price patterns into full outcomes.
//!
//! Inverse demand is `p = a*1 - M x` where `M` has unit diagonal and `b`
//! off the diagonal. A player committing to a quantity leaves its price to
//! be determined by the market, and vice versa; resolving a pattern means
//! solving for whichever half of each `(x_i, p_i)` pair is not chosen.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};
use crate::payoff;

/// Which strategic variable a player commits to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variable {
    Quantity,
    Price,
}

impl Variable {
    pub fn letter(self) -> char {
        match self {
            Variable::Quantity => 'Q',
            Variable::Price => 'P',
        }
    }

    pub fn other(self) -> Variable {
        match self {
            Variable::Quantity => Variable::Price,
            Variable::Price => Variable::Quantity,
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variable::Quantity => f.write_str("quantity"),
            Variable::Price => f.write_str("price"),
        }
    }
}

/// Per-player choice of strategic variable, written as a string over
/// `{Q, P}` such as `"QQQP"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PatternAssignment {
    choices: Vec<Variable>,
}

impl PatternAssignment {
    pub fn new(choices: Vec<Variable>) -> Self {
        PatternAssignment { choices }
    }

    /// Every player uses `variable`.
    pub fn uniform(n: usize, variable: Variable) -> Self {
        PatternAssignment {
            choices: vec![variable; n],
        }
    }

    /// Every player uses `variable` except `player`, who uses the other one.
    pub fn uniform_except(n: usize, variable: Variable, player: usize) -> Self {
        let mut p = Self::uniform(n, variable);
        p.choices[player] = variable.other();
        p
    }

    /// Parses a pattern and checks it against the player count.
    pub fn parse_for(s: &str, n: usize) -> Result<Self> {
        let p: PatternAssignment = s.parse()?;
        if p.len() != n {
            return Err(Error::PatternLength {
                expected: n,
                got: p.len(),
            });
        }
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }

    pub fn choices(&self) -> &[Variable] {
        &self.choices
    }

    pub fn get(&self, player: usize) -> Variable {
        self.choices[player]
    }

    /// All `2^n` patterns in lexicographic order (Q before P).
    pub fn all(n: usize) -> Vec<PatternAssignment> {
        (0..1usize << n)
            .map(|bits| {
                PatternAssignment::new(
                    (0..n)
                        .map(|i| {
                            if bits >> (n - 1 - i) & 1 == 0 {
                                Variable::Quantity
                            } else {
                                Variable::Price
                            }
                        })
                        .collect(),
                )
            })
            .collect()
    }
}

impl FromStr for PatternAssignment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'Q' => Ok(Variable::Quantity),
                'P' => Ok(Variable::Price),
                other => Err(Error::InvalidPattern(other)),
            })
            .collect::<Result<Vec<_>>>()
            .map(PatternAssignment::new)
    }
}

impl fmt::Display for PatternAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.choices {
            write!(f, "{}", c.letter())?;
        }
        Ok(())
    }
}

/// Closed interval a strategic variable is chosen from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyDomain {
    pub lower: f64,
    pub upper: f64,
}

impl StrategyDomain {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower < upper) || !lower.is_finite() || !upper.is_finite() {
            return Err(Error::InvalidParams(format!(
                "strategy domain [{lower}, {upper}] must satisfy lower < upper"
            )));
        }
        Ok(StrategyDomain { lower, upper })
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    pub fn strictly_contains(&self, v: f64) -> bool {
        self.lower < v && v < self.upper
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.lower, self.upper)
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Economic primitives of the game: player count, demand intercept,
/// substitutability and marginal costs. The last player is the one whose
/// cost may differ from the others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub costs: Vec<f64>,
}

impl MarketParams {
    pub fn new(n: usize, a: f64, b: f64, costs: Vec<f64>) -> Result<Self> {
        let params = MarketParams { n, a, b, costs };
        params.validate()?;
        Ok(params)
    }

    /// `n - 1` symmetric players with cost `common`, one alien with `alien`.
    pub fn one_alien(n: usize, a: f64, b: f64, common: f64, alien: f64) -> Result<Self> {
        let mut costs = vec![common; n];
        costs[n.saturating_sub(1)] = alien;
        Self::new(n, a, b, costs)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let params: MarketParams =
            serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
        params.validate()?;
        Ok(params)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("params serialize")
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidParams(format!(
                "n must be at least 3, got {}",
                self.n
            )));
        }
        if !(self.a > 0.0) || !self.a.is_finite() {
            return Err(Error::InvalidParams("a must be positive".into()));
        }
        if !(self.b > 0.0 && self.b < 1.0) {
            return Err(Error::InvalidParams("b must lie in (0,1)".into()));
        }
        if self.costs.len() != self.n {
            return Err(Error::InvalidParams(format!(
                "expected {} costs, got {}",
                self.n,
                self.costs.len()
            )));
        }
        if let Some(c) = self.costs.iter().find(|&&c| !(c >= 0.0 && c < self.a)) {
            return Err(Error::InvalidParams(format!(
                "cost {c} must lie in [0, a)"
            )));
        }
        Ok(())
    }

    pub fn alien(&self) -> usize {
        self.n - 1
    }

    /// Players `0..n-1` share one cost.
    pub fn is_one_alien(&self) -> bool {
        let head = &self.costs[..self.n - 1];
        head.iter().all(|&c| c == head[0])
    }

    pub fn is_symmetric(&self) -> bool {
        self.costs.iter().all(|&c| c == self.costs[0])
    }

    /// Interval used for both quantities and prices: `[0, a]`.
    pub fn domain(&self, _variable: Variable) -> StrategyDomain {
        StrategyDomain {
            lower: 0.0,
            upper: self.a,
        }
    }
}

/// Both directions of the linear quantity/price relation.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandSystem {
    pub n: usize,
    pub intercept: Vec<f64>,
    pub quantity_to_price: Matrix,
    pub price_to_quantity: Matrix,
}

/// Does not re-validate `params`; a corrupted `b` (such as 1, which makes
/// every row identical) surfaces as [`Error::SingularSystem`].
pub fn build_demand_system(params: &MarketParams) -> Result<DemandSystem> {
    let n = params.n;
    let b = params.b;
    let quantity_to_price = Matrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { b });
    let price_to_quantity = quantity_to_price.inverse()?;
    Ok(DemandSystem {
        n,
        intercept: vec![params.a; n],
        quantity_to_price,
        price_to_quantity,
    })
}

impl DemandSystem {
    /// `p = a - M x`.
    pub fn prices(&self, quantities: &[f64]) -> Vec<f64> {
        self.quantity_to_price
            .mul_vec(quantities)
            .into_iter()
            .zip(&self.intercept)
            .map(|(mx, a)| a - mx)
            .collect()
    }

    /// `x = M^-1 (a - p)`.
    pub fn quantities(&self, prices: &[f64]) -> Vec<f64> {
        let gap: Vec<f64> = self
            .intercept
            .iter()
            .zip(prices)
            .map(|(a, p)| a - p)
            .collect();
        self.price_to_quantity.mul_vec(&gap)
    }

    /// Largest violation of `p_i + (M x)_i = a_i`.
    pub fn demand_residual(&self, quantities: &[f64], prices: &[f64]) -> f64 {
        self.prices(quantities)
            .iter()
            .zip(prices)
            .map(|(u, v)| (u - v).abs())
            .fold(0.0, f64::max)
    }

    /// Matrix of the elimination system for `pattern`. Unknowns are `p_i`
    /// for quantity players and `x_i` for price players; column `i` is the
    /// unit vector in the first case and column `i` of `M` in the second.
    fn elimination_matrix(&self, pattern: &PatternAssignment) -> Matrix {
        let m = &self.quantity_to_price;
        Matrix::from_fn(self.n, self.n, |r, i| match pattern.get(i) {
            Variable::Quantity => (r == i) as u8 as f64,
            Variable::Price => m[(r, i)],
        })
    }

    fn check_pattern(&self, pattern: &PatternAssignment) -> Result<()> {
        if pattern.len() != self.n {
            return Err(Error::PatternLength {
                expected: self.n,
                got: pattern.len(),
            });
        }
        Ok(())
    }
}

/// Everything that follows from one strategy profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeProfile {
    pub quantities: Vec<f64>,
    pub prices: Vec<f64>,
    pub absolute_profits: Vec<f64>,
    pub relative_profits: Vec<f64>,
}

impl OutcomeProfile {
    pub fn from_quantities_prices(params: &MarketParams, quantities: Vec<f64>, prices: Vec<f64>) -> Self {
        let pay = payoff::payoffs_from(params, &quantities, &prices);
        OutcomeProfile {
            quantities,
            prices,
            absolute_profits: pay.absolute,
            relative_profits: pay.relative,
        }
    }

    /// Value of `variable` for `player`.
    pub fn value(&self, variable: Variable, player: usize) -> f64 {
        match variable {
            Variable::Quantity => self.quantities[player],
            Variable::Price => self.prices[player],
        }
    }

    /// The strategy vector that reproduces this outcome under `pattern`.
    pub fn strategy_for(&self, pattern: &PatternAssignment) -> Vec<f64> {
        pattern
            .choices()
            .iter()
            .enumerate()
            .map(|(i, &v)| self.value(v, i))
            .collect()
    }
}

/// Solves for the unchosen half of every `(x_i, p_i)` pair.
///
/// `strategy[i]` is a quantity when player `i` chose `Q` and a price when it
/// chose `P`.
pub fn resolve_outcome(
    params: &MarketParams,
    system: &DemandSystem,
    pattern: &PatternAssignment,
    strategy: &[f64],
) -> Result<OutcomeProfile> {
    system.check_pattern(pattern)?;
    if strategy.len() != system.n {
        return Err(Error::StrategyLength {
            expected: system.n,
            got: strategy.len(),
        });
    }
    let a_mat = system.elimination_matrix(pattern);
    let m = &system.quantity_to_price;
    let n = system.n;

    // rhs_r = a - sum_{j in Q} M_rj x_j - [r in P] p_r
    let rhs: Vec<f64> = (0..n)
        .map(|r| {
            let mut v = system.intercept[r];
            for (j, &s) in strategy.iter().enumerate() {
                if pattern.get(j) == Variable::Quantity {
                    v -= m[(r, j)] * s;
                }
            }
            if pattern.get(r) == Variable::Price {
                v -= strategy[r];
            }
            v
        })
        .collect();
    let z = a_mat.solve(&rhs)?;
    let (quantities, prices) = split_unknowns(pattern, strategy, &z);
    Ok(OutcomeProfile::from_quantities_prices(params, quantities, prices))
}

fn split_unknowns(pattern: &PatternAssignment, strategy: &[f64], z: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut quantities = Vec::with_capacity(z.len());
    let mut prices = Vec::with_capacity(z.len());
    for (i, (&s, &u)) in strategy.iter().zip(z).enumerate() {
        match pattern.get(i) {
            Variable::Quantity => {
                quantities.push(s);
                prices.push(u);
            }
            Variable::Price => {
                quantities.push(u);
                prices.push(s);
            }
        }
    }
    (quantities, prices)
}

/// Affine map from a strategy vector to quantities and prices under a fixed
/// pattern: `x = x0 + Dx v`, `p = p0 + Dp v`.
///
/// Built from one factorisation of the elimination matrix, so repeated
/// evaluation (best responses, nested optimisation) stays cheap.
#[derive(Debug, Clone)]
pub struct PatternMap {
    pub pattern: PatternAssignment,
    pub base_quantities: Vec<f64>,
    pub base_prices: Vec<f64>,
    /// `d x_j / d v_k` at `(j, k)`.
    pub quantity_jacobian: Matrix,
    /// `d p_j / d v_k` at `(j, k)`.
    pub price_jacobian: Matrix,
}

impl PatternMap {
    pub fn build(system: &DemandSystem, pattern: &PatternAssignment) -> Result<Self> {
        system.check_pattern(pattern)?;
        let n = system.n;
        let lu: Lu = system.elimination_matrix(pattern).lu()?;
        let m = &system.quantity_to_price;

        let z0 = lu.solve(&system.intercept);
        let zero = vec![0.0; n];
        let (base_quantities, base_prices) = split_unknowns(pattern, &zero, &z0);

        let mut quantity_jacobian = Matrix::zeros(n, n);
        let mut price_jacobian = Matrix::zeros(n, n);
        for k in 0..n {
            let drhs: Vec<f64> = match pattern.get(k) {
                Variable::Quantity => m.column(k).into_iter().map(|v| -v).collect(),
                Variable::Price => (0..n).map(|r| if r == k { -1.0 } else { 0.0 }).collect(),
            };
            let dz = lu.solve(&drhs);
            for j in 0..n {
                let own = if j == k { 1.0 } else { 0.0 };
                match pattern.get(j) {
                    Variable::Quantity => {
                        quantity_jacobian[(j, k)] = own;
                        price_jacobian[(j, k)] = dz[j];
                    }
                    Variable::Price => {
                        quantity_jacobian[(j, k)] = dz[j];
                        price_jacobian[(j, k)] = own;
                    }
                }
            }
        }
        Ok(PatternMap {
            pattern: pattern.clone(),
            base_quantities,
            base_prices,
            quantity_jacobian,
            price_jacobian,
        })
    }

    pub fn n(&self) -> usize {
        self.base_quantities.len()
    }

    pub fn quantities_prices(&self, strategy: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let dx = self.quantity_jacobian.mul_vec(strategy);
        let dp = self.price_jacobian.mul_vec(strategy);
        (
            self.base_quantities.iter().zip(dx).map(|(a, b)| a + b).collect(),
            self.base_prices.iter().zip(dp).map(|(a, b)| a + b).collect(),
        )
    }

    pub fn outcome(&self, params: &MarketParams, strategy: &[f64]) -> OutcomeProfile {
        let (x, p) = self.quantities_prices(strategy);
        OutcomeProfile::from_quantities_prices(params, x, p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn standard() -> MarketParams {
        MarketParams::new(4, 2.0, 0.5, vec![1.0, 1.0, 1.0, 1.2]).unwrap()
    }

    #[test]
    fn pattern_text_is_case_insensitive_and_canonical() {
        let p: PatternAssignment = "qqQp".parse().unwrap();
        assert_eq!(p.to_string(), "QQQP");
        assert_eq!(p.get(3), Variable::Price);
        assert_eq!("QXQ".parse::<PatternAssignment>(), Err(Error::InvalidPattern('X')));
        assert!(matches!(
            PatternAssignment::parse_for("QQQ", 4),
            Err(Error::PatternLength { expected: 4, got: 3 })
        ));
    }

    #[test]
    fn all_patterns_enumerates_in_order() {
        let all = PatternAssignment::all(3);
        assert_eq!(all.len(), 8);
        assert_eq!(all[0].to_string(), "QQQ");
        assert_eq!(all[1].to_string(), "QQP");
        assert_eq!(all[7].to_string(), "PPP");
    }

    #[test]
    fn params_validation() {
        assert!(MarketParams::new(2, 2.0, 0.5, vec![1.0, 1.0]).is_err());
        let err = MarketParams::new(4, 2.0, 1.0, vec![1.0; 4]).unwrap_err();
        assert!(err.to_string().contains("b must lie in (0,1)"));
        assert!(MarketParams::new(4, 2.0, 0.0, vec![1.0; 4]).is_err());
        assert!(MarketParams::new(4, 2.0, 0.5, vec![1.0; 3]).is_err());
        assert!(MarketParams::new(4, 2.0, 0.5, vec![1.0, 1.0, 1.0, 2.0]).is_err());
        assert!(MarketParams::new(4, -1.0, 0.5, vec![0.0; 4]).is_err());
        let p = standard();
        assert!(p.is_one_alien());
        assert!(!p.is_symmetric());
        assert_eq!(p.alien(), 3);
    }

    #[test]
    fn params_json_round_trip() {
        let p = MarketParams::from_json(r#"{"n": 4, "a": 2, "b": 0.5, "costs": [1, 1, 1, 1.2]}"#).unwrap();
        assert_eq!(p, standard());
        assert!(MarketParams::from_json(r#"{"n": 4, "a": 2, "b": 1.5, "costs": [1, 1, 1, 1]}"#).is_err());
        assert!(matches!(MarketParams::from_json("{"), Err(Error::Json(_))));
    }

    #[test]
    fn strategy_domain_rejects_empty_interval() {
        assert!(StrategyDomain::new(1.0, 1.0).is_err());
        let d = StrategyDomain::new(0.0, 2.0).unwrap();
        assert_eq!(d.clamp(3.0), 2.0);
        assert!(d.contains(0.0) && !d.strictly_contains(0.0));
    }

    #[test]
    fn quantity_to_price_rows() {
        let sys = build_demand_system(&standard()).unwrap();
        assert_eq!(sys.quantity_to_price.row(0), &[1.0, 0.5, 0.5, 0.5]);
        assert_eq!(sys.quantity_to_price.row(2), &[0.5, 0.5, 1.0, 0.5]);
    }

    #[test]
    fn price_to_quantity_matches_direct_demand_coefficients() {
        // closed-form inverse of (1-b)I + bJ at n=4, b=0.5:
        // own 1/(1-b) * (1 - b/(1+3b)) = 1.6, cross -b/((1-b)(1+3b)) = -0.4.
        // x = M^-1 (a - p), so the price coefficients are -1.6 and +0.4.
        let sys = build_demand_system(&standard()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 1.6 } else { -0.4 };
                assert!((sys.price_to_quantity[(i, j)] - expected).abs() < 1e-12);
            }
        }
        let id = sys.quantity_to_price.mul(&sys.price_to_quantity);
        assert!(id.max_abs_diff(&Matrix::identity(4)) < 1e-12);
    }

    #[test]
    fn zero_substitutability_decouples_goods() {
        let p = MarketParams { n: 4, a: 2.0, b: 0.0, costs: vec![0.0; 4] };
        let sys = build_demand_system(&p).unwrap();
        let x = sys.quantities(&[0.5, 1.0, 1.5, 2.0]);
        assert_eq!(x, vec![1.5, 1.0, 0.5, 0.0]);
    }

    #[test]
    fn perfect_substitutes_are_singular() {
        let p = MarketParams { n: 4, a: 2.0, b: 1.0, costs: vec![0.0; 4] };
        assert!(matches!(build_demand_system(&p), Err(Error::SingularSystem { .. })));
    }

    #[test]
    fn quantity_pattern_gives_inverse_demand_prices() {
        let params = standard();
        let sys = build_demand_system(&params).unwrap();
        let x = [0.3, 0.3, 0.3, 0.2];
        let out = resolve_outcome(&params, &sys, &"QQQQ".parse().unwrap(), &x).unwrap();
        // p_A = 2 - 0.3 - 0.5 * 0.8, p_D = 2 - 0.2 - 0.5 * 0.9
        for (p, e) in out.prices.iter().zip([1.3, 1.3, 1.3, 1.35]) {
            assert!((p - e).abs() < 1e-14);
        }
    }

    #[test]
    fn alien_price_pattern_induces_its_quantity() {
        let params = standard();
        let sys = build_demand_system(&params).unwrap();
        let v = [0.3, 0.25, 0.35, 1.1];
        let out = resolve_outcome(&params, &sys, &"QQQP".parse().unwrap(), &v).unwrap();
        // x_D = a - b(x_A + x_B + x_C) - p_D
        let expected = 2.0 - 0.5 * (0.3 + 0.25 + 0.35) - 1.1;
        assert!((out.quantities[3] - expected).abs() < 1e-12);
        assert!(sys.demand_residual(&out.quantities, &out.prices) < 1e-12);
    }

    #[test]
    fn pattern_map_matches_direct_resolution() {
        let params = standard();
        let sys = build_demand_system(&params).unwrap();
        for pattern in PatternAssignment::all(4) {
            let map = PatternMap::build(&sys, &pattern).unwrap();
            let v = [0.31, 1.2, 0.27, 0.9];
            let direct = resolve_outcome(&params, &sys, &pattern, &v).unwrap();
            let mapped = map.outcome(&params, &v);
            for i in 0..4 {
                assert!((direct.quantities[i] - mapped.quantities[i]).abs() < 1e-12);
                assert!((direct.prices[i] - mapped.prices[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn wrong_lengths_are_errors() {
        let params = standard();
        let sys = build_demand_system(&params).unwrap();
        let q4: PatternAssignment = "QQQQ".parse().unwrap();
        assert!(matches!(
            resolve_outcome(&params, &sys, &q4, &[0.1, 0.2]),
            Err(Error::StrategyLength { .. })
        ));
        let q3: PatternAssignment = "QQQ".parse().unwrap();
        assert!(matches!(
            resolve_outcome(&params, &sys, &q3, &[0.1, 0.2, 0.3]),
            Err(Error::PatternLength { .. })
        ));
    }
}
