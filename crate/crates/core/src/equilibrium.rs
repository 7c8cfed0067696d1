//! Nash equilibria for a given pattern, by a direct first-order-condition
//! solve and by damped best-response iteration, and comparison of
//! equilibria across patterns.

use std::fmt;

use crate::error::{Error, Result};
use crate::market::{DemandSystem, MarketParams, OutcomeProfile, PatternAssignment};
use crate::payoff::{payoffs, PayoffVector, QuadraticGame};

/// FOC residual accepted from the direct solve.
pub const FOC_TOLERANCE: f64 = 1e-10;

/// Default outcome tolerance for [`compare_equilibria`].
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    FocSolve,
    BestResponse,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::FocSolve => f.write_str("foc-solve"),
            Method::BestResponse => f.write_str("best-response"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub params: MarketParams,
    pub pattern: PatternAssignment,
    /// Equilibrium values of each player's chosen variable.
    pub strategy: Vec<f64>,
    pub outcome: OutcomeProfile,
    pub payoffs: PayoffVector,
    pub method: Method,
    pub iterations: usize,
    /// Sup-norm of the FOC values (direct solve) or of the last step
    /// (best response).
    pub residual: f64,
    /// Players whose strategy is not strictly inside its domain.
    pub boundary: Vec<usize>,
}

impl EquilibriumReport {
    pub fn is_interior(&self) -> bool {
        self.boundary.is_empty()
    }

    /// Price (or quantity) that the alien would have to name to reproduce
    /// this outcome after switching variables.
    pub fn induced_alien_value(&self) -> f64 {
        let alien = self.params.alien();
        self.outcome.value(self.pattern.get(alien).other(), alien)
    }
}

fn boundary_players(params: &MarketParams, pattern: &PatternAssignment, strategy: &[f64]) -> Vec<usize> {
    strategy
        .iter()
        .enumerate()
        .filter(|&(i, &v)| !params.domain(pattern.get(i)).strictly_contains(v))
        .map(|(i, _)| i)
        .collect()
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn report(
    params: &MarketParams,
    game: &QuadraticGame,
    strategy: Vec<f64>,
    method: Method,
    iterations: usize,
    residual: f64,
) -> EquilibriumReport {
    let outcome = game.map.outcome(params, &strategy);
    let boundary = boundary_players(params, &game.map.pattern, &strategy);
    EquilibriumReport {
        params: params.clone(),
        pattern: game.map.pattern.clone(),
        payoffs: payoffs(&outcome, params),
        strategy,
        outcome,
        method,
        iterations,
        residual,
        boundary,
    }
}

/// Solves `d phi_i / d v_i = 0` for all `i` as one linear system.
///
/// A solution outside the strategy domains is returned as is and listed in
/// [`EquilibriumReport::boundary`]; it is never clipped.
pub fn solve_foc(params: &MarketParams, system: &DemandSystem, pattern: &PatternAssignment) -> Result<EquilibriumReport> {
    let game = QuadraticGame::build(params, system, pattern)?;
    for i in 0..params.n {
        if !(game.own_curvature(i) < 0.0) {
            return Err(Error::ShapeViolation(format!(
                "player {i} payoff not strictly concave in own variable under {pattern}"
            )));
        }
    }
    let rhs: Vec<f64> = game.own_gradient_at_zero.iter().map(|g| -g).collect();
    let strategy = game.hessian.solve(&rhs)?;
    let residual = (0..params.n)
        .map(|i| game.own_gradient(&strategy, i).abs())
        .fold(0.0, f64::max);
    if residual >= FOC_TOLERANCE {
        return Err(Error::FocResidual(residual));
    }
    Ok(report(params, &game, strategy, Method::FocSolve, 1, residual))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestResponseOptions {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Starting strategy; domain midpoints when `None`.
    pub start: Option<Vec<f64>>,
}

impl Default for BestResponseOptions {
    fn default() -> Self {
        BestResponseOptions {
            damping: 0.5,
            tol: 1e-10,
            max_iter: 10_000,
            start: None,
        }
    }
}

/// Damped simultaneous best-response iteration
/// `v <- (1 - damping) v + damping BR(v)`.
///
/// Each best response is the vertex of a strictly concave parabola, clamped
/// to the domain. Stops once the sup-norm step falls below `tol`.
pub fn solve_best_response(
    params: &MarketParams,
    system: &DemandSystem,
    pattern: &PatternAssignment,
    options: &BestResponseOptions,
) -> Result<EquilibriumReport> {
    if !(options.damping > 0.0 && options.damping <= 1.0) {
        return Err(Error::InvalidParams(format!(
            "damping {} must lie in (0, 1]",
            options.damping
        )));
    }
    if !(options.tol > 0.0) {
        return Err(Error::InvalidParams("tolerance must be positive".into()));
    }
    let game = QuadraticGame::build(params, system, pattern)?;
    let n = params.n;
    let domains: Vec<_> = pattern.choices().iter().map(|&v| params.domain(v)).collect();
    let mut v: Vec<f64> = match &options.start {
        Some(s) if s.len() == n => s.clone(),
        Some(s) => return Err(Error::StrategyLength { expected: n, got: s.len() }),
        None => domains.iter().map(|d| d.midpoint()).collect(),
    };

    let mut last_step = f64::INFINITY;
    for iteration in 1..=options.max_iter {
        let mut next = Vec::with_capacity(n);
        for i in 0..n {
            let br = domains[i].clamp(game.best_response_vertex(&v, i)?);
            next.push((1.0 - options.damping) * v[i] + options.damping * br);
        }
        let step: Vec<f64> = next.iter().zip(&v).map(|(a, b)| a - b).collect();
        last_step = sup_norm(&step);
        v = next;
        if !last_step.is_finite() {
            break;
        }
        if last_step < options.tol {
            return Ok(report(params, &game, v, Method::BestResponse, iteration, last_step));
        }
    }
    Err(Error::NoConvergence {
        iterations: options.max_iter,
        last_step,
    })
}

/// One entry of an outcome: a player's quantity or price.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeComponent {
    Quantity(usize),
    Price(usize),
}

impl fmt::Display for OutcomeComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutcomeComponent::Quantity(i) => write!(f, "x[{i}]"),
            OutcomeComponent::Price(i) => write!(f, "p[{i}]"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EquivalenceVerdict {
    Equivalent {
        max_deviation: f64,
    },
    NotEquivalent {
        max_deviation: f64,
        component: OutcomeComponent,
    },
}

impl EquivalenceVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, EquivalenceVerdict::Equivalent { .. })
    }

    pub fn max_deviation(&self) -> f64 {
        match *self {
            EquivalenceVerdict::Equivalent { max_deviation } => max_deviation,
            EquivalenceVerdict::NotEquivalent { max_deviation, .. } => max_deviation,
        }
    }
}

/// Largest componentwise gap between two outcomes, over quantities and
/// prices, with the component where it occurs.
pub fn outcome_deviation(first: &OutcomeProfile, second: &OutcomeProfile) -> (f64, OutcomeComponent) {
    let mut worst = (0.0, OutcomeComponent::Quantity(0));
    for (i, (u, v)) in first.quantities.iter().zip(&second.quantities).enumerate() {
        let d = (u - v).abs();
        if d > worst.0 {
            worst = (d, OutcomeComponent::Quantity(i));
        }
    }
    for (i, (u, v)) in first.prices.iter().zip(&second.prices).enumerate() {
        let d = (u - v).abs();
        if d > worst.0 {
            worst = (d, OutcomeComponent::Price(i));
        }
    }
    worst
}

/// Equilibria are equivalent when they produce the same quantities and
/// prices; strategy coordinates are not compared since they live in
/// different variables under different patterns.
pub fn compare_equilibria(first: &EquilibriumReport, second: &EquilibriumReport, tol: f64) -> Result<EquivalenceVerdict> {
    if first.params != second.params {
        return Err(Error::ParamMismatch);
    }
    let (max_deviation, component) = outcome_deviation(&first.outcome, &second.outcome);
    Ok(if max_deviation < tol {
        EquivalenceVerdict::Equivalent { max_deviation }
    } else {
        EquivalenceVerdict::NotEquivalent { max_deviation, component }
    })
}
