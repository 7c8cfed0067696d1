//! Absolute and relative profits, and their derivatives in each player's
//! own strategic variable.
//!
//! Relative profit is a firm's profit minus the mean profit of its rivals,
//! which makes the payoffs sum to zero. Under any pattern the outcome is
//! affine in the strategy vector, so every payoff is a quadratic and every
//! first-order condition is linear.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::market::{DemandSystem, MarketParams, OutcomeProfile, PatternAssignment, PatternMap};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffVector {
    pub absolute: Vec<f64>,
    pub relative: Vec<f64>,
}

impl PayoffVector {
    pub fn relative_sum(&self) -> f64 {
        self.relative.iter().sum()
    }
}

/// A zero-sum payoff family evaluated on resolved quantities and prices.
///
/// Only [`RelativeProfit`] ships; the gradient and FOC machinery below is
/// specific to it.
pub trait ZeroSumPayoff {
    fn evaluate(&self, params: &MarketParams, quantities: &[f64], prices: &[f64]) -> PayoffVector;

    fn player(&self, params: &MarketParams, quantities: &[f64], prices: &[f64], player: usize) -> f64 {
        self.evaluate(params, quantities, prices).relative[player]
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RelativeProfit;

impl ZeroSumPayoff for RelativeProfit {
    fn evaluate(&self, params: &MarketParams, quantities: &[f64], prices: &[f64]) -> PayoffVector {
        payoffs_from(params, quantities, prices)
    }

    fn player(&self, params: &MarketParams, quantities: &[f64], prices: &[f64], player: usize) -> f64 {
        let n = quantities.len();
        let mut own = 0.0;
        let mut rivals = 0.0;
        for j in 0..n {
            let pi = (prices[j] - params.costs[j]) * quantities[j];
            if j == player {
                own = pi;
            } else {
                rivals += pi;
            }
        }
        own - rivals / (n - 1) as f64
    }
}

pub(crate) fn payoffs_from(params: &MarketParams, quantities: &[f64], prices: &[f64]) -> PayoffVector {
    let absolute: Vec<f64> = quantities
        .iter()
        .zip(prices)
        .zip(&params.costs)
        .map(|((x, p), c)| (p - c) * x)
        .collect();
    let n = absolute.len();
    let relative = (0..n)
        .map(|i| {
            let rivals: f64 = absolute
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, v)| v)
                .sum();
            absolute[i] - rivals / (n - 1) as f64
        })
        .collect();
    PayoffVector { absolute, relative }
}

/// `pi_i = (p_i - c_i) x_i`, `phi_i = pi_i - sum_{j != i} pi_j / (n-1)`.
pub fn payoffs(outcome: &OutcomeProfile, params: &MarketParams) -> PayoffVector {
    payoffs_from(params, &outcome.quantities, &outcome.prices)
}

/// Weight of `pi_j` in `phi_i`.
fn relative_weight(i: usize, j: usize, n: usize) -> f64 {
    if i == j {
        1.0
    } else {
        -1.0 / (n - 1) as f64
    }
}

/// Quadratic structure of the relative-profit game under one pattern.
///
/// `d phi_i / d v_i = own_gradient_at_zero[i] + sum_k hessian[(i, k)] v_k`.
#[derive(Debug, Clone)]
pub struct QuadraticGame {
    pub map: PatternMap,
    pub costs: Vec<f64>,
    pub own_gradient_at_zero: Vec<f64>,
    /// Row `i` holds the derivatives of player `i`'s first-order condition.
    pub hessian: Matrix,
}

impl QuadraticGame {
    pub fn build(params: &MarketParams, system: &DemandSystem, pattern: &PatternAssignment) -> Result<Self> {
        let map = PatternMap::build(system, pattern)?;
        let n = map.n();
        let dx = &map.quantity_jacobian;
        let dp = &map.price_jacobian;

        let mut hessian = Matrix::zeros(n, n);
        let mut own_gradient_at_zero = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                let w = relative_weight(i, j, n);
                // d pi_j / d v_i = dp_ji x_j + (p_j - c_j) dx_ji
                own_gradient_at_zero[i] += w
                    * (dp[(j, i)] * map.base_quantities[j]
                        + (map.base_prices[j] - params.costs[j]) * dx[(j, i)]);
                for k in 0..n {
                    hessian[(i, k)] += w * (dp[(j, i)] * dx[(j, k)] + dp[(j, k)] * dx[(j, i)]);
                }
            }
        }
        Ok(QuadraticGame {
            map,
            costs: params.costs.clone(),
            own_gradient_at_zero,
            hessian,
        })
    }

    pub fn n(&self) -> usize {
        self.costs.len()
    }

    /// `d phi_player / d v_player` evaluated from the outcome at `strategy`.
    pub fn own_gradient(&self, strategy: &[f64], player: usize) -> f64 {
        self.partial(strategy, player, player)
    }

    /// All first-order-condition values at `strategy`.
    pub fn foc_values(&self, strategy: &[f64]) -> Vec<f64> {
        let hv = self.hessian.mul_vec(strategy);
        self.own_gradient_at_zero.iter().zip(hv).map(|(g, h)| g + h).collect()
    }

    /// `d phi_player / d v_wrt` at `strategy`.
    pub fn partial(&self, strategy: &[f64], player: usize, wrt: usize) -> f64 {
        let (x, p) = self.map.quantities_prices(strategy);
        let dx = &self.map.quantity_jacobian;
        let dp = &self.map.price_jacobian;
        let n = self.n();
        (0..n)
            .map(|j| relative_weight(player, j, n) * (dp[(j, wrt)] * x[j] + (p[j] - self.costs[j]) * dx[(j, wrt)]))
            .sum()
    }

    /// `d^2 phi_player / d v_k d v_m` (constant, the payoff being quadratic).
    pub fn second_partial(&self, player: usize, k: usize, m: usize) -> f64 {
        let n = self.n();
        let dx = &self.map.quantity_jacobian;
        let dp = &self.map.price_jacobian;
        (0..n)
            .map(|j| relative_weight(player, j, n) * (dp[(j, k)] * dx[(j, m)] + dp[(j, m)] * dx[(j, k)]))
            .sum()
    }

    /// Second derivative of `phi_player` in its own variable.
    pub fn own_curvature(&self, player: usize) -> f64 {
        self.hessian[(player, player)]
    }

    /// Second derivative of `phi_player` in `other`'s variable.
    pub fn cross_curvature(&self, player: usize, other: usize) -> f64 {
        self.second_partial(player, other, other)
    }

    /// Maximiser of `phi_player` in its own variable with the others fixed
    /// (unconstrained vertex of the parabola).
    pub fn best_response_vertex(&self, strategy: &[f64], player: usize) -> Result<f64> {
        let h = self.own_curvature(player);
        if !(h < 0.0) {
            return Err(Error::ShapeViolation(format!(
                "payoff of player {player} is not strictly concave in its own variable (curvature {h:e})"
            )));
        }
        Ok(strategy[player] - self.own_gradient(strategy, player) / h)
    }
}

/// `d phi_player / d(own chosen variable)` at `strategy`.
pub fn payoff_gradient(
    params: &MarketParams,
    system: &DemandSystem,
    pattern: &PatternAssignment,
    strategy: &[f64],
    player: usize,
) -> Result<f64> {
    if player >= params.n {
        return Err(Error::PlayerIndex { index: player, n: params.n });
    }
    if strategy.len() != params.n {
        return Err(Error::StrategyLength { expected: params.n, got: strategy.len() });
    }
    Ok(QuadraticGame::build(params, system, pattern)?.own_gradient(strategy, player))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{build_demand_system, resolve_outcome};

    fn standard() -> MarketParams {
        MarketParams::new(4, 2.0, 0.5, vec![1.0, 1.0, 1.0, 1.2]).unwrap()
    }

    #[test]
    fn zero_output_gives_zero_payoffs() {
        let params = standard();
        let out = OutcomeProfile::from_quantities_prices(&params, vec![0.0; 4], vec![2.0; 4]);
        let pay = payoffs(&out, &params);
        assert!(pay.absolute.iter().all(|&v| v == 0.0));
        assert!(pay.relative.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn symmetric_outcome_has_zero_relative_profit() {
        let params = MarketParams::new(4, 2.0, 0.5, vec![1.0; 4]).unwrap();
        let sys = build_demand_system(&params).unwrap();
        let out = resolve_outcome(&params, &sys, &"QQQQ".parse().unwrap(), &[0.3; 4]).unwrap();
        assert!(out.relative_profits.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn hand_evaluated_profits() {
        // p = (1.3, 1.3, 1.3, 1.35); pi = (0.09, 0.09, 0.09, 0.03)
        // phi_A = 0.09 - 0.21/3 = 0.02, phi_D = 0.03 - 0.27/3 = -0.06
        let params = standard();
        let sys = build_demand_system(&params).unwrap();
        let out = resolve_outcome(&params, &sys, &"QQQQ".parse().unwrap(), &[0.3, 0.3, 0.3, 0.2]).unwrap();
        let pay = payoffs(&out, &params);
        for (v, e) in pay.absolute.iter().zip([0.09, 0.09, 0.09, 0.03]) {
            assert!((v - e).abs() < 1e-15, "{v} vs {e}");
        }
        for (v, e) in pay.relative.iter().zip([0.02, 0.02, 0.02, -0.06]) {
            assert!((v - e).abs() < 1e-15, "{v} vs {e}");
        }
        assert!(pay.relative_sum().abs() < 1e-15);
        let single = RelativeProfit.player(&params, &out.quantities, &out.prices, 3);
        assert!((single - pay.relative[3]).abs() < 1e-15);
    }

    #[test]
    fn cournot_gradient_at_origin_is_margin() {
        // a - c_A - 2 x_A - (2b/3) sum_{j != A} x_j at x = 0
        let params = standard();
        let sys = build_demand_system(&params).unwrap();
        let g = payoff_gradient(&params, &sys, &"QQQQ".parse().unwrap(), &[0.0; 4], 0).unwrap();
        assert!((g - 1.0).abs() < 1e-14);
        let g_alien = payoff_gradient(&params, &sys, &"QQQQ".parse().unwrap(), &[0.0; 4], 3).unwrap();
        assert!((g_alien - 0.8).abs() < 1e-14);
    }

    #[test]
    fn symmetric_equilibrium_has_zero_gradient() {
        let params = MarketParams::new(4, 2.0, 0.5, vec![1.0; 4]).unwrap();
        let sys = build_demand_system(&params).unwrap();
        let x = (2.0 - 1.0) / (2.0 * 1.5);
        for i in 0..4 {
            let g = payoff_gradient(&params, &sys, &"QQQQ".parse().unwrap(), &[x; 4], i).unwrap();
            assert!(g.abs() < 1e-10);
        }
    }

    #[test]
    fn foc_values_agree_with_pointwise_gradient() {
        let params = standard();
        let sys = build_demand_system(&params).unwrap();
        let game = QuadraticGame::build(&params, &sys, &"QPQP".parse().unwrap()).unwrap();
        let v = [0.4, 1.1, 0.2, 1.3];
        let foc = game.foc_values(&v);
        for (i, f) in foc.iter().enumerate() {
            assert!((f - game.own_gradient(&v, i)).abs() < 1e-13);
        }
    }

    #[test]
    fn player_index_checked() {
        let params = standard();
        let sys = build_demand_system(&params).unwrap();
        assert!(matches!(
            payoff_gradient(&params, &sys, &"QQQQ".parse().unwrap(), &[0.0; 4], 4),
            Err(Error::PlayerIndex { .. })
        ));
    }
}
