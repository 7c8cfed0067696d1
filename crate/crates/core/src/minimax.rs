//! Numerical check of the pairwise minimax equalities between a symmetric
//! player `i` and the alien, with every other player's quantity frozen.
//!
//! Four values are computed by nested one-dimensional optimisation:
//!
//! 1. `min_{t_n} max_{t_i} phi_i` with the alien choosing its quantity,
//! 2. `min_{s_n} max_{t_i} phi_i` with the alien choosing its price,
//! 3. `max_{t_i} min_{s_n} phi_i`,
//! 4. `max_{t_i} min_{t_n} phi_i`.
//!
//! They coincide when the game is concave-convex in `(t_i, t_n)` and every
//! alien quantity is reachable through some alien price. The optimiser is a
//! plain golden-section search; it never looks at derivatives.

use crate::error::{Error, Result};
use crate::market::{DemandSystem, MarketParams, PatternAssignment, PatternMap, StrategyDomain, Variable};
use crate::payoff::{QuadraticGame, RelativeProfit, ZeroSumPayoff};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum {
    pub arg: f64,
    pub value: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9; // (sqrt(5) - 1) / 2

/// Golden-section search on `domain` until the bracket is narrower than
/// `tol`. Reliable for quasi-concave objectives under `Max` and
/// quasi-convex ones under `Min`.
pub fn inner_opt(mut objective: impl FnMut(f64) -> f64, domain: StrategyDomain, sense: Sense, tol: f64) -> Optimum {
    let sign = match sense {
        Sense::Max => -1.0,
        Sense::Min => 1.0,
    };
    let mut f = |x: f64| sign * objective(x);
    let (mut lo, mut hi) = (domain.lower, domain.upper);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let arg = 0.5 * (lo + hi);
    Optimum {
        arg,
        value: sign * f(arg),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimaxTolerances {
    /// Bracket width of inner searches.
    pub inner: f64,
    /// Bracket width of outer searches.
    pub outer: f64,
    /// Largest spread of the four values accepted as agreement.
    pub agreement: f64,
}

impl Default for MinimaxTolerances {
    fn default() -> Self {
        MinimaxTolerances {
            inner: 1e-9,
            outer: 1e-7,
            agreement: 1e-5,
        }
    }
}

/// Slack allowed in `max min <= min max` before it counts as a violation.
pub const WEAK_DUALITY_SLACK: f64 = 1e-9;

/// Outer and inner optimiser of one nested value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArgPair {
    pub outer: f64,
    pub inner: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimaxReport {
    pub player_i: usize,
    /// `(player, variable, value)` for every frozen player.
    pub frozen: Vec<(usize, Variable, f64)>,
    pub v_min_tn_max_ti: f64,
    pub v_min_sn_max_ti: f64,
    pub v_max_ti_min_sn: f64,
    pub v_max_ti_min_tn: f64,
    /// Optimisers in the same order as the four values.
    pub arg_points: [ArgPair; 4],
    pub max_spread: f64,
    /// How far `max min` exceeds `min max`, over both variable choices of
    /// the alien; zero when weak duality holds.
    pub weak_duality_violation: f64,
    pub shape_violations: Vec<String>,
    /// Analytic saddle point of the pair game (relative profits only).
    pub saddle: Option<PairSaddle>,
    /// Ways in which the quantity and price boxes fail to correspond at
    /// this instance; the four values need not agree when non-empty.
    pub domain_issues: Vec<String>,
    pub agreement_tol: f64,
}

impl MinimaxReport {
    pub fn values(&self) -> [f64; 4] {
        [
            self.v_min_tn_max_ti,
            self.v_min_sn_max_ti,
            self.v_max_ti_min_sn,
            self.v_max_ti_min_tn,
        ]
    }

    pub fn holds(&self) -> bool {
        self.max_spread < self.agreement_tol
    }

    pub fn weak_duality_ok(&self) -> bool {
        self.weak_duality_violation <= WEAK_DUALITY_SLACK
    }
}

/// Point where `phi_i` is stationary in both `t_i` and the alien quantity
/// `t_n`, with the alien price `s_n` it induces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSaddle {
    pub t_i: f64,
    pub t_n: f64,
    pub s_n: f64,
}

impl PairSaddle {
    /// Strictly inside the quantity box in both coordinates and inside the
    /// price box for the alien.
    pub fn is_interior(&self, params: &MarketParams) -> bool {
        let q = params.domain(Variable::Quantity);
        let p = params.domain(Variable::Price);
        q.strictly_contains(self.t_i) && q.strictly_contains(self.t_n) && p.strictly_contains(self.s_n)
    }
}

/// Solves the 2x2 stationarity system of `phi_i` in `(t_i, t_n)`.
pub fn pair_saddle(
    params: &MarketParams,
    system: &DemandSystem,
    player_i: usize,
    frozen: &[f64],
) -> Result<PairSaddle> {
    let n = params.n;
    let alien = params.alien();
    check_pair_args(params, player_i, frozen)?;
    let game = QuadraticGame::build(params, system, &PatternAssignment::uniform(n, Variable::Quantity))?;
    let mut v = vec![0.0; n];
    for (k, &value) in (0..n).filter(|&k| k != player_i && k != alien).zip(frozen) {
        v[k] = value;
    }
    let idx = [player_i, alien];
    let hess = crate::linalg::Matrix::from_fn(2, 2, |r, c| game.second_partial(player_i, idx[r], idx[c]));
    let rhs = [-game.partial(&v, player_i, player_i), -game.partial(&v, player_i, alien)];
    let sol = hess.solve(&rhs)?;
    v[player_i] = sol[0];
    v[alien] = sol[1];
    let (_, prices) = game.map.quantities_prices(&v);
    Ok(PairSaddle {
        t_i: sol[0],
        t_n: sol[1],
        s_n: prices[alien],
    })
}

fn check_pair_args(params: &MarketParams, player_i: usize, frozen: &[f64]) -> Result<()> {
    let alien = params.alien();
    if player_i >= alien {
        return Err(Error::PlayerIndex { index: player_i, n: alien });
    }
    if frozen.len() != params.n - 2 {
        return Err(Error::StrategyLength {
            expected: params.n - 2,
            got: frozen.len(),
        });
    }
    Ok(())
}

/// Evaluates `phi_i` as a function of `(t_i, alien variable)` with the rest
/// frozen.
struct PairGame<'a, P> {
    params: &'a MarketParams,
    payoff: &'a P,
    player_i: usize,
    alien: usize,
    base: Vec<f64>,
    quantity_map: PatternMap,
    price_map: PatternMap,
}

impl<P: ZeroSumPayoff> PairGame<'_, P> {
    fn phi(&self, t_i: f64, alien_value: f64, alien_variable: Variable) -> f64 {
        let mut v = self.base.clone();
        v[self.player_i] = t_i;
        v[self.alien] = alien_value;
        let map = match alien_variable {
            Variable::Quantity => &self.quantity_map,
            Variable::Price => &self.price_map,
        };
        let (x, p) = map.quantities_prices(&v);
        self.payoff.player(self.params, &x, &p, self.player_i)
    }

    fn min_max(&self, alien_variable: Variable, tol: &MinimaxTolerances) -> (f64, ArgPair) {
        let t_dom = self.params.domain(Variable::Quantity);
        let a_dom = self.params.domain(alien_variable);
        let outer = inner_opt(
            |u| inner_opt(|t| self.phi(t, u, alien_variable), t_dom, Sense::Max, tol.inner).value,
            a_dom,
            Sense::Min,
            tol.outer,
        );
        let inner = inner_opt(|t| self.phi(t, outer.arg, alien_variable), t_dom, Sense::Max, tol.inner);
        (
            inner.value,
            ArgPair {
                outer: outer.arg,
                inner: inner.arg,
            },
        )
    }

    fn max_min(&self, alien_variable: Variable, tol: &MinimaxTolerances) -> (f64, ArgPair) {
        let t_dom = self.params.domain(Variable::Quantity);
        let a_dom = self.params.domain(alien_variable);
        let outer = inner_opt(
            |t| inner_opt(|u| self.phi(t, u, alien_variable), a_dom, Sense::Min, tol.inner).value,
            t_dom,
            Sense::Max,
            tol.outer,
        );
        let inner = inner_opt(|u| self.phi(outer.arg, u, alien_variable), a_dom, Sense::Min, tol.inner);
        (
            inner.value,
            ArgPair {
                outer: outer.arg,
                inner: inner.arg,
            },
        )
    }

    /// Second differences along each coordinate at a few interior points.
    fn shape_violations(&self) -> Vec<String> {
        let t_dom = self.params.domain(Variable::Quantity);
        let mut found = Vec::new();
        let h = 1e-3 * t_dom.width();
        let fractions = [0.2, 0.4, 0.6, 0.8];
        for alien_variable in [Variable::Quantity, Variable::Price] {
            let a_dom = self.params.domain(alien_variable);
            for &ft in &fractions {
                for &fa in &fractions {
                    let t = t_dom.lower + ft * t_dom.width();
                    let u = a_dom.lower + fa * a_dom.width();
                    let own = self.phi(t + h, u, alien_variable) - 2.0 * self.phi(t, u, alien_variable)
                        + self.phi(t - h, u, alien_variable);
                    let opp = self.phi(t, u + h, alien_variable) - 2.0 * self.phi(t, u, alien_variable)
                        + self.phi(t, u - h, alien_variable);
                    if own > 1e-9 {
                        found.push(format!(
                            "phi_{} convex in own quantity at ({t}, {u}) with alien {alien_variable}",
                            self.player_i
                        ));
                    }
                    if opp < -1e-9 {
                        found.push(format!(
                            "phi_{} concave in alien {alien_variable} at ({t}, {u})",
                            self.player_i
                        ));
                    }
                }
            }
        }
        found
    }
}

fn pair_game<'a, P: ZeroSumPayoff>(
    params: &'a MarketParams,
    system: &DemandSystem,
    payoff: &'a P,
    player_i: usize,
    frozen: &[f64],
) -> Result<(PairGame<'a, P>, Vec<(usize, Variable, f64)>)> {
    let n = params.n;
    let alien = params.alien();
    check_pair_args(params, player_i, frozen)?;
    let mut base = vec![0.0; n];
    let mut frozen_tagged = Vec::with_capacity(n - 2);
    let others = (0..n).filter(|&k| k != player_i && k != alien);
    for (k, &value) in others.zip(frozen) {
        base[k] = value;
        frozen_tagged.push((k, Variable::Quantity, value));
    }
    let quantity_map = PatternMap::build(system, &PatternAssignment::uniform(n, Variable::Quantity))?;
    let price_map = PatternMap::build(system, &PatternAssignment::uniform_except(n, Variable::Quantity, alien))?;
    Ok((
        PairGame {
            params,
            payoff,
            player_i,
            alien,
            base,
            quantity_map,
            price_map,
        },
        frozen_tagged,
    ))
}

/// Four-way minimax check between symmetric player `player_i` and the
/// alien. `frozen` lists the quantities of the remaining players in index
/// order.
pub fn lemma2_check(
    params: &MarketParams,
    system: &DemandSystem,
    player_i: usize,
    frozen: &[f64],
    tol: &MinimaxTolerances,
) -> Result<MinimaxReport> {
    let mut report = lemma2_check_with(params, system, &RelativeProfit, player_i, frozen, tol)?;
    let saddle = pair_saddle(params, system, player_i, frozen)?;
    if !saddle.is_interior(params) {
        report.domain_issues.push(format!(
            "pair saddle (t_i={:.6}, t_n={:.6}, s_n={:.6}) leaves the strategy boxes",
            saddle.t_i, saddle.t_n, saddle.s_n
        ));
    }
    report.saddle = Some(saddle);
    Ok(report)
}

pub fn lemma2_check_with<P: ZeroSumPayoff>(
    params: &MarketParams,
    system: &DemandSystem,
    payoff: &P,
    player_i: usize,
    frozen: &[f64],
    tol: &MinimaxTolerances,
) -> Result<MinimaxReport> {
    let (game, frozen_tagged) = pair_game(params, system, payoff, player_i, frozen)?;
    let (v1, a1) = game.min_max(Variable::Quantity, tol);
    let (v2, a2) = game.min_max(Variable::Price, tol);
    let (v3, a3) = game.max_min(Variable::Price, tol);
    let (v4, a4) = game.max_min(Variable::Quantity, tol);
    let values = [v1, v2, v3, v4];
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(MinimaxReport {
        player_i,
        frozen: frozen_tagged,
        v_min_tn_max_ti: v1,
        v_min_sn_max_ti: v2,
        v_max_ti_min_sn: v3,
        v_max_ti_min_tn: v4,
        arg_points: [a1, a2, a3, a4],
        max_spread: hi - lo,
        weak_duality_violation: (v4 - v1).max(v3 - v2).max(0.0),
        shape_violations: game.shape_violations(),
        saddle: None,
        domain_issues: Vec::new(),
        agreement_tol: tol.agreement,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SionResult {
    pub maxmin: f64,
    pub minmax: f64,
    pub tol: f64,
}

impl SionResult {
    pub fn gap(&self) -> f64 {
        (self.minmax - self.maxmin).abs()
    }

    pub fn holds(&self) -> bool {
        self.gap() < self.tol
    }
}

/// `max_{t_i} min_{t_n}` and `min_{t_n} max_{t_i}` with both players in
/// quantities.
pub fn sion_check(
    params: &MarketParams,
    system: &DemandSystem,
    player_i: usize,
    frozen: &[f64],
    tol: &MinimaxTolerances,
) -> Result<SionResult> {
    let (game, _) = pair_game(params, system, &RelativeProfit, player_i, frozen)?;
    let (minmax, _) = game.min_max(Variable::Quantity, tol);
    let (maxmin, _) = game.max_min(Variable::Quantity, tol);
    Ok(SionResult {
        maxmin,
        minmax,
        tol: tol.agreement,
    })
}
