//! Convenience wrapper pairing parameters with their demand system.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::equilibrium::{
    compare_equilibria, solve_best_response, solve_foc, BestResponseOptions, EquilibriumReport, EquivalenceVerdict,
    Method,
};
use crate::error::{Error, Result};
use crate::market::{build_demand_system, resolve_outcome, DemandSystem, MarketParams, OutcomeProfile, PatternAssignment};
use crate::minimax::{lemma2_check, pair_saddle, MinimaxReport, MinimaxTolerances};

#[derive(Debug, Clone)]
pub struct Market {
    pub params: MarketParams,
    pub system: DemandSystem,
}

impl Market {
    pub fn new(params: MarketParams) -> Result<Self> {
        params.validate()?;
        let system = build_demand_system(&params)?;
        Ok(Market { params, system })
    }

    pub fn pattern(&self, text: &str) -> Result<PatternAssignment> {
        PatternAssignment::parse_for(text, self.params.n)
    }

    pub fn resolve(&self, pattern: &PatternAssignment, strategy: &[f64]) -> Result<OutcomeProfile> {
        resolve_outcome(&self.params, &self.system, pattern, strategy)
    }

    pub fn solve(&self, pattern: &PatternAssignment, method: Method) -> Result<EquilibriumReport> {
        match method {
            Method::FocSolve => solve_foc(&self.params, &self.system, pattern),
            Method::BestResponse => {
                solve_best_response(&self.params, &self.system, pattern, &BestResponseOptions::default())
            }
        }
    }

    pub fn compare(&self, first: &PatternAssignment, second: &PatternAssignment, tol: f64) -> Result<EquivalenceVerdict> {
        let r1 = self.solve(first, Method::FocSolve)?;
        let r2 = self.solve(second, Method::FocSolve)?;
        compare_equilibria(&r1, &r2, tol)
    }

    /// Minimax check with the other symmetric players frozen at their
    /// all-quantity equilibrium outputs.
    pub fn minimax_at_equilibrium(&self, player_i: usize, tol: &MinimaxTolerances) -> Result<MinimaxReport> {
        let eq = self.solve(&PatternAssignment::uniform(self.params.n, crate::Variable::Quantity), Method::FocSolve)?;
        let frozen = frozen_from(&eq.outcome.quantities, player_i, self.params.alien());
        lemma2_check(&self.params, &self.system, player_i, &frozen, tol)
    }

    /// `count` random frozen vectors for `player_i`, drawn uniformly from
    /// `[x/2, 3x/2]` around the all-quantity equilibrium outputs. Draws
    /// whose pair saddle leaves the strategy boxes are redrawn, since the
    /// quantity and price boxes then no longer correspond.
    pub fn random_frozen(&self, player_i: usize, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        const MAX_DRAWS: usize = 10_000;
        let eq = self.solve(&PatternAssignment::uniform(self.params.n, crate::Variable::Quantity), Method::FocSolve)?;
        let centre = frozen_from(&eq.outcome.quantities, player_i, self.params.alien());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        for _ in 0..MAX_DRAWS {
            if out.len() == count {
                break;
            }
            let frozen: Vec<f64> = centre.iter().map(|&x| rng.gen_range(0.5 * x..=1.5 * x)).collect();
            if pair_saddle(&self.params, &self.system, player_i, &frozen)?.is_interior(&self.params) {
                out.push(frozen);
            }
        }
        if out.len() < count {
            return Err(Error::InvalidParams(format!(
                "no interior frozen points found for player {player_i} after {MAX_DRAWS} draws"
            )));
        }
        Ok(out)
    }
}

/// Values of every player other than `player_i` and `alien`, in index order.
pub fn frozen_from(values: &[f64], player_i: usize, alien: usize) -> Vec<f64> {
    values
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != player_i && k != alien)
        .map(|(_, &v)| v)
        .collect()
}
