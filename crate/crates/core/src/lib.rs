//! Nash equilibria of a partially asymmetric relative-profit oligopoly in
//! which each firm commits to either its output or its price.
//!
//! Firms `0..n-1` share one marginal cost; the last firm (the alien) may
//! differ. The crate resolves any quantity/price pattern into an outcome,
//! solves for equilibria, compares them across patterns, checks the
//! pairwise minimax equalities numerically, and audits published
//! closed-form outputs for the four-firm case.

pub mod engine;
pub mod equilibrium;
pub mod error;
pub mod linalg;
pub mod market;
pub mod minimax;
pub mod oracle;
pub mod payoff;

pub use engine::Market;
pub use equilibrium::{
    compare_equilibria, solve_best_response, solve_foc, BestResponseOptions, EquilibriumReport, EquivalenceVerdict,
    Method, OutcomeComponent,
};
pub use error::{Error, Result};
pub use market::{
    build_demand_system, resolve_outcome, DemandSystem, MarketParams, OutcomeProfile, PatternAssignment,
    StrategyDomain, Variable,
};
pub use minimax::{inner_opt, lemma2_check, sion_check, MinimaxReport, MinimaxTolerances, Sense};
pub use oracle::{audit_case, evaluate_case, AuditVerdict, CaseLabel, ClosedFormCase};
pub use payoff::{payoff_gradient, payoffs, PayoffVector};
