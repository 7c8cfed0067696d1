use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("pattern length {got} does not match player count {expected}")]
    PatternLength { expected: usize, got: usize },

    #[error("invalid pattern character {0:?}, expected Q or P")]
    InvalidPattern(char),

    #[error("strategy vector has length {got}, expected {expected}")]
    StrategyLength { expected: usize, got: usize },

    #[error("singular linear system (|det| = {det:e})")]
    SingularSystem { det: f64 },

    #[error("best-response iteration did not converge after {iterations} steps (last step {last_step:e})")]
    NoConvergence { iterations: usize, last_step: f64 },

    #[error("reports were computed for different market parameters")]
    ParamMismatch,

    #[error("cost structure does not fit closed-form case {0}")]
    CostStructureMismatch(String),

    #[error("player index {index} out of range for {n} players")]
    PlayerIndex { index: usize, n: usize },

    #[error("shape violation: {0}")]
    ShapeViolation(String),

    #[error("first-order conditions not met: residual {0:e}")]
    FocResidual(f64),

    #[error("parameter document: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;
