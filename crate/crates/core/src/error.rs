use thiserror::Error;

pub type Result<T, E = LcaError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LcaError {
    /// An id was queried outside the universe an instance was configured for.
    #[error("id {id} outside universe of size {universe}")]
    OutOfUniverse { id: u64, universe: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("instance generation failed: {0}")]
    Generation(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// The dependency closure of a query grew past its cap.
    #[error("relevant set of {root} truncated at cap {cap} after {probes} probes ({members} members)")]
    Truncated {
        root: usize,
        cap: usize,
        probes: u64,
        members: usize,
    },

    #[error("premise violated: {0}")]
    PremiseViolation(String),

    #[error("phase {phase} failed: {detail}")]
    PhaseFailure { phase: u8, detail: String },

    /// More runs failed than an experiment allows.
    #[error("{failures} of {runs} runs failed, over the budget of {budget}")]
    BudgetExceeded { failures: u64, runs: u64, budget: f64 },
}

impl LcaError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        LcaError::InvalidParameter(msg.into())
    }

    /// Failures of the randomized algorithm itself, as opposed to bad input.
    pub fn is_algorithm_failure(&self) -> bool {
        matches!(
            self,
            LcaError::Truncated { .. } | LcaError::PhaseFailure { .. }
        )
    }

    /// Process exit code: 2 bad input, 3 generation failure, 4 algorithm
    /// failure beyond budget.
    pub fn exit_code(&self) -> i32 {
        match self {
            LcaError::Generation(_) => 3,
            LcaError::Truncated { .. } | LcaError::PhaseFailure { .. } | LcaError::BudgetExceeded { .. } => 4,
            _ => 2,
        }
    }
}
