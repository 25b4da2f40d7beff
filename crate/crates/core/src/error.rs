use thiserror::Error;

use crate::model::{Pair, ValidationReport};

/// Errors produced by the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid atomic system: {0}")]
    InvalidSystem(ValidationReport),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite input value")]
    NonFinite,

    #[error("transition {0} is not part of the system")]
    UnknownTransition(Pair),

    #[error("candidate {0} does not exist at these couplings")]
    CandidateAbsent(String),

    #[error("identical regions: {0}")]
    IdenticalRegions(String),

    #[error("no root of the boundary equation in the sweep range")]
    NoRoot,

    #[error("no discontinuity up to derivative order {0}")]
    NoDiscontinuity(u32),

    #[error("inconsistent excitation weights at level {level}: {first} vs {second}")]
    InconsistentWeights { level: usize, first: i64, second: i64 },

    #[error("level {0} is not connected to the ground level by any mode")]
    Disconnected(usize),

    #[error("basis of {size} states exceeds the budget of {budget}")]
    BudgetExceeded { size: usize, budget: usize },

    #[error("{context} did not converge (residual {residual:.3e})")]
    NonConvergence { context: String, residual: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
