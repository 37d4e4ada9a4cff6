use serde::Serialize;
use thiserror::Error;

use crate::model::Pair;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("basis vectors are linearly dependent")]
    SingularBasis,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("targets not covered by A+B: {0:?}")]
    NotCovered(Vec<Pair>),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("invalid representation at pair {pair}: a + b != e_i + e_j")]
    InvalidRepresentation { pair: Pair },
    #[error("diagonal edges do not form a forest")]
    ForestViolation,
    #[error("contraction produced {found} blocks, expected {expected}")]
    ContractionCount { expected: usize, found: usize },
    #[error("vertices in block {block} carry different colors")]
    ColorMismatch { block: usize },
    #[error("X is not a subset of C")]
    NotNested,
    #[error("X is empty but n >= 2")]
    EmptyX,
    #[error("assertion failed: {0}")]
    AssertionFailed(String),
    #[error("dimension {n} too large for exhaustive enumeration (max {max})")]
    TooLarge { n: usize, max: usize },
    #[error("universe has {size} elements, cap is {cap}")]
    UniverseTooLarge { size: u128, cap: u64 },
    #[error("target {0} has no decomposition inside the universe")]
    InfeasibleUniverse(Pair),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::SingularBasis => "SingularBasis",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidParams(_) => "InvalidParams",
            Error::NotCovered(_) => "NotCovered",
            Error::HypothesisViolated(_) => "HypothesisViolated",
            Error::InvalidRepresentation { .. } => "InvalidRepresentation",
            Error::ForestViolation => "ForestViolation",
            Error::ContractionCount { .. } => "ContractionCount",
            Error::ColorMismatch { .. } => "ColorMismatch",
            Error::NotNested => "NotNested",
            Error::EmptyX => "EmptyX",
            Error::AssertionFailed(_) => "AssertionFailed",
            Error::TooLarge { .. } => "TooLarge",
            Error::UniverseTooLarge { .. } => "UniverseTooLarge",
            Error::InfeasibleUniverse(_) => "InfeasibleUniverse",
        }
    }

    /// Structured form used by the CLI.
    pub fn to_report(&self) -> ErrorReport {
        ErrorReport {
            kind: self.kind(),
            message: self.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub kind: &'static str,
    pub message: String,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
