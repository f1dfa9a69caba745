use thiserror::Error;

use crate::ingest::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("series is empty")]
    Empty,

    #[error("length ≥ {needed} required (got {got})")]
    TooShort { needed: usize, got: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("years of the two series are not aligned")]
    MisalignedYears,

    #[error("years must be strictly increasing")]
    UnorderedYears,

    #[error("{what} must be positive (got {value})")]
    NonPositive { what: &'static str, value: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),

    #[error("exponential model ineligible: series contains a non-positive value")]
    ExponentialIneligible,

    #[error("trend kind is none; nothing to evaluate")]
    NoTrend,

    #[error("cropland series required for {0}")]
    MissingCropland(&'static str),

    #[error("no {what} value for year {year}")]
    MissingYear { what: &'static str, year: i32 },

    #[error("stage {stage} does not use a {component} error")]
    UnusedComponentError { stage: &'static str, component: &'static str },

    #[error("relative error {0} outside (-1, 1)")]
    ErrorOutOfRange(f64),

    #[error("non-positive {stage} estimate {value} for year {year}")]
    NonPositiveEstimate { stage: &'static str, year: i32, value: f64 },

    #[error("{component} requirement must use the {expected} baseline (got {got})")]
    InvalidPairing { component: &'static str, expected: &'static str, got: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no overlapping years: {0}")]
    NoOverlap(String),

    #[error("input validation failed with {} error(s)", .0.errors.len())]
    Validation(ValidationReport),

    #[error("missing input: {0}")]
    MissingInput(String),

    #[error("{path}: {source}")]
    Input { path: String, source: std::io::Error },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether the failure comes from the input files rather than an analysis.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Validation(_) | Error::Input { .. } | Error::MissingInput(_))
    }
}
