use thiserror::Error;

pub type Result<T, E = DsError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("scope error: {0}")]
    Scope(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("degenerate event: {0}")]
    DegenerateEvent(String),
    #[error("total conflict: combination normalizer is {normalizer:e}")]
    TotalConflict { normalizer: f64 },
    #[error("vanishing normalizer {normalizer:e} while combining pseudo masses")]
    VanishingNormalizer { normalizer: f64 },
    #[error("conditioning on an impossible event (plausibility 0)")]
    ImpossibleEvent,
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("degenerate reference mass: f(p;p) = 0")]
    DegenerateReference,
    #[error("empty dataset")]
    EmptyDataset,
    #[error("conditioning rejected every record")]
    EmptyConditionedPopulation,
    #[error("cannot sample from a pseudo mass function")]
    SamplingUndefined,
    #[error("network generation failed: {0}")]
    GenerationFailure(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/// Coarse failure classes; these are also the CLI exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation = 2,
    Numerical = 3,
    Capacity = 4,
}

impl DsError {
    pub fn class(&self) -> ErrorClass {
        use DsError::*;
        match self {
            Domain(_)
            | Scope(_)
            | Validation(_)
            | Parse { .. }
            | DegenerateEvent(_)
            | EmptyDataset
            | Io(_) => ErrorClass::Validation,
            TotalConflict { .. }
            | VanishingNormalizer { .. }
            | ImpossibleEvent
            | NoSolution(_)
            | DegenerateReference
            | EmptyConditionedPopulation
            | SamplingUndefined
            | GenerationFailure(_) => ErrorClass::Numerical,
            Capacity(_) => ErrorClass::Capacity,
        }
    }
}

impl From<std::io::Error> for DsError {
    fn from(e: std::io::Error) -> Self {
        DsError::Io(e.to_string())
    }
}
