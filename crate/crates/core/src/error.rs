use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the library.
///
/// `ResourceCap` is special: it marks work that was refused because it would
/// exceed a configured size limit, not work that failed. Callers that expose
/// exit codes should map it separately from genuine failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid code: {0}")]
    InvalidCode(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("parameter mismatch: {0}")]
    ParamsMismatch(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("{what} out of range: {value} (limit {limit})")]
    OutOfRange {
        what: &'static str,
        value: u128,
        limit: u128,
    },

    #[error("{resource} needs {required} units, cap is {cap}")]
    ResourceCap {
        resource: &'static str,
        required: u128,
        cap: u128,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("firing selection has {got} chips, vertex fires {expected} at a time")]
    WrongSelectionSize { expected: usize, got: usize },

    #[error("chip {0} is not present at the fired vertex")]
    ChipNotPresent(u64),

    #[error("arithmetic overflow computing {0}")]
    Overflow(&'static str),

    #[error("internal consistency check failed: {0}")]
    SelfCheck(String),

    #[error("parse error: {0}")]
    Parse(String),
}
