use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A covariate does not conform to the arity expected by a premetric.
    #[error("covariate schema mismatch: {0}")]
    SchemaMismatch(String),

    /// An operation that requires data received none.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two sequences that must align have different lengths.
    #[error("dimension mismatch: left has {left}, right has {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// A partition does not cover the index set exactly once.
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    /// A covariate was looked up in a table premetric that does not contain it.
    #[error("covariate not present in the premetric table")]
    CovariateNotInTable,

    /// Finite-alphabet measures over different alphabets cannot be compared.
    #[error("alphabet mismatch between measures")]
    AlphabetMismatch,

    /// An observation value is not a member of the working alphabet.
    #[error("value {0} is not in the alphabet")]
    UnknownSymbol(String),

    /// The within-block permutation group is too large to enumerate.
    #[error(
        "permutation group order exceeds the enumeration budget of {budget}; \
         use the subsampled test"
    )]
    EnumerationBudget { budget: u64 },

    /// The requested sample count leaves no room to reject.
    #[error(
        "alpha_N = {alpha_n} <= 0 at N = {n}; at least N = {required} samples are needed"
    )]
    InsufficientSamples { alpha_n: f64, n: u64, required: u64 },

    /// A test statistic group has no members.
    #[error("statistic group is empty: {0}")]
    EmptyGroup(&'static str),

    /// Covariance factorization failed even after jitter.
    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,

    /// A plain-text configuration section failed to parse or validate.
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
