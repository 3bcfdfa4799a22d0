use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} contains a non-finite value at position {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("the test sample is empty")]
    EmptyTestSample,

    #[error("the null training sample is empty")]
    EmptyNullSample,

    #[error("value {value} lies outside the tabulated support [{lo}, {hi}]")]
    OutOfSupport { value: f64, lo: f64, hi: f64 },

    #[error("invalid null model: {0}")]
    InvalidNullModel(String),

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: String,
        reason: &'static str,
    },

    #[error("null training sample of size {n} cannot be split into {m} non-empty blocks")]
    InsufficientNullSample { n: usize, m: usize },

    #[error("correlation {rho} is not admissible for {len} equicorrelated coordinates")]
    InadmissibleCorrelation { rho: f64, len: usize },

    #[error("correlation {rho} is below -1/{m}: no null coordinates can be generated")]
    RhoTooNegative { rho: f64, m: usize },

    #[error("requested null training sample of size {requested} exceeds the cap {cap}")]
    NullSampleTooLarge { requested: usize, cap: usize },

    #[error("local fdr is undefined at position {index}: both densities vanish")]
    UndefinedLfdr { index: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("null sampler failed: {0}")]
    Sampler(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, value: impl ToString, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value: value.to_string(),
            reason,
        }
    }
}
