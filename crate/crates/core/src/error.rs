use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A full-line or unbounded set was measured under a density of infinite mass.
    #[error("infinite measure: {0}")]
    InfiniteMeasure(String),

    /// The density has concavity index below -1/n and admits no s-concavity class.
    #[error("sub-convex only: gamma = {gamma} < -1/{dimension} has no s-concavity class")]
    SubConvexOnly { gamma: f64, dimension: usize },

    #[error("quadrature did not converge on [{lo}, {hi}] (estimate {estimate}, error {error})")]
    QuadratureFailed {
        lo: f64,
        hi: f64,
        estimate: f64,
        error: f64,
    },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    /// Wraps an error raised while evaluating one sample of a scan.
    #[error("at {param} = {value}: {source}")]
    AtSample {
        param: &'static str,
        value: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn at(self, param: &'static str, value: f64) -> Self {
        Error::AtSample {
            param,
            value,
            source: Box::new(self),
        }
    }
}
