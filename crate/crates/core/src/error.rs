use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive integration ran out of subdivisions. Carries the best
    /// estimate reached so far.
    #[error("quadrature did not converge after {intervals} intervals (estimate {value:e}, error {err_estimate:e})")]
    NonConvergence {
        value: f64,
        err_estimate: f64,
        intervals: usize,
    },

    /// The integrand returned NaN or an infinity.
    #[error("integrand is not finite at x = {at:e}")]
    NonFinite { at: f64 },

    /// An arithmetic query beyond the sieve.
    #[error("n = {n} exceeds sieve limit {limit}")]
    SieveLimit { n: u64, limit: u64 },

    /// A planted zero lies on (or too close to) the detector box boundary.
    #[error("zero {re} + {im}i lies on the box boundary")]
    ZeroOnBoundary { re: f64, im: f64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
