use num_complex::Complex64;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("{what} did not converge within {limit} terms")]
    NonConvergent { what: &'static str, limit: usize },

    #[error("denominator vanishes at argument {arg}")]
    PoleHit { arg: Complex64 },

    #[error("evaluation is ill-conditioned (cancellation factor {condition:.2e})")]
    IllConditioned { condition: f64 },

    #[error("matrix is numerically singular (pivot {pivot} underflowed)")]
    SingularMatrix { pivot: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("termination condition not satisfied: {0}")]
    TerminationUnsatisfied(String),

    #[error("constraint violated: {0}")]
    ConstraintViolated(String),

    #[error("parameter sampling for {id} exhausted after {attempts} attempts")]
    SamplingExhausted { id: String, attempts: u32 },

    #[error("invalid sizes: {0}")]
    InvalidSizes(String),

    #[error("identity {id} does not apply to the {kernel} kernel")]
    NotApplicable { id: String, kernel: String },
}

impl Error {
    /// Errors after which a sampler should draw fresh parameters.
    pub fn is_resamplable(&self) -> bool {
        matches!(
            self,
            Error::PoleHit { .. } | Error::SingularMatrix { .. } | Error::IllConditioned { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
