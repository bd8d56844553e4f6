use thiserror::Error;

/// Errors produced by the channel model, the numerical substrate and the
/// front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },

    #[error("quadrature did not converge after {evals} evaluations (estimate {estimate:e}, error {error:e}, target {target:e})")]
    Quadrature {
        evals: usize,
        estimate: f64,
        error: f64,
        target: f64,
    },

    #[error("integrand returned a non-finite value at x = {0:e}")]
    NonFinite(f64),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field,
            reason: reason.into(),
        }
    }

    /// Wraps the error with a human-readable location (e.g. the distance at
    /// which an inner integral failed).
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
