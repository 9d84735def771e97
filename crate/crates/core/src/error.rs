use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain where a formula is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Caller misuse: empty sample sets, zero trajectory counts, bad ε.
    #[error("usage error: {0}")]
    Usage(String),

    /// Invalid process or measure configuration.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("integration error at t = {time}: non-finite state {state:?}")]
    Integration { time: f64, state: Vec<f64> },

    /// A discretization failed one of its structural invariants.
    #[error("build error: {0}")]
    Build(String),

    #[error("solver error: {0}")]
    Solver(String),

    /// The hypocoercivity certificate is not positive; `eigenvector` is the
    /// offending direction in grid coordinates.
    #[error("nonpositive certificate {value:.6e}")]
    Certificate { value: f64, eigenvector: Vec<f64> },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn build(msg: impl Into<String>) -> Self {
        Error::Build(msg.into())
    }

    pub(crate) fn solver(msg: impl Into<String>) -> Self {
        Error::Solver(msg.into())
    }
}
