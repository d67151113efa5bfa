use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the formula is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A formula hit a singular point (e.g. a level crossing).
    #[error("singularity: {0}")]
    Singular(String),

    /// Adaptive quadrature failed to reach the requested tolerance.
    #[error(
        "quadrature did not converge: {what} (estimate {estimate:e}, error estimate {error_estimate:e}, {evaluations} evaluations)"
    )]
    Quadrature {
        what: String,
        estimate: f64,
        error_estimate: f64,
        evaluations: usize,
    },

    /// A least-squares fit could not be set up or did not produce a usable optimum.
    #[error("fit error: {0}")]
    Fit(String),

    /// A requested allocation exceeds the configured limit.
    #[error("resource limit: {0}")]
    Resource(String),

    /// Configuration problems, one entry per diagnostic.
    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
