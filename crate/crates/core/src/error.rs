use thiserror::Error;

/// Errors raised by the solvers, builders and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid volumes: {0}")]
    InvalidVolumes(String),

    #[error("volumes must satisfy V1 <= V2 <= V3, got ({0}, {1}, {2})")]
    VolumeOrder(f64, f64, f64),

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("density `{0}` is not admissible for the equilibrium solver (requires strict convexity and a unique minimum at the origin)")]
    UnsupportedDensity(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid ordering: {0}")]
    InvalidOrdering(String),

    #[error("no convergence after {iterations} iterations: {what}")]
    NoConvergence { what: String, iterations: usize },

    #[error("standard bubbles are not properly nested: {0}")]
    NotNested(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("malformed frame data: {0}")]
    Frame(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than numerical trouble.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidVolumes(_)
                | Error::VolumeOrder(..)
                | Error::InvalidDensity(_)
                | Error::UnsupportedDensity(_)
                | Error::InvalidArgument(_)
                | Error::InvalidOrdering(_)
                | Error::Frame(_)
                | Error::Io(_)
                | Error::Csv(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
