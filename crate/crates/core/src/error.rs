use thiserror::Error;

/// Errors raised by the simulator and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A request exceeds what the dense machinery can handle.
    #[error("capability exceeded: {0}")]
    Capability(String),

    /// A numerical self-check failed (symmetry residual, imaginary energy, ...).
    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    /// A momentum channel carries too little weight to define a phase.
    #[error("degenerate momentum channel {index}: weight {weight:.3e} below {threshold:.3e}")]
    DegenerateChannel {
        index: usize,
        weight: f64,
        threshold: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

pub(crate) fn inconsistent<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Consistency(msg.into()))
}
