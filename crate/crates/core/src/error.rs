use thiserror::Error;

/// Errors produced by the exact pipelines, the particle model and the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("state space for N={n} needs about {required_bytes} bytes, budget is {budget_bytes} bytes")]
    Resource {
        n: u32,
        required_bytes: u64,
        budget_bytes: u64,
    },

    #[error("data error: {0}")]
    Data(String),

    #[error("accuracy error: {0}")]
    Accuracy(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
