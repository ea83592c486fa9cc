use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("mode collision: {0}")]
    ModeCollision(String),
    #[error("degenerate state: {0}")]
    DegenerateState(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("qudit encoding error: {0}")]
    Encoding(String),
    #[error("ancilla modes are entangled with the register: {0}")]
    EntangledAncilla(String),
    #[error("invalid spec: {0}")]
    Spec(String),
    #[error("root not found: {0}")]
    RootNotFound(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
