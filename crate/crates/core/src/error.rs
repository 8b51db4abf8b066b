use thiserror::Error;

/// Errors surfaced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A point lies outside the closed unit disk (beyond tolerance).
    #[error("point {0} lies outside the closed unit disk")]
    OutsideDisk(String),

    /// A kernel / probe argument must lie strictly inside the disk.
    #[error("point {0} must lie strictly inside the unit disk")]
    NotInOpenDisk(String),

    /// Invalid truncation / quadrature configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// The derivative vanished (or nearly vanished) along a branch-tracking path.
    #[error("branch tracking failed: {0}")]
    Branch(String),

    /// A documented operation precondition was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A numerical routine (SVD, eigensolver, winding quadrature) failed.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Exterior-power dimension overflow.
    #[error("size error: {0}")]
    Size(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
