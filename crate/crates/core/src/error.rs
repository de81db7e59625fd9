use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("projective chart undefined: leading coordinate is zero")]
    ChartUndefined,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("not in absorbing set")]
    NotAbsorbing,
    #[error("algorithm terminates at this point")]
    Terminates,
    #[error("burn-in failed after {0} iterations")]
    BurnInFailed(usize),
    #[error("invalid branch label: {0}")]
    InvalidBranch(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("fixed-width integer overflow")]
    Overflow,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("all orbits discarded ({0} attempts)")]
    AllOrbitsDiscarded(usize),
    /// Internal consistency failure; no certificate may be emitted.
    #[error("internal consistency failure: {0}")]
    Consistency(String),
}

impl Error {
    /// True for failures that indicate a bug or an unsound computation rather
    /// than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Consistency(_) | Error::Overflow)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
