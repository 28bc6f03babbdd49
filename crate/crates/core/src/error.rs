/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Error taxonomy shared by all modules.
///
/// `OutOfRegime` is a refusal: the requested computation is mathematically
/// meaningless for the given parameters (unbounded-below Hamiltonian,
/// critical coupling, ...). The CLI maps it to exit code 2; everything else
/// maps to exit code 1.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("out of regime: {0}")]
    OutOfRegime(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("truncation cap reached: {0}")]
    ConvergenceCap(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("statistical failure: {0}")]
    Statistical(String),
}

impl Error {
    /// True for refusals that should exit with code 2 rather than 1.
    pub fn is_refusal(&self) -> bool {
        matches!(self, Error::OutOfRegime(_))
    }
}
