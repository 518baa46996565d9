use thiserror::Error;

/// Failure modes shared by every computation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported range: {0}")]
    UnsupportedRange(String),
    #[error("branch ambiguity: {0}")]
    BranchAmbiguity(String),
    #[error("iteration did not converge: {0}")]
    Iteration(String),
    #[error("series diverges: {0}")]
    Divergence(String),
    #[error("path error: {0}")]
    Path(String),
    #[error("stiff integration: {0}")]
    Stiffness(String),
    #[error("ill-conditioned: {0}")]
    Conditioning(String),
    #[error("accuracy target missed: {0}")]
    Accuracy(String),
    #[error("positivity violated: {0}")]
    Positivity(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("fit failed: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_s(s: u32) -> Result<()> {
    if s < 2 {
        return Err(Error::Domain(format!("symmetry order s = {s} must be at least 2")));
    }
    Ok(())
}
