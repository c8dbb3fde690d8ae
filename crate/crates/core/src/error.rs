use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square or has non-finite entries: {0}")]
    InvalidMatrix(String),
    #[error("matrix is singular (det = 0)")]
    Singular,
    #[error("matrix is not expansive: eigenvalue modulus {modulus} <= 1")]
    NotExpansive { modulus: f64 },
    #[error("ellipsoid construction failed: {0}")]
    ConstructionFailed(String),
    #[error("scale {k} cannot be resolved on this grid: {reason}")]
    UnresolvableScale { k: i32, reason: String },
    #[error("grid specifications do not match")]
    SpecMismatch,
    #[error("weight is negative at flat index {index}")]
    NegativeWeight { index: usize },
    #[error("grid too coarse for the requested cube levels: {0}")]
    ResolutionTooCoarse(String),
    #[error("series test failed for h: partial sums do not settle ({0})")]
    DivergentH(String),
    #[error("frequency range too narrow: {0}")]
    RangeTooNarrow(String),
    #[error("no profile rescaling fits inside the theta annulus: {0}")]
    AnnulusMismatch(String),
    #[error("kernel has non-vanishing mean: |phi_hat(0)| = {0}")]
    NonvanishingMean(f64),
    #[error("theta moment order {have} is below the required {need}")]
    FrameMomentDeficit { have: usize, need: usize },
    #[error("test-function dictionary is empty")]
    EmptyDictionary,
    #[error("operator is not gamma-sublinear: {0}")]
    SubadditivityViolation(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("field file format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
