use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: String, found: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("step size underflow at {coordinate} = {location:.6e} (h = {step:.3e})")]
    StepUnderflow {
        coordinate: &'static str,
        location: f64,
        step: f64,
    },

    #[error("integration produced non-finite values at {coordinate} = {location:.6e}")]
    NonFinite {
        coordinate: &'static str,
        location: f64,
    },

    #[error("singular denominator in linear-fractional map (smallest singular value {min_singular_value:.3e})")]
    SingularDenominator { min_singular_value: f64 },

    #[error("matrix is not negative definite where required (largest eigenvalue {max_eigenvalue:.3e})")]
    NotNegativeDefinite { max_eigenvalue: f64 },

    #[error("Schur complement has eigenvalue {min_eigenvalue:.3e} below the clipping threshold")]
    IndefiniteSchur { min_eigenvalue: f64 },

    #[error("Weyl estimate did not converge: uncertainty {uncertainty:.3e} exceeds cap {cap:.3e}")]
    NonConvergence { uncertainty: f64, cap: f64 },

    #[error("spectral parameter {re} + {im}i lies outside the admissible domain: {reason}")]
    OutsideDomain { re: f64, im: f64, reason: String },

    #[error("invariant subspace computation failed: {0}")]
    Eigenstructure(String),

    #[error("series blow-up while computing derivative order {order} (coefficient magnitude {magnitude:.3e})")]
    SeriesBlowUp { order: usize, magnitude: f64 },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("non-finite input sample: {0}")]
    NonFiniteInput(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}
