use thiserror::Error;

/// Errors raised by the numerical core.
///
/// Numeric payloads are reported as `f64` regardless of the scalar type the
/// computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |A - A†| = {deviation:.3e})")]
    NonHermitian { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("non-physical input: {0}")]
    NonPhysical(String),

    #[error("non-physical state: {0}")]
    NonPhysicalState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no closed-form eigensystem for the {0} coupling")]
    UnsupportedModel(&'static str),

    #[error("eigenvector labeling is ambiguous at t = {t} (best overlap {overlap:.3})")]
    DegenerateLabeling { t: f64, overlap: f64 },

    #[error("levels {i} and {j} are degenerate (gap {gap:.3e})")]
    DegenerateGap { i: usize, j: usize, gap: f64 },

    #[error("norm drift {drift:.3e} per step exceeds the guard; retry with n_steps >= {suggested_steps}")]
    StepTooLarge { drift: f64, suggested_steps: usize },

    #[error("frames do not match the trajectory: {0}")]
    FrameMismatch(String),

    #[error("need at least {required} time steps, got {found}")]
    InsufficientSamples { required: usize, found: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
