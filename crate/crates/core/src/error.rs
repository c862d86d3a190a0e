use thiserror::Error;

/// Errors raised by the library.
///
/// Physically undefined phases are *not* errors; they are reported through
/// [`crate::PhaseResult::defined`]. The variants here cover invalid input and
/// geometric constructions that have no unique answer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("polar angle must lie in [0, 180] degrees, got {0}")]
    InvalidPolarAngle(f64),

    #[error("rotation angle must be finite, got {0}")]
    InvalidRotationAngle(f64),

    #[error("spinor has zero norm")]
    ZeroSpinor,

    #[error("invalid beam configuration: {0}")]
    InvalidConfig(String),

    #[error("geodesic between antipodal points is not unique (a·b = {dot})")]
    AntipodalPoints { dot: f64 },

    #[error("loop is not closed (gap {gap:e})")]
    OpenLoop { gap: f64 },

    #[error("loop is undefined: {0}")]
    UndefinedLoop(String),

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("sinusoid fit needs at least 4 points, got {0}")]
    InsufficientData(usize),

    #[error("phase grid is degenerate: all χ values coincide modulo 360° or do not span a full sinusoid")]
    DegenerateGrid,

    #[error("χ grid must be strictly increasing (index {0})")]
    UnorderedGrid(usize),

    #[error("interferogram columns have different lengths ({chi} vs {intensity})")]
    LengthMismatch { chi: usize, intensity: usize },

    #[error("negative or non-finite intensity {value} at index {index}")]
    InvalidIntensity { index: usize, value: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
