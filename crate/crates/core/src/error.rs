use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: duplicate frame index {frame}")]
    DuplicateFrame { line: usize, frame: u64 },

    #[error("line {line}: non-finite value")]
    NonFinite { line: usize },

    #[error("line {line}: degenerate quaternion (zero norm)")]
    DegenerateQuaternion { line: usize },

    #[error("trajectory needs at least 2 poses, got {0}")]
    TooShort(usize),

    #[error("frame indices must strictly increase ({prev} then {next})")]
    NonMonotonicFrames { prev: u64, next: u64 },

    #[error("rotation matrix is not orthonormal with determinant +1")]
    InvalidRotation,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("robust fit failed: no model with at least {min_inliers} inliers")]
    RobustFitFailed { min_inliers: usize },

    #[error("trajectory has negligible translation; use rotation-only alignment")]
    RotationOnlyInput,

    #[error("ratio undefined: mean frame displacement is zero")]
    UndefinedRatio,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("{name} out of range: {value}")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("cannot compare a translational trajectory with a rotation-only one")]
    MixedMotionKinds,

    #[error("template list is empty")]
    NoTemplates,

    #[error("{stage}: {errors} of {total} entries failed, above the 10% limit")]
    ErrorRateExceeded {
        stage: &'static str,
        errors: usize,
        total: usize,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}
