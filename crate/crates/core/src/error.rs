use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the codec can report.
///
/// Variants are grouped by the stage that raises them. The CLI and the C API
/// map them onto exit codes / status codes through [`Error::kind`].
#[derive(Debug, Error)]
pub enum Error {
    // feature files and tensors
    #[error("bad magic: expected {expected:?}")]
    BadMagic { expected: &'static str },
    #[error("file truncated while reading {what}")]
    TruncatedFile { what: &'static str },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite value at element {index} of layer {layer}")]
    NonFiniteValue { layer: usize, index: usize },
    #[error("feature sequence is empty")]
    EmptySequence,
    #[error("layer {0} has no elements")]
    EmptyLayer(usize),
    #[error("tensor has no elements")]
    EmptyTensor,
    #[error("value {0} is not finite")]
    NonFinite(f64),

    // temporal resampling
    #[error("temporal plan mismatch: {0}")]
    PlanMismatch(String),

    // reduction transform
    #[error("layers do not form a dyadic pyramid: {0}")]
    NonDyadicPyramid(String),
    #[error("identity transform needs exactly one layer, got {0}")]
    IdentityWithMultipleLayers(usize),
    #[error("target channel count {target} outside 1..={available}")]
    TargetChannelsTooLarge { target: usize, available: usize },
    #[error("transform side info mismatch: {0}")]
    SideInfoMismatch(String),

    // channel adjustment / packing
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("frame does not match pack layout: {0}")]
    LayoutMismatch(String),

    // inner codec
    #[error("no frames to encode")]
    EmptyInput,
    #[error("corrupt payload: {0}")]
    CorruptPayload(String),
    #[error("external codec failed: {0}")]
    ExternalCodecFailure(String),
    #[error("raw YUV buffer has odd byte length {0}")]
    OddByteLength(usize),
    #[error("sample {value} out of range for {bitdepth}-bit video")]
    SampleOutOfRange { value: u32, bitdepth: u8 },

    // container
    #[error("unsupported container version {0}")]
    UnsupportedVersion(u16),
    #[error("container truncated while reading {0}")]
    Truncated(&'static str),
    #[error("length field {declared} exceeds the {remaining} bytes remaining")]
    OverlongLength { declared: u64, remaining: u64 },
    #[error("inconsistent side records: {0}")]
    InconsistentRecordCount(String),
    #[error("invalid container field: {0}")]
    InvalidField(String),

    // evaluation
    #[error("rate curve needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("rate curves have no overlapping quality range")]
    NoQualityOverlap,
    #[error("invalid rate curve: {0}")]
    InvalidCurve(String),
    #[error("timing {0} must be positive")]
    ZeroTiming(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse classification used for process exit codes and C status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Io,
    Codec,
    NoOverlap,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. } => ErrorKind::Io,
            Error::NoQualityOverlap => ErrorKind::NoOverlap,
            Error::InvalidConfig(_)
            | Error::InvalidAlpha(_)
            | Error::TooFewPoints(_)
            | Error::IdentityWithMultipleLayers(_)
            | Error::TargetChannelsTooLarge { .. } => ErrorKind::Usage,
            _ => ErrorKind::Codec,
        }
    }
}
