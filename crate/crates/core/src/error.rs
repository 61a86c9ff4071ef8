use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("sample rate mismatch: expected {expected} Hz, got {actual} Hz")]
    RateMismatch { expected: u32, actual: u32 },
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("frame alignment: {0}")]
    Alignment(String),
    #[error("pooling produced no frames: {frames} input frames < kernel {kernel}")]
    EmptyPool { frames: usize, kernel: usize },
    #[error("token {token} at position {position} outside codebook of size {codebook_size}")]
    TokenOutOfRange {
        position: usize,
        token: u32,
        codebook_size: usize,
    },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("degenerate interpolation length: {0} (need at least 2)")]
    DegenerateLength(usize),
    #[error("axis {axis} out of bounds for tensor of rank {rank}")]
    InvalidAxis { axis: usize, rank: usize },
    #[error("missing parameter `{0}`")]
    MissingParam(String),
    #[error("unknown parameter prefix in `{0}`")]
    UnknownPrefix(String),
    #[error("unsupported checkpoint format version {found} (supported: {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },
    #[error("checkpoint truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },
    #[error("checkpoint corrupt: {0}")]
    Corrupt(String),
    #[error("checkpoint inconsistent: {0}")]
    Inconsistent(String),
    #[error("non-finite loss term `{term}` at step {step}")]
    NonFiniteLoss { term: &'static str, step: u64 },
    #[error("vad removed every frame")]
    AllSilence,
    #[error("scorer failed: {message}\n{output}")]
    Scorer { message: String, output: String },
    #[error("{path}: {source}")]
    Clip {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },
    #[error("wav: {0}")]
    Wav(#[from] hound::Error),
    #[error("tensor: {0}")]
    Tensor(#[from] candle_core::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("image: {0}")]
    Image(#[from] image::ImageError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable category, used by the CLI's one-line error output.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::RateMismatch { .. } => "rate-mismatch",
            Error::EmptyInput(_) => "empty-input",
            Error::Alignment(_) => "alignment",
            Error::EmptyPool { .. } => "empty-pool",
            Error::TokenOutOfRange { .. } => "token-range",
            Error::Shape(_) => "shape",
            Error::DegenerateLength(_) => "degenerate-length",
            Error::InvalidAxis { .. } => "invalid-axis",
            Error::MissingParam(_) => "missing-param",
            Error::UnknownPrefix(_) => "unknown-prefix",
            Error::UnsupportedVersion { .. } => "unsupported-version",
            Error::Truncated { .. } => "truncated",
            Error::Corrupt(_) => "corrupt",
            Error::Inconsistent(_) => "inconsistent",
            Error::NonFiniteLoss { .. } => "non-finite-loss",
            Error::AllSilence => "all-silence",
            Error::Scorer { .. } => "scorer",
            Error::Clip { source, .. } => source.category(),
            Error::Wav(_) => "wav",
            Error::Tensor(_) => "tensor",
            Error::Json(_) => "json",
            Error::Image(_) => "image",
            Error::Io(_) => "io",
        }
    }

    pub fn in_clip(self, path: impl Into<PathBuf>) -> Error {
        Error::Clip {
            path: path.into(),
            source: Box::new(self),
        }
    }
}
