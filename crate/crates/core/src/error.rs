use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt image: {0}")]
    CorruptImage(String),
    #[error("invalid image dimensions {rows}x{cols} for {len} pixels")]
    InvalidDimensions { rows: usize, cols: usize, len: usize },
    #[error("pixel value {0} is not binary")]
    NonBinaryPixel(u8),
    #[error("image is constant; no threshold separates two classes")]
    ConstantImage,
    #[error("target side {0} is too small (minimum 3)")]
    TargetTooSmall(usize),
    #[error("matrix side {0} is too small (minimum 3)")]
    MatrixTooSmall(usize),
    #[error("matrix is not binary: found value {0}")]
    NonBinaryMatrix(f64),
    #[error("cannot take the standard deviation of an empty vector")]
    EmptyVector,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("no data to fit")]
    EmptyData,
    #[error("no frames to score")]
    EmptyFrames,
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("unsupported model format_version {0}")]
    UnsupportedVersion(u64),
    #[error("script {0:?} has no words")]
    EmptyScript(String),
    #[error("at least 2 scripts required, found {0}")]
    TooFewScripts(usize),
    #[error("unknown script label {0:?}")]
    UnknownLabel(String),
    #[error("no test samples")]
    NoTestSamples,
    #[error("invalid synthetic class spec: {0}")]
    InvalidSpec(String),
    #[error("invalid manifest line {line}: {reason}")]
    Manifest { line: usize, reason: String },
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
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
}

impl Error {
    pub(crate) fn in_file(path: impl Into<PathBuf>, source: Error) -> Self {
        Error::InFile {
            path: path.into(),
            source: Box::new(source),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        if source.kind() == std::io::ErrorKind::NotFound {
            return Error::FileNotFound(path.into());
        }
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
