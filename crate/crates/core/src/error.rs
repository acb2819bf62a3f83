use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed WAV header: {0}")]
    MalformedHeader(String),
    #[error("unsupported WAV encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("FFT length {0} is not a power of two")]
    LengthNotPowerOfTwo(usize),
    #[error("clip has {samples} samples, needs at least {needed}")]
    ClipTooShort { samples: usize, needed: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("label {label} out of range for {num_classes} classes")]
    LabelOutOfRange { label: usize, num_classes: usize },
    #[error("cannot predict from an empty segment list")]
    EmptySegmentList,
    #[error("I/O failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("format/version mismatch: {0}")]
    FormatVersionMismatch(String),
    #[error("config mismatch: {0}")]
    ConfigMismatch(String),
    #[error("non-finite gradient at coordinate {0}")]
    NonFiniteGradient(usize),
    #[error("segment store is empty")]
    EmptyStore,
    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("bad manifest header {found:?}, expected \"path,label,speaker_id\"")]
    BadHeader { found: String },
    #[error("line {line}: {msg}")]
    MalformedRow { line: usize, msg: String },
    #[error("line {line}: unknown label {label:?} (expected ENG, ARA or MAN)")]
    UnknownLabel { line: usize, label: String },
    #[error("line {line}: duplicate path {}", .path.display())]
    DuplicatePath { line: usize, path: PathBuf },
    #[error("label {label} has {speakers} speaker(s); a split needs at least 2")]
    TooFewSpeakers { label: &'static str, speakers: usize },
    #[error("class index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("no evaluated items with true class {0}")]
    EmptyColumn(&'static str),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("{}: {source}", .path.display())]
    AtPath {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Stable identifier for the failure kind, suitable for grepping logs.
    /// Path annotations are transparent: the code of the wrapped error wins.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MalformedHeader(_) => "MalformedHeader",
            Error::UnsupportedEncoding(_) => "UnsupportedEncoding",
            Error::LengthNotPowerOfTwo(_) => "LengthNotPowerOfTwo",
            Error::ClipTooShort { .. } => "ClipTooShort",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::LabelOutOfRange { .. } => "LabelOutOfRange",
            Error::EmptySegmentList => "EmptySegmentList",
            Error::Io(_) => "IoFailure",
            Error::FormatVersionMismatch(_) => "FormatVersionMismatch",
            Error::ConfigMismatch(_) => "ConfigMismatch",
            Error::NonFiniteGradient(_) => "NonFiniteGradient",
            Error::EmptyStore => "EmptyStore",
            Error::MissingFile(_) => "MissingFile",
            Error::BadHeader { .. } => "BadHeader",
            Error::MalformedRow { .. } => "MalformedRow",
            Error::UnknownLabel { .. } => "UnknownLabel",
            Error::DuplicatePath { .. } => "DuplicatePath",
            Error::TooFewSpeakers { .. } => "TooFewSpeakers",
            Error::IndexOutOfRange(_) => "IndexOutOfRange",
            Error::EmptyMatrix => "EmptyMatrix",
            Error::EmptyColumn(_) => "EmptyColumn",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::AtPath { source, .. } => source.code(),
        }
    }

    pub fn at_path(self, path: impl Into<PathBuf>) -> Error {
        Error::AtPath {
            path: path.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, looking through path annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtPath { source, .. } => source.root(),
            other => other,
        }
    }
}
