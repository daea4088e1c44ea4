use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the pipeline and the statistics toolkit can report.
///
/// Each variant maps to a stable upper-case code (see [`Error::code`]) that
/// is what ends up in logs, the QC report and the C API.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("not a DICOM Part-10 file (missing preamble or DICM magic)")]
    NotDicom,

    #[error("unsupported transfer syntax {0}")]
    UnsupportedTransferSyntax(String),

    #[error("malformed DICOM data: {0}")]
    Malformed(String),

    #[error("slice without position or instance number: {0}")]
    MissingGeometry(String),

    #[error("malformed series: {0}")]
    MalformedSeries(String),

    #[error("output already exists: {0}")]
    DuplicateOutput(PathBuf),

    #[error("schema error at line {line}: {message}")]
    Schema { line: u64, message: String },

    #[error("patient {0} has conflicting labels")]
    LabelConflict(String),

    #[error("value out of range: {0}")]
    Range(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("both classes must be present (got {positives} positive, {negatives} negative)")]
    DegenerateLabels { positives: usize, negatives: usize },

    #[error("variance of the AUC difference is zero; no test possible")]
    DegenerateVariance,

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "IO_ERROR",
            Error::NotDicom => "NOT_DICOM",
            Error::UnsupportedTransferSyntax(_) => "UNSUPPORTED_TRANSFER_SYNTAX",
            Error::Malformed(_) => "MALFORMED",
            Error::MissingGeometry(_) => "MISSING_GEOMETRY",
            Error::MalformedSeries(_) => "MALFORMED_SERIES",
            Error::DuplicateOutput(_) => "DUPLICATE_OUTPUT",
            Error::Schema { .. } => "SCHEMA_ERROR",
            Error::LabelConflict(_) => "LABEL_CONFLICT",
            Error::Range(_) => "RANGE_ERROR",
            Error::EmptyInput(_) => "EMPTY_INPUT",
            Error::DegenerateLabels { .. } => "DEGENERATE_LABELS",
            Error::DegenerateVariance => "DEGENERATE_VARIANCE",
            Error::LengthMismatch(_) => "LENGTH_MISMATCH",
            Error::Config(_) => "CONFIG_ERROR",
        }
    }
}
