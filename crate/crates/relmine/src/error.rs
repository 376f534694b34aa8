use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by the command-line frontend to pick an exit
/// code: usage problems exit 2, data problems exit 3, degenerate inputs 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Usage,
    Data,
    Degenerate,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown attribute id {0}")]
    UnknownAttributeId(usize),

    #[error("unknown attribute {0:?}")]
    UnknownAttribute(String),

    #[error("duplicate attribute name {0:?}")]
    DuplicateAttribute(String),

    #[error("consequent {0:?} may not appear in its own antecedent")]
    ConsequentInAntecedent(String),

    #[error("negation of {0:?} already present in the catalog")]
    NegationExists(String),

    #[error("row {row:?}: {message}")]
    BadRow { row: String, message: String },

    #[error("duplicate row id {0:?}")]
    DuplicateRowId(String),

    #[error("table is empty")]
    EmptyTable,

    #[error("table/catalog mismatch: {0}")]
    CatalogMismatch(String),

    #[error("malformed table csv: {0}")]
    BadTableCsv(String),

    #[error("binning spec invalid: {0}")]
    InvalidSpec(String),

    #[error("column {column:?} has no rule in the binning spec")]
    UncoveredColumn { column: String },

    #[error("column {column:?}: cannot bin value {value:?}: {reason}")]
    BinningFailed {
        column: String,
        value: String,
        reason: String,
    },

    #[error("records malformed: {0}")]
    BadRecords(String),

    #[error("target {target:?} is degenerate: {reason}")]
    DegenerateTarget { target: String, reason: String },

    #[error("too many eligible attributes for exhaustive mining: {count} (limit {limit})")]
    TooManyAttributes { count: usize, limit: usize },

    #[error("rule set fingerprint {found} does not match table fingerprint {expected}")]
    FingerprintMismatch { expected: String, found: String },

    #[error("malformed rules file: {0}")]
    BadRulesFile(String),

    #[error("support levels invalid: {0}")]
    BadSupportLevels(String),

    #[error("record {row:?} matches no class in stage {stage:?}")]
    Unclassified { row: String, stage: String },

    #[error("record {row:?} matches classes {first:?} and {second:?} in stage {stage:?}")]
    AmbiguousClass {
        row: String,
        stage: String,
        first: String,
        second: String,
    },

    #[error("analytics config invalid: {0}")]
    InvalidAnalytics(String),

    #[error("no records to analyze")]
    NoRecords,

    #[error("missing required input: {0}")]
    MissingInput(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: invalid json: {message}")]
    BadJson { path: PathBuf, message: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::MissingInput(_) | Error::InvalidArgument(_) | Error::BadSupportLevels(_) => {
                ErrorCategory::Usage
            }
            Error::DegenerateTarget { .. } => ErrorCategory::Degenerate,
            _ => ErrorCategory::Data,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.category() {
            ErrorCategory::Usage => 2,
            ErrorCategory::Data => 3,
            ErrorCategory::Degenerate => 4,
        }
    }
}
