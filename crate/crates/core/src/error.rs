use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure category, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Inconsistent or invalid options.
    Config,
    /// Malformed or unsuitable input data.
    Data,
    /// Rank deficiency, degenerate configurations and similar numeric failures.
    Numeric,
    /// Filesystem or encoder failure.
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("cannot parse {value:?} as a number at row {row}, column `{column}`")]
    Parse {
        /// 1-based data row (header excluded).
        row: usize,
        column: String,
        value: String,
    },

    #[error("non-finite value at row {row}, column `{column}`")]
    NonFinite { row: usize, column: String },

    #[error("time variable needs at least 2 distinct levels, found {0}")]
    Cardinality(usize),

    #[error("at least 2 numeric variables are required, found {0}")]
    TooFewVariables(usize),

    #[error("time level `{0}` has no rows")]
    EmptyLevel(String),

    #[error("invalid level order: {0}")]
    LevelOrder(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("column `{0}` has zero variance and cannot be scaled")]
    DegenerateColumn(String),

    #[error("standardized data has rank {rank} (a 2-D biplot needs rank >= 2){}", level_suffix(.level))]
    RankDeficient { rank: usize, level: Option<String> },

    #[error("time level `{level}` has {count} rows; a per-level PCA needs at least 3")]
    UndersizedSlice { level: String, count: usize },

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("unknown reflection axis `{0}` (expected x, y or xy)")]
    UnknownAxis(String),

    #[error("unknown time level `{level}`; valid levels: {}", .valid.join(", "))]
    UnknownLevel { level: String, valid: Vec<String> },

    #[error("unbalanced time slices (rows must match by group and within-group order): {}", .levels.join(", "))]
    Unbalanced { levels: Vec<String> },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("render error: {0}")]
    Render(String),

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("GIF encoding error: {0}")]
    Gif(#[from] gif::EncodingError),
}

fn level_suffix(level: &Option<String>) -> String {
    match level {
        Some(l) => format!(" at level `{l}`"),
        None => String::new(),
    }
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            Config(_) | UnknownAxis(_) | LevelOrder(_) | MissingColumn(_) => ErrorKind::Config,
            UnknownLevel { .. } => ErrorKind::Config,
            Parse { .. }
            | NonFinite { .. }
            | Cardinality(_)
            | TooFewVariables(_)
            | EmptyLevel(_)
            | Shape(_)
            | UndersizedSlice { .. }
            | Unbalanced { .. }
            | Csv(_)
            | Json(_) => ErrorKind::Data,
            DegenerateColumn(_)
            | RankDeficient { .. }
            | DegenerateConfiguration(_)
            | Internal(_)
            | Render(_) => ErrorKind::Numeric,
            Io { .. } | Gif(_) => ErrorKind::Io,
        }
    }
}
