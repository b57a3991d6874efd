use std::path::PathBuf;

use thiserror::Error;

use crate::data::YearMonth;

/// Errors raised anywhere in the forecasting pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}line {line}: {message}", context.as_deref().map(|c| format!("{c}: ")).unwrap_or_default())]
    Parse {
        context: Option<String>,
        line: u64,
        message: String,
    },

    #[error("no records")]
    NoRecords,

    #[error("duplicate timestamp {timestamp} in series `{series}`")]
    DuplicateTimestamp { series: String, timestamp: String },

    #[error("series `{series}` is missing months: {}", format_months(.missing))]
    MissingMonths {
        series: String,
        missing: Vec<YearMonth>,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate series: {0}")]
    Degenerate(String),

    #[error("singular regression matrix")]
    SingularMatrix,

    #[error("row width mismatch: expected {expected} features, got {actual}")]
    WidthMismatch { expected: usize, actual: usize },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidInput(message.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

fn format_months(months: &[YearMonth]) -> String {
    months
        .iter()
        .map(|m| m.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}
