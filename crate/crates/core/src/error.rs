use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {context}{}{}", fmt_epoch(*.epoch), fmt_point(*.point))]
    Numerical {
        context: String,
        epoch: Option<usize>,
        point: Option<usize>,
    },

    #[error("indicator density is degenerate (all values zero or non-finite)")]
    DegenerateDensity,

    #[error("indicator index undefined for a vanishing estimator")]
    UndefinedIndicatorIndex,

    #[error("empty point batch")]
    EmptyBatch,

    #[error("unknown case id {0} (expected 1..=5)")]
    UnknownCase(u32),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn fmt_epoch(epoch: Option<usize>) -> String {
    epoch.map(|e| format!(" at epoch {e}")).unwrap_or_default()
}

fn fmt_point(point: Option<usize>) -> String {
    point.map(|p| format!(" (point {p})")).unwrap_or_default()
}

impl Error {
    pub fn numerical(context: impl Into<String>) -> Self {
        Error::Numerical {
            context: context.into(),
            epoch: None,
            point: None,
        }
    }

    /// Attaches an epoch to a numerical error; other variants pass through.
    pub fn at_epoch(self, epoch: usize) -> Self {
        match self {
            Error::Numerical { context, point, .. } => Error::Numerical {
                context,
                epoch: Some(epoch),
                point,
            },
            other => other,
        }
    }

    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical { .. })
    }
}
