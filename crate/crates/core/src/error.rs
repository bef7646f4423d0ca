use std::path::PathBuf;

use thiserror::Error;

use crate::dataset::{ItemId, UserId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("duplicate rating for user {user}, item {item}")]
    DuplicateRating { user: UserId, item: ItemId },

    #[error("rating {value} for user {user}, item {item} is outside the scale [{min}, {max}]")]
    OutOfScale {
        user: UserId,
        item: ItemId,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("item {0} has no genres")]
    NoGenres(ItemId),

    #[error("filter removed all data")]
    FilterRemovedAll,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty training data")]
    EmptyTrainingData,

    #[error("training diverged at epoch {epoch}: non-finite loss (learning rate {learning_rate})")]
    Diverged { epoch: usize, learning_rate: f64 },

    #[error("unknown user {0}")]
    UnknownUser(UserId),

    #[error("item {0} is not in the catalog")]
    UnknownItem(ItemId),

    #[error("user {0} has an empty profile")]
    EmptyProfile(UserId),

    #[error("user {0} has no recommendation list")]
    NoRecommendations(UserId),

    #[error("distribution is empty")]
    EmptyDistribution,

    #[error("distribution is not normalized (total mass {0})")]
    Unnormalized(f64),

    #[error("distributions have different supports ({0} vs {1} cells)")]
    DimensionMismatch(usize, usize),

    #[error("empty group")]
    EmptyGroup,

    #[error("popularity lift is undefined when profile popularity is {0}")]
    UndefinedLift(f64),

    #[error("sample too small: need at least 2 values, got {0}")]
    SampleTooSmall(usize),

    #[error("zero variance")]
    ZeroVariance,

    #[error("model was trained on dataset {expected}, but was loaded against {found}")]
    FingerprintMismatch { expected: String, found: String },

    #[error("unsupported model file version {0}")]
    ModelVersion(u32),

    #[error("unknown figure id '{given}'; valid ids: {valid}")]
    UnknownFigure { given: String, valid: String },

    #[error("config: {0}")]
    Config(String),

    #[error("stage '{stage}' failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(path: &std::path::Path, line: usize, message: impl Into<String>) -> Self {
        Error::Malformed {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Stage { source, .. } => source.class(),
            Error::InvalidArgument(_) | Error::Config(_) | Error::UnknownFigure { .. } => {
                ErrorClass::Usage
            }
            Error::Diverged { .. }
            | Error::Unnormalized(_)
            | Error::UndefinedLift(_)
            | Error::ZeroVariance => ErrorClass::Numerical,
            _ => ErrorClass::Data,
        }
    }
}
