use std::io;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad classes used to pick a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Usage,
    Data,
    Computation,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dataset contains no interactions")]
    EmptyDataset,

    #[error("row {row}: weight {weight} must be positive and finite")]
    InvalidWeight { row: usize, weight: f64 },

    #[error("node index {index} out of range for {side} (count {count})")]
    InvalidNode {
        side: &'static str,
        index: usize,
        count: usize,
    },

    #[error("pair (drug {drug}, protein {protein}) is an observed edge")]
    ObservedPair { drug: usize, protein: usize },

    #[error("power iteration did not converge after {iterations} iterations (best estimate {estimate})")]
    SpectralEstimateFailed { estimate: f64, iterations: usize },

    #[error("beta {beta} too large: must be below {max_beta} (0.95 / lambda_max)")]
    BetaTooLarge { beta: f64, max_beta: f64 },

    #[error("linear solve failed: {0}")]
    SolveFailed(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("score table is empty")]
    EmptyScores,

    #[error("cannot split {interactions} interactions into {k} folds")]
    TooManyFolds { k: usize, interactions: usize },

    #[error("fold count must be at least 2, got {0}")]
    InvalidFoldCount(usize),

    #[error("validation pair (drug {drug}, protein {protein}) is present in the training graph")]
    LeakageDetected { drug: usize, protein: usize },

    #[error("validation set is empty")]
    EmptyValidation,

    #[error("no curves to average")]
    NoCurves,

    #[error("precision-recall curve has no points")]
    EmptyCurve,

    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidConfig(_) | Error::TooManyFolds { .. } | Error::InvalidFoldCount(_) => {
                ErrorCategory::Usage
            }
            Error::EmptyDataset
            | Error::InvalidWeight { .. }
            | Error::Schema(_)
            | Error::Parse(_)
            | Error::Io(_)
            | Error::Csv(_) => ErrorCategory::Data,
            _ => ErrorCategory::Computation,
        }
    }
}
