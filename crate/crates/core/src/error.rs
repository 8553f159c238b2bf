use thiserror::Error;

use crate::model::ContentId;

/// Errors raised by the simulator, the offline baselines and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("catalog must contain at least one content")]
    EmptyCatalog,

    #[error("cache {cache}: cannot evict {victim}, it is not stored there")]
    InvalidEviction { cache: usize, victim: ContentId },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("search budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("bound undefined: {0}")]
    UndefinedBound(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("request sequence mismatch: {0}")]
    Mismatch(String),

    #[error("regime error: {0}")]
    Regime(String),

    #[error("unknown preset '{0}' (expected fig3, fig4, fig5 or adversarial)")]
    UnknownPreset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
