use thiserror::Error;

#[derive(Debug, Error)]
pub enum AatError {
    #[error("unknown alternative `{0}`")]
    UnknownAlternative(String),
    #[error("duplicate alternative `{0}`")]
    DuplicateAlternative(String),
    #[error("invalid universe: {0}")]
    InvalidUniverse(String),
    #[error("invalid menu: {0}")]
    InvalidMenu(String),
    #[error("invalid utility: {0}")]
    InvalidUtility(String),
    #[error("invalid attention function: {0}")]
    InvalidAttention(String),
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error(
        "inconsistent dataset: observations {first} and {second} face the same menus \
         up to period {period} but choose differently there"
    )]
    InconsistentDataset {
        first: usize,
        second: usize,
        period: usize,
    },
    #[error("invalid rationale: {0}")]
    InvalidRationale(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("size limit exceeded: {0}")]
    LimitExceeded(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("input has the wrong shape: {0}")]
    Format(String),
    #[error("behavior is not AAT-consistent: {} is violated", .0.law)]
    NotAat(Box<crate::verdict::VerdictReport>),
    #[error("undecided pairs within the horizon: {0}")]
    Undecided(String),
    #[error("revealed relation is cyclic: {0}")]
    Cyclic(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
