use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("metric violation: {0}")]
    MetricViolation(String),

    #[error("color missing for point {0}")]
    ColorMissing(usize),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid clustering: {0}")]
    InvalidClustering(String),

    #[error("search budget exceeded after {nodes} nodes (limit {limit})")]
    BudgetExceeded { nodes: u64, limit: u64 },

    #[error("no assignment satisfies the constraint")]
    Infeasible,

    #[error("instance has no similarity sets")]
    MissingSimilaritySets,

    #[error("instance has no outcome label for center {0}")]
    MissingOutcomeLabels(usize),

    #[error("instance has no class labels")]
    MissingClassLabels,

    #[error("operation requires coordinate geometry")]
    RequiresCoordinates,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
