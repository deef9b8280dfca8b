use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid vector: {0}")]
    InvalidVector(String),

    #[error("invalid seminorm: {0}")]
    InvalidSeminorm(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid neighborhood: {0}")]
    InvalidNeighborhood(String),

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),

    #[error("invalid function: {0}")]
    InvalidFunction(String),

    #[error("invalid cover: point `{0}` is not covered")]
    InvalidCover(String),

    #[error("no member of the neighborhood found after {0} draws")]
    SamplingFailed(usize),

    #[error("zero probe vector")]
    ZeroProbe,

    #[error("symbol is not injective: `{0}` and `{1}` share an image")]
    NotInjective(String, String),

    #[error("oracle guard exceeded: |X|·|Y| = {0} > 64")]
    OracleGuard(usize),

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("evaluator failed: {0}")]
    Evaluator(String),

    #[error("external map timed out after {0} ms")]
    Timeout(u64),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
