use thiserror::Error;

pub type Result<T, E = QesError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum QesError {
    #[error("degenerate exponential scaling: b2 = 0")]
    DegenerateScaling,

    #[error("complex basic equation unsupported: {0}")]
    ComplexEquation(String),

    #[error("singular configuration: {0}")]
    SingularConfiguration(String),

    #[error("not QES at degree {n}: c1 + n*b2 = {leakage:e}")]
    NotQes { n: usize, leakage: f64 },

    #[error("subspace not invariant: leakage coefficient {leakage:e}")]
    NotInvariant { leakage: f64 },

    #[error("inconsistent QES family: {0}")]
    InconsistentFamily(String),

    #[error("degree deflation required: leading coefficient is zero")]
    DegreeDeflation,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("unknown parameter `{name}` for {model}")]
    UnknownParameter { model: String, name: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("no real level: {0}")]
    NoRealLevel(String),

    #[error("invalid solver configuration: {0}")]
    SolverConfig(String),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl QesError {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        QesError::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
