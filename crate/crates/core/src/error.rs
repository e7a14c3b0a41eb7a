use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error in `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("seed vector has {got} entries, instance has {expected} resources")]
    SeedLength { expected: usize, got: usize },

    #[error("seed value {value} outside [0, 1]")]
    SeedRange { value: f64 },

    #[error("budgets are hidden on instance `{label}`; policy `{policy}` is budget aware")]
    BudgetsHidden { label: String, policy: String },

    #[error("target policy is not deterministic: replays disagree at arrival {arrival}")]
    NondeterministicTarget { arrival: usize },

    #[error("invalid argument `{name}`: {message}")]
    InvalidArgument { name: String, message: String },

    #[error("instance too large for brute force: {choices} assignments exceed cap {cap}")]
    BruteForceTooLarge { choices: f64, cap: f64 },

    #[error("simplex iteration cap {cap} exceeded; last basis {basis:?}")]
    SimplexIterationCap { cap: usize, basis: Vec<usize> },

    #[error("instance is not decomposable: {0}")]
    NotDecomposable(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: String, name: String },
}

impl Error {
    pub fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn invalid(name: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name: name.into(),
            message: message.into(),
        }
    }
}
