use alloc::string::String;

/// Invalid model, learning or experiment configuration.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("`{field}` must be positive")]
    NotPositive { field: &'static str },
    #[error("`{field}` = {value} is outside {range}")]
    OutOfRange {
        field: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("search depth `{field}` = {depth} exceeds the {available} available firms")]
    SearchTooDeep {
        field: &'static str,
        depth: usize,
        available: usize,
    },
    #[error("{agents} RL agents requested but only {firms} C-firms exist")]
    TooManyAgents { agents: usize, firms: usize },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("expected {expected} firm decisions, got {got}")]
    DecisionCount { expected: usize, got: usize },
    #[error("firm {firm}: decided price {price} is not positive")]
    BadPrice { firm: usize, price: f64 },
    #[error("window of {window} steps exceeds the {len} available")]
    WindowTooLong { window: usize, len: usize },
    #[error("policy set does not match the experiment: {0}")]
    PolicyMismatch(String),
    #[error("no data: {0}")]
    Empty(&'static str),
}
