use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("duplicate variable name `{0}`")]
    DuplicateVar(String),
    #[error("unregistered variable (index {0})")]
    UnregisteredVar(usize),
    #[error("invalid bounds for `{name}`: [{lb}, {ub}]")]
    InvalidBounds { name: String, lb: f64, ub: f64 },
    #[error("constraint tag must be non-empty")]
    EmptyTag,
    #[error("non-finite coefficient in {0}")]
    NonFinite(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("model has {integer_vars} integer variables, built-in branch-and-bound accepts at most {limit}; use external backend")]
    TooLarge { integer_vars: usize, limit: usize },
    #[error("solver backend failed: {0}")]
    Backend(String),
}
