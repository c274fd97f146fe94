use thiserror::Error;

/// Errors raised by parsing, model construction and the analyses.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("{line}:{col}: relation `{rel}` used with arity {found}, but earlier with arity {expected}")]
    Arity {
        line: usize,
        col: usize,
        rel: String,
        expected: usize,
        found: usize,
    },

    #[error("{line}:{col}: fact `{fact}` contains a variable")]
    NonGroundFact { line: usize, col: usize, fact: String },

    #[error("duplicate rule id `{0}`")]
    DuplicateRuleId(String),

    #[error("rule `{rule}`: {msg}")]
    InvalidRule { rule: String, msg: String },

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("connectedness is undefined for an empty atom tuple")]
    EmptyTuple,

    #[error("atom {0} is not a member of the given body")]
    NotInBody(String),

    #[error("relation mismatch between {0} and {1}")]
    RelationMismatch(String, String),

    #[error("trigger for rule `{rule}` is not applicable: {msg}")]
    InvalidTrigger { rule: String, msg: String },

    #[error("resource limit exceeded: {what} (limit {limit})")]
    ResourceLimit { what: String, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
