use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum CheckError {
    #[error("{line}:{col}: {msg}")]
    Parse { line: u32, col: u32, msg: String },

    #[error("class `{0}` not found")]
    UnknownSystem(String),

    #[error("relation `{0}` not found")]
    UnknownRelation(String),

    #[error("class `{class}`: {detail}")]
    InvalidClass { class: String, detail: String },

    #[error("relation `{name}`: {detail}")]
    RelationBind { name: String, detail: String },

    #[error("type error: {0}")]
    Type(String),

    #[error("state space too large: {0} pairs exceed the enumeration limit")]
    SpaceTooLarge(u128),

    #[error("structural mismatch: {0}")]
    Structural(String),

    #[error("mapping: {0}")]
    BadMapping(String),
}

impl CheckError {
    pub fn parse(line: u32, col: u32, msg: impl Into<String>) -> Self {
        CheckError::Parse { line, col, msg: msg.into() }
    }
}
