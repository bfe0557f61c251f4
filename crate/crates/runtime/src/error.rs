use thiserror::Error;

use crate::system::ObjectId;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum RuntimeError {
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("class `{0}` is already registered")]
    DuplicateClass(String),
    #[error("class `{class}` has no method `{method}`")]
    UnknownMethod { class: String, method: String },
    #[error("class `{class}`: {reason}")]
    InvalidClass { class: String, reason: String },
    #[error("class `{class}`: calls through parameter `{param}` would re-enter the same class; self-calls are rejected")]
    SelfCall { class: String, param: String },
    #[error("constructing `{class}`: expected {expected} argument(s), got {got}")]
    CtorArity { class: String, expected: usize, got: usize },
    #[error("constructing `{class}`: argument `{param}` must be a `{expected}` object")]
    CtorClassMismatch { class: String, param: String, expected: String },
    #[error("field `{field}` of `{class}`: value {value} outside declared domain")]
    DomainViolation { class: String, field: String, value: String },
    #[error("object {0:?} has been destroyed")]
    Destroyed(ObjectId),
    #[error("object {0:?} has suspended work and cannot be destroyed")]
    NotIdle(ObjectId),
    #[error("segment fired a call but declares none")]
    FireWithoutCall,
    #[error("segment fired its call twice")]
    DoubleFire,
    #[error("run stopped while a call was in progress")]
    Interrupted,
    #[error("scheduler configuration: {0}")]
    BadConfig(String),
    #[error("scheduler is already running")]
    AlreadyRunning,
}
