use thiserror::Error;

/// Failure of the debuggee program itself. Ends the execution with status `Failed`.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RuntimeError {
    #[error("{class} does not understand `{selector}`")]
    MessageNotUnderstood { class: String, selector: String },
    #[error("type error: {0}")]
    TypeError(String),
    #[error("integer overflow in `{0}`")]
    Overflow(String),
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("undefined variable `{0}`")]
    UndefinedVariable(String),
    #[error("unknown field `{0}`")]
    UnknownField(String),
    #[error("primitive method sent `{0}` to a user object")]
    PrimitiveSend(String),
    #[error("call stack exceeded {0} frames")]
    StackOverflow(usize),
}

/// Misuse of the execution API (as opposed to a failure of the program).
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("execution has ended")]
    NotRunning,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum InspectError {
    #[error("unknown object {0}")]
    UnknownObject(u64),
}
