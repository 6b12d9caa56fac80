use thiserror::Error;

use super::map::NavEvent;
use crate::debugger::DebugError;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CdmError {
    #[error(transparent)]
    Debug(#[from] DebugError),
    #[error("executions are not convergent")]
    NotConvergent,
    #[error("executions are not divergent")]
    NotDivergent,
    #[error("replay did not reproduce {event:?}: {reason}")]
    NonDeterministicExecution { event: NavEvent, reason: String },
    #[error("one trace is empty and the other is not")]
    EmptyTrace,
}
