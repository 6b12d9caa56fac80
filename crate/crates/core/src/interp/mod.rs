//! Deterministic debuggee runtime.

mod error;
mod machine;
mod value;

pub use error::{InspectError, RuntimeError, StepError};
pub use machine::{ExecutionState, Frame, FrameSummary, NodeRef, Status, MAX_STACK_DEPTH};
pub use value::{DictKey, Heap, Object, ObjectData, ObjectId, Value};
