//! Echo-debugging core: the Echolang language, its stepping interpreter, a
//! scriptable debugger, and the convergence/divergence mapping engine that
//! compares two executions of the same statement under two program versions.

pub mod cdm;
pub mod debugger;
pub mod interp;
pub mod lang;
pub mod trace;

#[cfg(feature = "testkit")]
#[doc(hidden)]
pub mod testkit;

pub use cdm::{analyze_offline, analyze_online, go_to, CdmError, NavEvent, NavigationMap, NodeIdentity, Terminal};
pub use debugger::{DebugError, DebugSession, DEFAULT_MAX_STEPS};
pub use interp::{ExecutionState, RuntimeError, Status};
pub use lang::{parse, parse_entry, Entry, ParseError, Program};
pub use trace::{Trace, TraceEntry};

use std::sync::Arc;

/// Parse a program and an entry statement and open a debug session on them.
pub fn open_session(source: &str, entry: &str, max_steps: u64) -> Result<DebugSession, ParseError> {
    let program = Arc::new(parse(source)?);
    let entry = parse_entry(entry, &program)?;
    Ok(DebugSession::with_max_steps(program, entry, max_steps))
}
