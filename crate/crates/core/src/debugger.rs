//! Scriptable, UI-less debugger over one execution.

use std::sync::Arc;

use thiserror::Error;

use crate::interp::{ExecutionState, Status, StepError};
use crate::lang::{Code, Program};
use crate::trace::{Trace, TraceEntry};

pub const DEFAULT_MAX_STEPS: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DebugError {
    #[error("step budget of {max_steps} exceeded")]
    StepBudgetExceeded { max_steps: u64 },
    #[error("execution has ended")]
    NotRunning,
    #[error("session must be freshly restarted")]
    NotFresh,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// The debuggee could not be reached or answered garbage.
    #[error("transport error talking to {endpoint}: {message}")]
    Transport { endpoint: String, message: String },
    /// The debuggee answered with an in-band error this client does not map.
    #[error("debuggee error {code}: {message}")]
    Remote { code: String, message: String },
}

impl From<StepError> for DebugError {
    fn from(e: StepError) -> Self {
        match e {
            StepError::NotRunning => DebugError::NotRunning,
        }
    }
}

/// A debugger attached to one execution of `entry` against `program`.
#[derive(Clone, Debug)]
pub struct DebugSession {
    program: Arc<Program>,
    entry: Arc<Code>,
    exec: ExecutionState,
    max_steps: u64,
}

impl DebugSession {
    pub fn new(program: Arc<Program>, entry: Arc<Code>) -> Self {
        Self::with_max_steps(program, entry, DEFAULT_MAX_STEPS)
    }

    /// `max_steps` is clamped to at least 1.
    pub fn with_max_steps(program: Arc<Program>, entry: Arc<Code>, max_steps: u64) -> Self {
        let exec = ExecutionState::new(program.clone(), entry.clone());
        DebugSession {
            program,
            entry,
            exec,
            max_steps: max_steps.max(1),
        }
    }

    pub fn program(&self) -> &Arc<Program> {
        &self.program
    }

    pub fn entry(&self) -> &Arc<Code> {
        &self.entry
    }

    pub fn exec(&self) -> &ExecutionState {
        &self.exec
    }

    pub fn max_steps(&self) -> u64 {
        self.max_steps
    }

    pub fn set_max_steps(&mut self, max_steps: u64) {
        self.max_steps = max_steps.max(1);
    }

    pub fn status(&self) -> Status {
        self.exec.status()
    }

    pub fn step_count(&self) -> u64 {
        self.exec.step_count()
    }

    /// Rebuild the execution from the program and entry alone.
    pub fn restart(&mut self) {
        self.exec = ExecutionState::new(self.program.clone(), self.entry.clone());
    }

    /// Execute one node.
    ///
    /// The execution must end within `max_steps` steps: the step that leaves
    /// it still running at `max_steps` is performed but reported as
    /// [`DebugError::StepBudgetExceeded`], and so is every step after it.
    /// A budget-truncated trace ends at exactly the same point.
    pub fn step(&mut self) -> Result<(), DebugError> {
        if self.exec.is_ended() {
            return Err(DebugError::NotRunning);
        }
        let budget = DebugError::StepBudgetExceeded {
            max_steps: self.max_steps,
        };
        if self.exec.step_count() >= self.max_steps {
            return Err(budget);
        }
        self.exec.step()?;
        if !self.exec.is_ended() && self.exec.step_count() >= self.max_steps {
            return Err(budget);
        }
        Ok(())
    }

    /// Step `n` times, stopping early without error if the execution ends.
    pub fn step_n(&mut self, n: u64) -> Result<(), DebugError> {
        for _ in 0..n {
            if self.exec.is_ended() {
                break;
            }
            self.step()?;
        }
        Ok(())
    }

    /// Step until the stack depth drops below `target` or the execution ends.
    pub fn step_until_depth_below(&mut self, target: usize) -> Result<(), DebugError> {
        if target == 0 {
            return Err(DebugError::InvalidArgument("target depth must be at least 1".into()));
        }
        while let Some(depth) = self.exec.stack_depth() {
            if depth < target {
                break;
            }
            self.step()?;
        }
        Ok(())
    }

    /// Run a fresh execution to its end (or the budget), one entry per step.
    pub fn collect_full_trace(&mut self) -> Result<Trace, DebugError> {
        if self.exec.step_count() != 0 {
            return Err(DebugError::NotFresh);
        }
        let mut entries = Vec::new();
        while let Some(node) = self.exec.current_node() {
            let depth = self.exec.stack_depth().expect("running") as u32;
            entries.push(TraceEntry::new(node.identity_hash(), depth));
            match self.step() {
                Ok(()) => {}
                Err(DebugError::StepBudgetExceeded { .. }) => {
                    return Ok(Trace {
                        entries,
                        truncated: true,
                    })
                }
                Err(e) => return Err(e),
            }
        }
        Ok(Trace {
            entries,
            truncated: false,
        })
    }
}
