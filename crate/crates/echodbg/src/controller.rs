//! Orchestrates the two debuggee servers: the operations behind the CLI and
//! the controller HTTP API.

use echo_core::cdm::{
    analyze_offline, go_to, identities_equal, step_to_next_convergence, step_to_next_divergence, CdmError, Debuggee,
    NavEvent, NavigationMap, Search, Terminal,
};
use echo_core::interp::FrameSummary;
use echo_core::DebugError;
use echo_wire::protocol::FieldDocument;
use echo_wire::{ContextDocument, RemoteDebuggee};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ControllerError {
    #[error("{side} debuggee: {source}")]
    Debug { side: Side, source: DebugError },
    #[error(transparent)]
    Cdm(#[from] CdmError),
    #[error("no navigation map yet; run analyze first")]
    NoMap,
    #[error("event index {index} out of range (map has {len} events)")]
    NoSuchEvent { index: usize, len: usize },
    #[error("working and failing endpoints must differ")]
    SameEndpoint,
}

impl ControllerError {
    /// In-band error code, mirroring the wire taxonomy where one applies.
    pub fn code(&self) -> &str {
        fn debug_code(e: &DebugError) -> &str {
            match e {
                DebugError::StepBudgetExceeded { .. } => "step-budget-exceeded",
                DebugError::NotRunning => "not-running",
                DebugError::NotFresh => "not-fresh",
                DebugError::InvalidArgument(_) => "bad-request",
                DebugError::Transport { .. } => "transport",
                DebugError::Remote { code, .. } => code,
            }
        }
        match self {
            ControllerError::Debug { source, .. } | ControllerError::Cdm(CdmError::Debug(source)) => debug_code(source),
            ControllerError::Cdm(CdmError::NotConvergent) => "not-convergent",
            ControllerError::Cdm(CdmError::NotDivergent) => "not-divergent",
            ControllerError::Cdm(CdmError::NonDeterministicExecution { .. }) => "non-deterministic-execution",
            ControllerError::Cdm(CdmError::EmptyTrace) => "empty-trace",
            ControllerError::NoMap => "no-map",
            ControllerError::NoSuchEvent { .. } | ControllerError::SameEndpoint => "bad-request",
        }
    }

    pub fn is_transport(&self) -> bool {
        self.code() == "transport"
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Working,
    Failing,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Working => "working",
            Side::Failing => "failing",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PaneState {
    pub endpoint: String,
    pub context: ContextDocument,
    /// Root frame first.
    pub stack: Vec<FrameSummary>,
}

/// Everything the UI shows: both panes plus the status area.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionState {
    pub working: PaneState,
    pub failing: PaneState,
    /// The current quadruples are equal. False once either execution has ended.
    pub convergent: bool,
    pub has_map: bool,
}

/// Outcome of a search operation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchOutcome {
    pub event: Option<NavEvent>,
    pub ended: Option<Terminal>,
}

impl From<Search> for SearchOutcome {
    fn from(s: Search) -> Self {
        match s {
            Search::Found(e) => SearchOutcome {
                event: Some(e),
                ended: None,
            },
            Search::Ended(t) => SearchOutcome {
                event: None,
                ended: Some(t),
            },
        }
    }
}

pub struct Controller {
    working: RemoteDebuggee,
    failing: RemoteDebuggee,
    /// Passed to trace collection; `None` keeps each server's own budget.
    budget: Option<u64>,
    map: Option<NavigationMap>,
}

impl Controller {
    pub fn new(working: RemoteDebuggee, failing: RemoteDebuggee, budget: Option<u64>) -> Result<Self, ControllerError> {
        if working.endpoint() == failing.endpoint() {
            return Err(ControllerError::SameEndpoint);
        }
        Ok(Controller {
            working,
            failing,
            budget,
            map: None,
        })
    }

    pub fn connect(working: &str, failing: &str, budget: Option<u64>) -> Result<Self, ControllerError> {
        Self::new(
            RemoteDebuggee::connect(working),
            RemoteDebuggee::connect(failing),
            budget,
        )
    }

    fn side(&self, side: Side) -> &RemoteDebuggee {
        match side {
            Side::Working => &self.working,
            Side::Failing => &self.failing,
        }
    }

    fn on<T>(side: Side, r: Result<T, DebugError>) -> Result<T, ControllerError> {
        r.map_err(|source| ControllerError::Debug { side, source })
    }

    /// Both servers answer `/health`.
    pub fn check_health(&self) -> Result<(), ControllerError> {
        for side in [Side::Working, Side::Failing] {
            Self::on(side, self.side(side).client().health().map_err(DebugError::from))?;
        }
        Ok(())
    }

    pub fn map(&self) -> Option<&NavigationMap> {
        self.map.as_ref()
    }

    pub fn state(&self) -> Result<SessionState, ControllerError> {
        let pane = |side: Side| -> Result<PaneState, ControllerError> {
            let remote = self.side(side);
            Ok(PaneState {
                endpoint: remote.endpoint().to_string(),
                context: Self::on(side, remote.context())?,
                stack: Self::on(side, remote.stack_summary())?,
            })
        };
        let (working, failing) = (pane(Side::Working)?, pane(Side::Failing)?);
        let convergent = match (working.context.identity(), failing.context.identity()) {
            (Some(a), Some(b)) => identities_equal(&a, &b),
            _ => false,
        };
        Ok(SessionState {
            working,
            failing,
            convergent,
            has_map: self.map.is_some(),
        })
    }

    pub fn inspect(&self, side: Side, object_id: u64) -> Result<Vec<FieldDocument>, ControllerError> {
        Self::on(side, self.side(side).inspect(object_id))
    }

    /// One step on each execution that is still running.
    pub fn step_both(&mut self) -> Result<(), ControllerError> {
        let w_live = Self::on(Side::Working, self.working.context())?.identity().is_some();
        let f_live = Self::on(Side::Failing, self.failing.context())?.identity().is_some();
        if !w_live && !f_live {
            return Err(ControllerError::Debug {
                side: Side::Working,
                source: DebugError::NotRunning,
            });
        }
        if w_live {
            Self::on(Side::Working, self.working.step())?;
        }
        if f_live {
            Self::on(Side::Failing, self.failing.step())?;
        }
        Ok(())
    }

    pub fn step_to_divergence(&mut self) -> Result<SearchOutcome, ControllerError> {
        Ok(step_to_next_divergence(&mut self.working, &mut self.failing)?.into())
    }

    pub fn step_to_convergence(&mut self) -> Result<SearchOutcome, ControllerError> {
        Ok(step_to_next_convergence(&mut self.working, &mut self.failing)?.into())
    }

    pub fn restart(&mut self) -> Result<(), ControllerError> {
        Self::on(Side::Working, self.working.restart())?;
        Self::on(Side::Failing, self.failing.restart())?;
        Ok(())
    }

    /// Restart both, collect both traces concurrently, map them offline and
    /// leave both executions restarted.
    pub fn analyze(&mut self) -> Result<&NavigationMap, ControllerError> {
        self.restart()?;
        let budget = self.budget;
        let (tw, tf) = std::thread::scope(|s| {
            let w = s.spawn(|| self.working.collect_trace(budget));
            let f = s.spawn(|| self.failing.collect_trace(budget));
            (w.join().expect("collector thread"), f.join().expect("collector thread"))
        });
        let tw = Self::on(Side::Working, tw)?;
        let tf = Self::on(Side::Failing, tf)?;
        let map = analyze_offline(&tw, &tf)?;
        self.restart()?;
        Ok(self.map.insert(map))
    }

    /// Replay both executions to event `index` of the current map.
    pub fn go_to(&mut self, index: usize) -> Result<NavEvent, ControllerError> {
        let map = self.map.as_ref().ok_or(ControllerError::NoMap)?;
        let event = *map.events.get(index).ok_or(ControllerError::NoSuchEvent {
            index,
            len: map.events.len(),
        })?;
        go_to(&mut self.working, &mut self.failing, &event)?;
        Ok(event)
    }

    pub fn working(&mut self) -> &mut dyn Debuggee {
        &mut self.working
    }

    pub fn failing(&mut self) -> &mut dyn Debuggee {
        &mut self.failing
    }
}
