//! Online mapping: both executions are stepped live and compared on their
//! full node identities.

use serde::{Deserialize, Serialize};

use super::error::CdmError;
use super::identity::NodeIdentity;
use super::map::{EventKind, NavEvent, NavigationMap, Terminal};
use crate::debugger::{DebugError, DebugSession};
use crate::interp::Status;

/// What the controller can see of an execution in one round trip.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Observation {
    pub step_count: u64,
    pub status: Status,
    /// Identity and stack depth of the node about to execute; `None` once ended.
    pub current: Option<(NodeIdentity, usize)>,
}

impl Observation {
    pub fn is_ended(&self) -> bool {
        self.current.is_none()
    }

    pub fn identity(&self) -> Option<&NodeIdentity> {
        self.current.as_ref().map(|(id, _)| id)
    }

    pub fn depth(&self) -> Option<usize> {
        self.current.as_ref().map(|(_, d)| *d)
    }
}

/// An execution the mapping engine can drive, local or remote.
pub trait Debuggee {
    fn observe(&mut self) -> Result<Observation, DebugError>;
    fn step(&mut self) -> Result<(), DebugError>;
    fn step_n(&mut self, n: u64) -> Result<(), DebugError>;
    fn step_until_depth_below(&mut self, target: usize) -> Result<(), DebugError>;
    fn restart(&mut self) -> Result<(), DebugError>;
}

impl Debuggee for DebugSession {
    fn observe(&mut self) -> Result<Observation, DebugError> {
        let exec = self.exec();
        Ok(Observation {
            step_count: exec.step_count(),
            status: exec.status(),
            current: exec
                .current_node()
                .map(|n| (n.identity(), exec.stack_depth().expect("running"))),
        })
    }

    fn step(&mut self) -> Result<(), DebugError> {
        DebugSession::step(self)
    }

    fn step_n(&mut self, n: u64) -> Result<(), DebugError> {
        DebugSession::step_n(self, n)
    }

    fn step_until_depth_below(&mut self, target: usize) -> Result<(), DebugError> {
        DebugSession::step_until_depth_below(self, target)
    }

    fn restart(&mut self) -> Result<(), DebugError> {
        DebugSession::restart(self);
        Ok(())
    }
}

/// Result of a divergence or convergence search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Search {
    Found(NavEvent),
    /// An execution ended before the event was reached.
    Ended(Terminal),
}

fn ended(ow: &Observation, of: &Observation) -> Option<Terminal> {
    Terminal::from_ended(ow.is_ended(), of.is_ended())
}

/// Combine the outcomes of one move made on both sides. Both halves are
/// always performed, so a budget hit on one side does not depend on which
/// side happens to go first.
fn both(rw: Result<(), DebugError>, rf: Result<(), DebugError>) -> Result<(), DebugError> {
    match (rw, rf) {
        (Err(e @ DebugError::StepBudgetExceeded { .. }), Ok(()))
        | (Ok(()), Err(e @ DebugError::StepBudgetExceeded { .. })) => Err(e),
        (Err(DebugError::StepBudgetExceeded { .. }), Err(e)) => Err(e),
        (Err(e), _) | (_, Err(e)) => Err(e),
        (Ok(()), Ok(())) => Ok(()),
    }
}

/// Step both executions in lockstep until the nodes they are about to
/// execute differ.
pub fn step_to_next_divergence(w: &mut dyn Debuggee, f: &mut dyn Debuggee) -> Result<Search, CdmError> {
    let (ow, of) = (w.observe()?, f.observe()?);
    if let Some(t) = ended(&ow, &of) {
        return Ok(Search::Ended(t));
    }
    if ow.identity() != of.identity() {
        return Err(CdmError::NotConvergent);
    }
    loop {
        both(w.step(), f.step())?;
        let (ow, of) = (w.observe()?, f.observe()?);
        if let Some(t) = ended(&ow, &of) {
            return Ok(Search::Ended(t));
        }
        if ow.identity() != of.identity() {
            return Ok(Search::Found(NavEvent::divergence(ow.step_count, of.step_count)));
        }
    }
}

/// Unwind the executions until they are back to executing the same node at
/// the same depth.
///
/// With unequal depths only the deeper execution is unwound, down to the
/// shallower depth (a primitive on one side leaves that side one frame
/// shallower). With equal depths both finish their current call. Divergent
/// executions both at the root frame cannot unwind and are stepped in lockstep.
pub fn step_to_next_convergence(w: &mut dyn Debuggee, f: &mut dyn Debuggee) -> Result<Search, CdmError> {
    let (mut ow, mut of) = (w.observe()?, f.observe()?);
    if let Some(t) = ended(&ow, &of) {
        return Ok(Search::Ended(t));
    }
    if ow.identity() == of.identity() && ow.depth() == of.depth() {
        return Err(CdmError::NotDivergent);
    }
    loop {
        let (dw, df) = (ow.depth().expect("live"), of.depth().expect("live"));
        if dw > df {
            w.step_until_depth_below(df + 1)?;
        } else if df > dw {
            f.step_until_depth_below(dw + 1)?;
        } else if dw > 1 {
            both(w.step_until_depth_below(dw), f.step_until_depth_below(dw))?;
        } else {
            both(w.step(), f.step())?;
        }
        ow = w.observe()?;
        of = f.observe()?;
        if let Some(t) = ended(&ow, &of) {
            return Ok(Search::Ended(t));
        }
        if ow.depth() == of.depth() && ow.identity() == of.identity() {
            return Ok(Search::Found(NavEvent::convergence(ow.step_count, of.step_count)));
        }
    }
}

/// Restart both executions and map every divergence and convergence.
///
/// Running out of step budget yields a partial map with terminal `Budget`;
/// any other error (transport, protocol) is returned.
pub fn analyze_online(w: &mut dyn Debuggee, f: &mut dyn Debuggee) -> Result<NavigationMap, CdmError> {
    w.restart()?;
    f.restart()?;
    let mut events = Vec::new();
    let terminal = match map_events(w, f, &mut events) {
        Ok(t) => t,
        Err(CdmError::Debug(DebugError::StepBudgetExceeded { .. })) => Terminal::Budget,
        Err(e) => return Err(e),
    };
    Ok(NavigationMap {
        events,
        terminal,
        w_total_steps: w.observe()?.step_count,
        f_total_steps: f.observe()?.step_count,
    })
}

fn map_events(w: &mut dyn Debuggee, f: &mut dyn Debuggee, events: &mut Vec<NavEvent>) -> Result<Terminal, CdmError> {
    // identical entries start convergent; guard against mismatched entries anyway
    let (ow, of) = (w.observe()?, f.observe()?);
    let mut convergent = ow.identity() == of.identity();
    if !convergent && ended(&ow, &of).is_none() {
        events.push(NavEvent::divergence(0, 0));
    }
    loop {
        let search = if convergent {
            step_to_next_divergence(w, f)?
        } else {
            step_to_next_convergence(w, f)?
        };
        match search {
            Search::Found(event) => {
                events.push(event);
                convergent = event.kind == EventKind::Convergence;
            }
            Search::Ended(t) => return Ok(t),
        }
    }
}

/// Replay both executions to `event` and check that they are where the map
/// says they should be.
pub fn go_to(
    w: &mut dyn Debuggee,
    f: &mut dyn Debuggee,
    event: &NavEvent,
) -> Result<(Observation, Observation), CdmError> {
    w.restart()?;
    f.restart()?;
    w.step_n(event.w_steps)?;
    f.step_n(event.f_steps)?;
    let (ow, of) = (w.observe()?, f.observe()?);
    let mismatch = |reason: &str| CdmError::NonDeterministicExecution {
        event: *event,
        reason: reason.to_string(),
    };
    if ow.step_count != event.w_steps || of.step_count != event.f_steps {
        return Err(mismatch("an execution ended before reaching the event"));
    }
    if ow.is_ended() || of.is_ended() {
        return Err(mismatch("an execution ended exactly at the event"));
    }
    match event.kind {
        EventKind::Divergence if ow.identity() == of.identity() => {
            Err(mismatch("executions are convergent at a divergence event"))
        }
        EventKind::Convergence if ow.identity() != of.identity() || ow.depth() != of.depth() => {
            Err(mismatch("executions are divergent at a convergence event"))
        }
        _ => Ok((ow, of)),
    }
}
