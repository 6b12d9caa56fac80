//! Offline mapping over collected traces.
//!
//! Position `i` of a trace is the state after `i` steps: `entries[i]` is the
//! node about to execute and its stack depth. Position `len` is the end of the
//! execution, unless the trace is truncated, in which case the execution was
//! still running and moving past the last entry exhausts the budget.

use super::error::CdmError;
use super::map::{NavEvent, NavigationMap, Terminal};
use crate::trace::{Trace, TraceEntry};

struct Cursor<'a> {
    entries: &'a [TraceEntry],
    truncated: bool,
    pos: usize,
}

struct BudgetHit;

impl<'a> Cursor<'a> {
    fn new(trace: &'a Trace) -> Self {
        Cursor {
            entries: &trace.entries,
            truncated: trace.truncated,
            pos: 0,
        }
    }

    fn current(&self) -> Option<&TraceEntry> {
        self.entries.get(self.pos)
    }

    fn ended(&self) -> bool {
        self.pos >= self.entries.len()
    }

    fn hash(&self) -> u64 {
        self.entries[self.pos].identity_hash
    }

    fn depth(&self) -> u32 {
        self.entries[self.pos].stack_depth
    }

    fn step(&mut self) -> Result<(), BudgetHit> {
        debug_assert!(!self.ended());
        self.pos += 1;
        if self.truncated && self.pos == self.entries.len() {
            return Err(BudgetHit);
        }
        Ok(())
    }

    fn step_until_depth_below(&mut self, target: u32) -> Result<(), BudgetHit> {
        while let Some(e) = self.current() {
            if e.stack_depth < target {
                break;
            }
            self.step()?;
        }
        Ok(())
    }
}

/// Both halves of a move are always made, whichever side runs out of budget.
fn both(rw: Result<(), BudgetHit>, rf: Result<(), BudgetHit>) -> Result<(), BudgetHit> {
    rw.and(rf)
}

fn terminal(w: &Cursor, f: &Cursor) -> Option<Terminal> {
    Terminal::from_ended(w.ended(), f.ended())
}

/// Map divergences and convergences from two traces, comparing identity hashes.
pub fn analyze_offline(trace_w: &Trace, trace_f: &Trace) -> Result<NavigationMap, CdmError> {
    let empty_mismatch = |a: &Trace, b: &Trace| a.entries.is_empty() && !a.truncated && !b.entries.is_empty();
    if empty_mismatch(trace_w, trace_f) || empty_mismatch(trace_f, trace_w) {
        return Err(CdmError::EmptyTrace);
    }
    let mut w = Cursor::new(trace_w);
    let mut f = Cursor::new(trace_f);
    let mut events = Vec::new();
    let terminal = match run(&mut w, &mut f, &mut events) {
        Ok(t) => t,
        Err(BudgetHit) => Terminal::Budget,
    };
    Ok(NavigationMap {
        events,
        terminal,
        w_total_steps: w.pos as u64,
        f_total_steps: f.pos as u64,
    })
}

fn run(w: &mut Cursor, f: &mut Cursor, events: &mut Vec<NavEvent>) -> Result<Terminal, BudgetHit> {
    if let Some(t) = terminal(w, f) {
        return Ok(t);
    }
    if w.hash() != f.hash() {
        events.push(NavEvent::divergence(0, 0));
    } else {
        match next_divergence(w, f)? {
            Some(t) => return Ok(t),
            None => events.push(NavEvent::divergence(w.pos as u64, f.pos as u64)),
        }
    }
    loop {
        if let Some(t) = next_convergence(w, f)? {
            return Ok(t);
        }
        events.push(NavEvent::convergence(w.pos as u64, f.pos as u64));
        if let Some(t) = next_divergence(w, f)? {
            return Ok(t);
        }
        events.push(NavEvent::divergence(w.pos as u64, f.pos as u64));
    }
}

/// `Some(terminal)` if an execution ended first, `None` when positioned at a divergence.
fn next_divergence(w: &mut Cursor, f: &mut Cursor) -> Result<Option<Terminal>, BudgetHit> {
    loop {
        both(w.step(), f.step())?;
        if let Some(t) = terminal(w, f) {
            return Ok(Some(t));
        }
        if w.hash() != f.hash() {
            return Ok(None);
        }
    }
}

/// `Some(terminal)` if an execution ended first, `None` when positioned at a convergence.
fn next_convergence(w: &mut Cursor, f: &mut Cursor) -> Result<Option<Terminal>, BudgetHit> {
    loop {
        let (dw, df) = (w.depth(), f.depth());
        if dw > df {
            w.step_until_depth_below(df + 1)?;
        } else if df > dw {
            f.step_until_depth_below(dw + 1)?;
        } else if dw > 1 {
            both(w.step_until_depth_below(dw), f.step_until_depth_below(dw))?;
        } else {
            both(w.step(), f.step())?;
        }
        if let Some(t) = terminal(w, f) {
            return Ok(Some(t));
        }
        if w.depth() == f.depth() && w.hash() == f.hash() {
            return Ok(None);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdm::map::EventKind;

    fn trace(raw: &[(u64, u32)]) -> Trace {
        Trace {
            entries: raw.iter().map(|&(h, d)| TraceEntry::new(h, d)).collect(),
            truncated: false,
        }
    }

    #[test]
    fn identical_traces_have_no_events() {
        let t = trace(&[(1, 1), (2, 2), (3, 1)]);
        let map = analyze_offline(&t, &t).unwrap();
        assert!(map.events.is_empty());
        assert_eq!(map.terminal, Terminal::BothCompleted);
        assert_eq!((map.w_total_steps, map.f_total_steps), (3, 3));
    }

    // Hand-executed: positions 0,1 agree; at 2 (c vs x, both depth 2) they
    // diverge; both finish the depth-2 call at position 4 where e == e.
    #[test]
    fn handcrafted_six_entry_traces() {
        let (a, b, c, d, e, f, x, y) = (10, 11, 12, 13, 14, 15, 20, 21);
        let tw = trace(&[(a, 1), (b, 1), (c, 2), (d, 2), (e, 1), (f, 1)]);
        let tf = trace(&[(a, 1), (b, 1), (x, 2), (y, 2), (e, 1), (f, 1)]);
        let map = analyze_offline(&tw, &tf).unwrap();
        assert_eq!(
            map.events,
            vec![NavEvent::divergence(2, 2), NavEvent::convergence(4, 4)]
        );
        assert_eq!(map.terminal, Terminal::BothCompleted);
    }

    // W is one frame deeper (ordinary call), F already back in the caller
    // (primitive): only W unwinds, and converges on F's current node.
    #[test]
    fn unequal_depth_unwinds_only_the_deeper_side() {
        let tw = trace(&[(1, 1), (2, 1), (30, 2), (31, 2), (4, 1), (5, 1)]);
        let tf = trace(&[(1, 1), (2, 1), (4, 1), (5, 1)]);
        let map = analyze_offline(&tw, &tf).unwrap();
        assert_eq!(
            map.events,
            vec![NavEvent::divergence(2, 2), NavEvent::convergence(4, 2)]
        );
    }

    #[test]
    fn failing_side_ending_first() {
        let tw = trace(&[(1, 1), (2, 2), (3, 2), (4, 1)]);
        let tf = trace(&[(1, 1), (9, 2)]);
        let map = analyze_offline(&tw, &tf).unwrap();
        assert_eq!(map.events, vec![NavEvent::divergence(1, 1)]);
        assert_eq!(map.terminal, Terminal::FailingEnded);
    }

    #[test]
    fn truncated_trace_reports_budget() {
        let mut tw = trace(&[(1, 1), (2, 1), (2, 1), (2, 1)]);
        tw.truncated = true;
        let tf = trace(&[(1, 1), (3, 1), (3, 1), (3, 1), (3, 1), (3, 1)]);
        let map = analyze_offline(&tw, &tf).unwrap();
        assert_eq!(map.terminal, Terminal::Budget);
        assert_eq!(map.events.first().map(|e| e.kind), Some(EventKind::Divergence));
    }

    #[test]
    fn empty_against_nonempty_is_an_error() {
        assert!(matches!(
            analyze_offline(&trace(&[]), &trace(&[(1, 1)])),
            Err(CdmError::EmptyTrace)
        ));
        let map = analyze_offline(&trace(&[]), &trace(&[])).unwrap();
        assert_eq!(map.terminal, Terminal::BothCompleted);
    }
}
