use std::fmt::Write;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Divergence,
    Convergence,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Divergence => "divergence",
            EventKind::Convergence => "convergence",
        }
    }
}

/// A divergence or convergence, with the step count each execution took to reach it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NavEvent {
    pub kind: EventKind,
    pub w_steps: u64,
    pub f_steps: u64,
}

impl NavEvent {
    pub fn divergence(w_steps: u64, f_steps: u64) -> Self {
        NavEvent {
            kind: EventKind::Divergence,
            w_steps,
            f_steps,
        }
    }

    pub fn convergence(w_steps: u64, f_steps: u64) -> Self {
        NavEvent {
            kind: EventKind::Convergence,
            w_steps,
            f_steps,
        }
    }
}

/// Why the mapping stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Terminal {
    BothCompleted,
    WorkingEnded,
    FailingEnded,
    Budget,
}

impl Terminal {
    pub fn from_ended(w_ended: bool, f_ended: bool) -> Option<Self> {
        match (w_ended, f_ended) {
            (true, true) => Some(Terminal::BothCompleted),
            (true, false) => Some(Terminal::WorkingEnded),
            (false, true) => Some(Terminal::FailingEnded),
            (false, false) => None,
        }
    }

    fn swapped(self) -> Self {
        match self {
            Terminal::WorkingEnded => Terminal::FailingEnded,
            Terminal::FailingEnded => Terminal::WorkingEnded,
            other => other,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NavigationMap {
    pub events: Vec<NavEvent>,
    pub terminal: Terminal,
    pub w_total_steps: u64,
    pub f_total_steps: u64,
}

impl NavigationMap {
    /// Check alternation (starting with a divergence) and per-column monotonicity.
    ///
    /// Each column never decreases. Both columns strictly increase from a
    /// convergence to the next divergence, and between any two events of the
    /// same kind. From a divergence to its convergence at least one column
    /// increases: when the executions diverge at unequal depths only the
    /// deeper one is stepped.
    pub fn check_invariants(&self) -> Result<(), String> {
        for (i, e) in self.events.iter().enumerate() {
            let expected = if i % 2 == 0 {
                EventKind::Divergence
            } else {
                EventKind::Convergence
            };
            if e.kind != expected {
                return Err(format!(
                    "event {i} is a {} but a {} was expected",
                    e.kind.as_str(),
                    expected.as_str()
                ));
            }
        }
        for (i, pair) in self.events.windows(2).enumerate() {
            let (a, b) = (pair[0], pair[1]);
            let ok = match a.kind {
                EventKind::Convergence => b.w_steps > a.w_steps && b.f_steps > a.f_steps,
                EventKind::Divergence => {
                    b.w_steps >= a.w_steps && b.f_steps >= a.f_steps && (b.w_steps > a.w_steps || b.f_steps > a.f_steps)
                }
            };
            if !ok {
                return Err(format!("step counts do not advance between events {i} and {}", i + 1));
            }
        }
        for (i, pair) in self.events.windows(3).enumerate() {
            if pair[2].w_steps <= pair[0].w_steps || pair[2].f_steps <= pair[0].f_steps {
                return Err(format!(
                    "{}s {i} and {} do not strictly advance",
                    pair[0].kind.as_str(),
                    i + 2
                ));
            }
        }
        if let Some(last) = self.events.last() {
            if last.w_steps > self.w_total_steps || last.f_steps > self.f_total_steps {
                return Err("event beyond the total step counts".into());
            }
        }
        Ok(())
    }

    /// The same map with the working and failing roles exchanged.
    pub fn swapped(&self) -> Self {
        NavigationMap {
            events: self
                .events
                .iter()
                .map(|e| NavEvent {
                    kind: e.kind,
                    w_steps: e.f_steps,
                    f_steps: e.w_steps,
                })
                .collect(),
            terminal: self.terminal.swapped(),
            w_total_steps: self.f_total_steps,
            f_total_steps: self.w_total_steps,
        }
    }

    pub fn divergences(&self) -> impl Iterator<Item = &NavEvent> {
        self.events.iter().filter(|e| e.kind == EventKind::Divergence)
    }

    pub fn convergences(&self) -> impl Iterator<Item = &NavEvent> {
        self.events.iter().filter(|e| e.kind == EventKind::Convergence)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("map serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// Three-column table: kind | working steps | failing steps.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        if self.events.is_empty() {
            out.push_str("no divergences\n");
        } else {
            let _ = writeln!(out, "{:<4} {:<12} {:>12} {:>12}", "#", "kind", "working", "failing");
            for (i, e) in self.events.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{:<4} {:<12} {:>12} {:>12}",
                    i,
                    e.kind.as_str(),
                    e.w_steps,
                    e.f_steps
                );
            }
        }
        let terminal = match self.terminal {
            Terminal::BothCompleted => "both executions ended",
            Terminal::WorkingEnded => "working execution ended first",
            Terminal::FailingEnded => "failing execution ended first",
            Terminal::Budget => "step budget exhausted; map is partial",
        };
        let _ = writeln!(
            out,
            "{terminal} (working {} steps, failing {} steps)",
            self.w_total_steps, self.f_total_steps
        );
        out
    }
}
