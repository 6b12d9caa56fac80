//! Convergence/divergence mapping between two executions of the same statement.

mod error;
pub mod identity;
mod map;
mod offline;
mod online;

pub use error::CdmError;
pub use identity::{identities_equal, identity_hash, NodeIdentity};
pub use map::{EventKind, NavEvent, NavigationMap, Terminal};
pub use offline::analyze_offline;
pub use online::{
    analyze_online, go_to, step_to_next_convergence, step_to_next_divergence, Debuggee, Observation, Search,
};
