//! Echo-debugging controller: drives two debuggee servers, maps their
//! divergences and convergences, and serves the controller API.

pub mod api;
pub mod controller;
pub mod diagnostics;
pub mod ui;

pub use api::ApiServer;
pub use controller::{Controller, ControllerError, SessionState, Side};
