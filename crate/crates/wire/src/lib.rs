//! JSON-over-HTTP protocol between the controller and the two debuggee
//! servers. Each server owns one debug session and answers `POST /rpc`
//! strictly one request at a time.

pub mod client;
pub mod protocol;
pub mod server;

pub use client::{RemoteDebuggee, TransportError, WireClient};
pub use protocol::{
    codes, Command, ContextDocument, StatusDocument, TraceDocument, WireError, WireRequest, WireResponse,
};
pub use server::{dispatch, DebuggeeServer, ServeError, StopHandle};
