//! Debuggee server: one session, one request at a time.

use std::io;
use std::net::{SocketAddr, TcpListener, ToSocketAddrs};
use std::sync::Arc;

use echo_core::{DebugError, DebugSession};
use serde_json::Value;
use thiserror::Error;
use tiny_http::{Header, Method, Response};

use crate::protocol::*;

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("address {0} is already in use")]
    AddrInUse(String),
    #[error("cannot listen on {addr}: {source}")]
    Io { addr: String, source: io::Error },
}

/// Answer one request against `session`. Never panics on bad input.
pub fn dispatch(session: &mut DebugSession, req: &WireRequest) -> WireResponse {
    let Some(command) = Command::parse(&req.command) else {
        return WireResponse::failure(codes::UNKNOWN_COMMAND, format!("unknown command `{}`", req.command));
    };
    run(session, command, req).unwrap_or_else(|failure| failure)
}

fn run(session: &mut DebugSession, command: Command, req: &WireRequest) -> Result<WireResponse, WireResponse> {
    Ok(match command {
        Command::Status => WireResponse::success(StatusDocument::of(session)),
        Command::Step => {
            session.step().map_err(|e| debug_error(session, e))?;
            WireResponse::success(StatusDocument::of(session))
        }
        Command::StepN => {
            let n = u64_arg(req, "n")?;
            session.step_n(n).map_err(|e| debug_error(session, e))?;
            WireResponse::success(StatusDocument::of(session))
        }
        Command::Restart => {
            session.restart();
            WireResponse::success(StatusDocument::of(session))
        }
        Command::CurrentNode => WireResponse::success(ContextDocument::of(session)),
        Command::StackDepth => WireResponse::success(StackDepthDocument {
            stack_depth: session.exec().stack_depth(),
        }),
        Command::StackSummary => WireResponse::success(StackSummaryDocument {
            frames: session.exec().call_stack_summary().unwrap_or_default(),
        }),
        Command::Inspect => {
            let id = u64_arg(req, "objectId")?;
            let fields = session
                .exec()
                .inspect_object(echo_core::interp::ObjectId(id))
                .map_err(|e| WireResponse::failure(codes::UNKNOWN_OBJECT, e.to_string()))?;
            WireResponse::success(InspectDocument {
                fields: fields
                    .into_iter()
                    .map(|(name, value)| FieldDocument { name, value })
                    .collect(),
            })
        }
        Command::StepUntilDepthBelow => {
            let depth = u64_arg(req, "depth")?;
            session
                .step_until_depth_below(depth as usize)
                .map_err(|e| debug_error(session, e))?;
            WireResponse::success(StatusDocument::of(session))
        }
        Command::CollectTrace => {
            let budget = match req.args.get("maxSteps") {
                None | Some(Value::Null) => None,
                Some(_) => Some(u64_arg(req, "maxSteps")?),
            };
            let saved = session.max_steps();
            if let Some(b) = budget {
                session.set_max_steps(b);
            }
            let trace = session.collect_full_trace();
            session.set_max_steps(saved);
            let trace = trace.map_err(|e| debug_error(session, e))?;
            WireResponse::success(TraceDocument::encode(&trace))
        }
    })
}

fn u64_arg(req: &WireRequest, key: &str) -> Result<u64, WireResponse> {
    req.args.get(key).and_then(Value::as_u64).ok_or_else(|| {
        WireResponse::failure(
            codes::BAD_REQUEST,
            format!("{} needs a non-negative integer `{key}`", req.command),
        )
    })
}

fn debug_error(session: &DebugSession, e: DebugError) -> WireResponse {
    match e {
        DebugError::StepBudgetExceeded { max_steps } => {
            WireResponse::failure(codes::STEP_BUDGET_EXCEEDED, e.to_string()).with_payload(BudgetDocument {
                max_steps,
                step_count: session.step_count(),
            })
        }
        DebugError::NotRunning => WireResponse::failure(codes::NOT_RUNNING, e.to_string()),
        DebugError::NotFresh => WireResponse::failure(codes::NOT_FRESH, e.to_string()),
        DebugError::InvalidArgument(message) => WireResponse::failure(codes::BAD_REQUEST, message),
        other => WireResponse::failure(codes::BAD_REQUEST, other.to_string()),
    }
}

/// Stops a running [`DebuggeeServer`] from another thread.
#[derive(Clone)]
pub struct StopHandle(Arc<tiny_http::Server>);

impl StopHandle {
    pub fn new(server: Arc<tiny_http::Server>) -> Self {
        StopHandle(server)
    }

    pub fn stop(&self) {
        self.0.unblock();
    }
}

pub struct DebuggeeServer {
    http: Arc<tiny_http::Server>,
    addr: SocketAddr,
    session: DebugSession,
}

impl DebuggeeServer {
    pub fn bind(session: DebugSession, addr: impl ToSocketAddrs + std::fmt::Display) -> Result<Self, ServeError> {
        let shown = addr.to_string();
        let listener = TcpListener::bind(&addr).map_err(|source| match source.kind() {
            io::ErrorKind::AddrInUse => ServeError::AddrInUse(shown.clone()),
            _ => ServeError::Io {
                addr: shown.clone(),
                source,
            },
        })?;
        let addr = listener.local_addr().map_err(|source| ServeError::Io {
            addr: shown.clone(),
            source,
        })?;
        let http = tiny_http::Server::from_listener(listener, None).map_err(|e| ServeError::Io {
            addr: shown,
            source: io::Error::other(e.to_string()),
        })?;
        Ok(DebuggeeServer {
            http: Arc::new(http),
            addr,
            session,
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn stop_handle(&self) -> StopHandle {
        StopHandle(self.http.clone())
    }

    /// Serve until stopped. Requests are handled strictly in arrival order.
    pub fn run(mut self) {
        let http = self.http.clone();
        for mut request in http.incoming_requests() {
            let (status, body) = route(&mut self.session, &mut request);
            let header = Header::from_bytes("Content-Type", "application/json").expect("static header");
            let response = Response::from_string(body).with_status_code(status).with_header(header);
            // the client may have given up; nothing to do about it
            let _ = request.respond(response);
        }
    }

    /// Serve on a background thread.
    pub fn spawn(self) -> (SocketAddr, StopHandle, std::thread::JoinHandle<()>) {
        let addr = self.local_addr();
        let stop = self.stop_handle();
        let join = std::thread::spawn(move || self.run());
        (addr, stop, join)
    }
}

fn route(session: &mut DebugSession, request: &mut tiny_http::Request) -> (u16, String) {
    match (request.method(), request.url()) {
        (Method::Get, "/health") => (200, r#"{"ok":true}"#.to_string()),
        (Method::Post, "/rpc") => {
            let mut body = String::new();
            let resp = match request.as_reader().read_to_string(&mut body) {
                Err(e) => WireResponse::failure(codes::BAD_REQUEST, format!("unreadable body: {e}")),
                Ok(_) => match serde_json::from_str::<WireRequest>(&body) {
                    Ok(req) => dispatch(session, &req),
                    Err(e) => WireResponse::failure(codes::BAD_REQUEST, format!("malformed request: {e}")),
                },
            };
            (200, serde_json::to_string(&resp).expect("response serializes"))
        }
        _ => {
            let resp = WireResponse::failure(codes::BAD_REQUEST, "only POST /rpc and GET /health are served");
            (404, serde_json::to_string(&resp).expect("response serializes"))
        }
    }
}
