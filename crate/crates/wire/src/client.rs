//! Client side of the protocol, and a [`Debuggee`] backed by it.

use std::io;
use std::time::Duration;

use echo_core::cdm::{Debuggee, Observation};
use echo_core::interp::FrameSummary;
use echo_core::{DebugError, Trace};
use serde::de::DeserializeOwned;
use thiserror::Error;
use ureq::Agent;

use crate::protocol::*;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);
pub const TRACE_TIMEOUT: Duration = Duration::from_secs(600);

/// The server could not be reached or did not speak the protocol.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TransportError {
    #[error("{endpoint}: connection refused ({message})")]
    ConnectionRefused { endpoint: String, message: String },
    #[error("{endpoint}: request timed out")]
    Timeout { endpoint: String },
    #[error("{endpoint}: malformed response ({message})")]
    MalformedResponse { endpoint: String, message: String },
}

impl From<TransportError> for DebugError {
    fn from(e: TransportError) -> Self {
        let (endpoint, message) = match e {
            TransportError::ConnectionRefused { endpoint, message } => {
                (endpoint, format!("connection refused ({message})"))
            }
            TransportError::Timeout { endpoint } => (endpoint, "request timed out".to_string()),
            TransportError::MalformedResponse { endpoint, message } => {
                (endpoint, format!("malformed response ({message})"))
            }
        };
        DebugError::Transport { endpoint, message }
    }
}

fn agent(timeout: Duration) -> Agent {
    Agent::config_builder()
        .timeout_global(Some(timeout))
        .http_status_as_error(false)
        .proxy(None)
        .build()
        .into()
}

/// Blocking client for one debuggee server.
#[derive(Clone, Debug)]
pub struct WireClient {
    endpoint: String,
    agent: Agent,
    trace_agent: Agent,
}

impl WireClient {
    /// `endpoint` is `host:port` or an `http://` URL.
    pub fn new(endpoint: &str) -> Self {
        Self::with_timeouts(endpoint, DEFAULT_TIMEOUT, TRACE_TIMEOUT)
    }

    pub fn with_timeouts(endpoint: &str, timeout: Duration, trace_timeout: Duration) -> Self {
        let endpoint = endpoint.trim_end_matches('/');
        let endpoint = if endpoint.contains("://") {
            endpoint.to_string()
        } else {
            format!("http://{endpoint}")
        };
        WireClient {
            endpoint,
            agent: agent(timeout),
            trace_agent: agent(trace_timeout),
        }
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn transport(&self, e: ureq::Error) -> TransportError {
        let endpoint = self.endpoint.clone();
        match e {
            ureq::Error::Timeout(_) => TransportError::Timeout { endpoint },
            ureq::Error::Io(e) if matches!(e.kind(), io::ErrorKind::TimedOut | io::ErrorKind::WouldBlock) => {
                TransportError::Timeout { endpoint }
            }
            e @ (ureq::Error::Io(_) | ureq::Error::ConnectionFailed | ureq::Error::HostNotFound) => {
                TransportError::ConnectionRefused {
                    endpoint,
                    message: e.to_string(),
                }
            }
            e => TransportError::MalformedResponse {
                endpoint,
                message: e.to_string(),
            },
        }
    }

    fn malformed(&self, message: impl Into<String>) -> TransportError {
        TransportError::MalformedResponse {
            endpoint: self.endpoint.clone(),
            message: message.into(),
        }
    }

    /// `GET /health`.
    pub fn health(&self) -> Result<(), TransportError> {
        let mut resp = self
            .agent
            .get(format!("{}/health", self.endpoint))
            .call()
            .map_err(|e| self.transport(e))?;
        let body = resp.body_mut().read_to_string().map_err(|e| self.transport(e))?;
        match serde_json::from_str::<serde_json::Value>(&body) {
            Ok(v) if v["ok"] == true => Ok(()),
            _ => Err(self.malformed(format!("unexpected health answer: {body}"))),
        }
    }

    /// Send one request and return the server's response, whatever its `ok`.
    pub fn call(&self, req: &WireRequest) -> Result<WireResponse, TransportError> {
        let agent = if req.command == Command::CollectTrace.as_str() {
            &self.trace_agent
        } else {
            &self.agent
        };
        let body = serde_json::to_string(req).expect("request serializes");
        let mut resp = agent
            .post(format!("{}/rpc", self.endpoint))
            .header("Content-Type", "application/json")
            .send(body)
            .map_err(|e| self.transport(e))?;
        if resp.status() != 200 {
            return Err(self.malformed(format!("HTTP status {}", resp.status())));
        }
        let text = resp
            .body_mut()
            .with_config()
            .limit(u64::MAX)
            .read_to_string()
            .map_err(|e| self.transport(e))?;
        serde_json::from_str(&text).map_err(|e| self.malformed(e.to_string()))
    }

    /// Call and decode a successful payload; in-band errors become [`DebugError`]s.
    pub fn request<T: DeserializeOwned>(&self, req: &WireRequest) -> Result<T, DebugError> {
        let resp = self.call(req)?;
        if !resp.ok {
            return Err(in_band_error(resp));
        }
        let payload = resp.payload.unwrap_or(serde_json::Value::Null);
        serde_json::from_value(payload).map_err(|e| self.malformed(format!("bad {} payload: {e}", req.command)).into())
    }
}

fn in_band_error(resp: WireResponse) -> DebugError {
    let Some(err) = resp.error else {
        return DebugError::Remote {
            code: "missing-error".into(),
            message: "ok=false without an error".into(),
        };
    };
    match err.code.as_str() {
        codes::NOT_RUNNING => DebugError::NotRunning,
        codes::NOT_FRESH => DebugError::NotFresh,
        codes::BAD_REQUEST => DebugError::InvalidArgument(err.message),
        codes::STEP_BUDGET_EXCEEDED => {
            match resp
                .payload
                .and_then(|p| serde_json::from_value::<BudgetDocument>(p).ok())
            {
                Some(doc) => DebugError::StepBudgetExceeded {
                    max_steps: doc.max_steps,
                },
                None => DebugError::Remote {
                    code: err.code,
                    message: err.message,
                },
            }
        }
        _ => DebugError::Remote {
            code: err.code,
            message: err.message,
        },
    }
}

/// A debug session living in another process.
#[derive(Clone, Debug)]
pub struct RemoteDebuggee {
    client: WireClient,
}

impl RemoteDebuggee {
    pub fn new(client: WireClient) -> Self {
        RemoteDebuggee { client }
    }

    pub fn connect(endpoint: &str) -> Self {
        Self::new(WireClient::new(endpoint))
    }

    pub fn client(&self) -> &WireClient {
        &self.client
    }

    pub fn endpoint(&self) -> &str {
        self.client.endpoint()
    }

    pub fn status(&self) -> Result<StatusDocument, DebugError> {
        self.client.request(&WireRequest::new(Command::Status))
    }

    pub fn context(&self) -> Result<ContextDocument, DebugError> {
        self.client.request(&WireRequest::new(Command::CurrentNode))
    }

    pub fn stack_depth(&self) -> Result<Option<usize>, DebugError> {
        let doc: StackDepthDocument = self.client.request(&WireRequest::new(Command::StackDepth))?;
        Ok(doc.stack_depth)
    }

    pub fn stack_summary(&self) -> Result<Vec<FrameSummary>, DebugError> {
        let doc: StackSummaryDocument = self.client.request(&WireRequest::new(Command::StackSummary))?;
        Ok(doc.frames)
    }

    pub fn inspect(&self, object_id: u64) -> Result<Vec<FieldDocument>, DebugError> {
        let req = WireRequest::new(Command::Inspect).arg("objectId", object_id);
        let doc: InspectDocument = self.client.request(&req)?;
        Ok(doc.fields)
    }

    /// Collect the full trace of a freshly restarted session.
    pub fn collect_trace(&self, max_steps: Option<u64>) -> Result<Trace, DebugError> {
        let mut req = WireRequest::new(Command::CollectTrace);
        if let Some(n) = max_steps {
            req = req.arg("maxSteps", n);
        }
        let doc: TraceDocument = self.client.request(&req)?;
        doc.decode().map_err(|m| self.client.malformed(m).into())
    }
}

impl Debuggee for RemoteDebuggee {
    fn observe(&mut self) -> Result<Observation, DebugError> {
        Ok(self.context()?.observation())
    }

    fn step(&mut self) -> Result<(), DebugError> {
        self.client
            .request::<StatusDocument>(&WireRequest::new(Command::Step))
            .map(drop)
    }

    fn step_n(&mut self, n: u64) -> Result<(), DebugError> {
        let req = WireRequest::new(Command::StepN).arg("n", n);
        self.client.request::<StatusDocument>(&req).map(drop)
    }

    fn step_until_depth_below(&mut self, target: usize) -> Result<(), DebugError> {
        let req = WireRequest::new(Command::StepUntilDepthBelow).arg("depth", target as u64);
        self.client.request::<StatusDocument>(&req).map(drop)
    }

    fn restart(&mut self) -> Result<(), DebugError> {
        self.client
            .request::<StatusDocument>(&WireRequest::new(Command::Restart))
            .map(drop)
    }
}
