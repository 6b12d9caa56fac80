//! Request/response documents exchanged on `POST /rpc`.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use echo_core::cdm::{NodeIdentity, Observation};
use echo_core::interp::{FrameSummary, Status};
use echo_core::trace::{pack_entries, unpack_entries, Trace};
use echo_core::DebugSession;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub mod codes {
    pub const UNKNOWN_COMMAND: &str = "unknown-command";
    pub const BAD_REQUEST: &str = "bad-request";
    pub const NOT_RUNNING: &str = "not-running";
    pub const STEP_BUDGET_EXCEEDED: &str = "step-budget-exceeded";
    pub const UNKNOWN_OBJECT: &str = "unknown-object";
    pub const NOT_FRESH: &str = "not-fresh";
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Command {
    Status,
    Step,
    StepN,
    Restart,
    CurrentNode,
    StackDepth,
    StackSummary,
    Inspect,
    StepUntilDepthBelow,
    CollectTrace,
}

impl Command {
    pub const ALL: [Command; 10] = [
        Command::Status,
        Command::Step,
        Command::StepN,
        Command::Restart,
        Command::CurrentNode,
        Command::StackDepth,
        Command::StackSummary,
        Command::Inspect,
        Command::StepUntilDepthBelow,
        Command::CollectTrace,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Status => "Status",
            Command::Step => "Step",
            Command::StepN => "StepN",
            Command::Restart => "Restart",
            Command::CurrentNode => "CurrentNode",
            Command::StackDepth => "StackDepth",
            Command::StackSummary => "StackSummary",
            Command::Inspect => "Inspect",
            Command::StepUntilDepthBelow => "StepUntilDepthBelow",
            Command::CollectTrace => "CollectTrace",
        }
    }

    pub fn parse(s: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

/// The command is kept as a string so unknown commands can be answered in-band.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireRequest {
    pub command: String,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub args: Map<String, Value>,
}

impl WireRequest {
    pub fn new(command: Command) -> Self {
        WireRequest {
            command: command.as_str().to_string(),
            args: Map::new(),
        }
    }

    pub fn arg(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.args.insert(key.to_string(), value.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireError {
    pub code: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireResponse {
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<WireError>,
}

impl WireResponse {
    pub fn success(payload: impl Serialize) -> Self {
        WireResponse {
            ok: true,
            payload: Some(serde_json::to_value(payload).expect("payload serializes")),
            error: None,
        }
    }

    pub fn failure(code: &str, message: impl Into<String>) -> Self {
        WireResponse {
            ok: false,
            payload: None,
            error: Some(WireError {
                code: code.to_string(),
                message: message.into(),
            }),
        }
    }

    pub fn with_payload(mut self, payload: impl Serialize) -> Self {
        self.payload = Some(serde_json::to_value(payload).expect("payload serializes"));
        self
    }
}

/// Payload of `Status` and of every stepping command.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StatusDocument {
    pub status: Status,
    pub step_count: u64,
    pub stack_depth: Option<usize>,
}

impl StatusDocument {
    pub fn of(session: &DebugSession) -> Self {
        StatusDocument {
            status: session.status(),
            step_count: session.step_count(),
            stack_depth: session.exec().stack_depth(),
        }
    }
}

/// The execution context, flattened to plain scalars. The node fields are
/// null once the execution has ended.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ContextDocument {
    pub class_name: Option<String>,
    pub selector: Option<String>,
    pub node_type: Option<String>,
    pub source_text: Option<String>,
    pub span_start: Option<usize>,
    pub span_end: Option<usize>,
    pub stack_depth: Option<usize>,
    pub step_count: u64,
    pub status: Status,
}

impl ContextDocument {
    pub fn of(session: &DebugSession) -> Self {
        let exec = session.exec();
        let node = exec.current_node();
        ContextDocument {
            class_name: node.map(|n| n.code.owner_class.to_string()),
            selector: node.map(|n| n.code.owner_selector.to_string()),
            node_type: node.map(|n| n.node().node_type.as_str().to_string()),
            source_text: node.map(|n| n.node().source_text.clone()),
            span_start: node.map(|n| n.node().span.start),
            span_end: node.map(|n| n.node().span.end),
            stack_depth: exec.stack_depth(),
            step_count: exec.step_count(),
            status: exec.status(),
        }
    }

    pub fn identity(&self) -> Option<NodeIdentity> {
        Some(NodeIdentity {
            class_name: self.class_name.clone()?,
            method_selector: self.selector.clone()?,
            node_type: self.node_type.clone()?,
            source_text: self.source_text.clone()?,
        })
    }

    pub fn observation(&self) -> Observation {
        Observation {
            step_count: self.step_count,
            status: self.status,
            current: self.identity().zip(self.stack_depth),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackSummaryDocument {
    /// Root frame first; empty once the execution has ended.
    pub frames: Vec<FrameSummary>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StackDepthDocument {
    pub stack_depth: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDocument {
    pub name: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InspectDocument {
    /// In declaration order for objects, insertion order for dictionaries.
    pub fields: Vec<FieldDocument>,
}

/// Payload attached to a `step-budget-exceeded` error.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BudgetDocument {
    pub max_steps: u64,
    pub step_count: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceDocument {
    pub truncated: bool,
    /// Base64 of the packed little-endian `(u64, u32)` entries.
    pub entries: String,
}

impl TraceDocument {
    pub fn encode(trace: &Trace) -> Self {
        TraceDocument {
            truncated: trace.truncated,
            entries: STANDARD.encode(pack_entries(&trace.entries)),
        }
    }

    pub fn decode(&self) -> Result<Trace, String> {
        let bytes = STANDARD.decode(&self.entries).map_err(|e| format!("bad base64: {e}"))?;
        let entries = unpack_entries(&bytes).map_err(|e| e.to_string())?;
        Ok(Trace {
            entries,
            truncated: self.truncated,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use echo_core::TraceEntry;

    #[test]
    fn one_entry_trace_encoding() {
        let trace = Trace {
            entries: vec![TraceEntry::new(1, 2)],
            truncated: false,
        };
        // 01 00 00 00 00 00 00 00 | 02 00 00 00
        let doc = TraceDocument::encode(&trace);
        assert_eq!(doc.entries, "AQAAAAAAAAACAAAA");
        assert_eq!(doc.decode().unwrap(), trace);
    }

    #[test]
    fn commands_round_trip_through_names() {
        for c in Command::ALL {
            assert_eq!(Command::parse(c.as_str()), Some(c));
        }
        assert_eq!(Command::parse("Bogus"), None);
    }

    #[test]
    fn request_args_are_optional() {
        let req: WireRequest = serde_json::from_str(r#"{"command":"Status"}"#).unwrap();
        assert_eq!(req, WireRequest::new(Command::Status));
        assert_eq!(serde_json::to_string(&req).unwrap(), r#"{"command":"Status"}"#);
    }
}
