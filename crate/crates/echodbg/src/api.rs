//! Controller HTTP API consumed by the UI.

use std::io;
use std::net::{SocketAddr, TcpListener};
use std::sync::Arc;

use echo_wire::{ServeError, StopHandle};
use serde::Serialize;
use serde_json::{json, Value};
use tiny_http::{Header, Method, Request, Response};

use crate::controller::{Controller, ControllerError, Side};
use crate::ui::INDEX_HTML;

pub struct ApiServer {
    http: Arc<tiny_http::Server>,
    addr: SocketAddr,
    controller: Controller,
}

impl ApiServer {
    pub fn bind(controller: Controller, addr: &str) -> Result<Self, ServeError> {
        let listener = TcpListener::bind(addr).map_err(|source| match source.kind() {
            io::ErrorKind::AddrInUse => ServeError::AddrInUse(addr.to_string()),
            _ => ServeError::Io {
                addr: addr.to_string(),
                source,
            },
        })?;
        let local = listener.local_addr().map_err(|source| ServeError::Io {
            addr: addr.to_string(),
            source,
        })?;
        let http = tiny_http::Server::from_listener(listener, None).map_err(|e| ServeError::Io {
            addr: addr.to_string(),
            source: io::Error::other(e.to_string()),
        })?;
        Ok(ApiServer {
            http: Arc::new(http),
            addr: local,
            controller,
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn stop_handle(&self) -> StopHandle {
        StopHandle::new(self.http.clone())
    }

    /// Serve until stopped. One request at a time, so mutations never overlap.
    pub fn run(mut self) {
        let http = self.http.clone();
        for mut request in http.incoming_requests() {
            let (status, content_type, body) = route(&mut self.controller, &mut request);
            let header = Header::from_bytes("Content-Type", content_type).expect("static header");
            let _ = request.respond(Response::from_string(body).with_status_code(status).with_header(header));
        }
    }

    pub fn spawn(self) -> (SocketAddr, StopHandle, std::thread::JoinHandle<()>) {
        let addr = self.local_addr();
        let stop = self.stop_handle();
        let join = std::thread::spawn(move || self.run());
        (addr, stop, join)
    }
}

const JSON: &str = "application/json";

fn ok(payload: impl Serialize) -> (u16, &'static str, String) {
    (200, JSON, json!({"ok": true, "payload": payload}).to_string())
}

fn err(code: &str, message: impl std::fmt::Display) -> (u16, &'static str, String) {
    (
        200,
        JSON,
        json!({"ok": false, "error": {"code": code, "message": message.to_string()}}).to_string(),
    )
}

fn answer(result: Result<Value, ControllerError>) -> (u16, &'static str, String) {
    match result {
        Ok(v) => ok(v),
        Err(e) => err(e.code(), &e),
    }
}

fn route(c: &mut Controller, request: &mut Request) -> (u16, &'static str, String) {
    let url = request.url().to_string();
    let (path, query) = url.split_once('?').unwrap_or((&url, ""));
    let mut body = String::new();
    if request.as_reader().read_to_string(&mut body).is_err() {
        return err("bad-request", "unreadable body");
    }
    match (request.method(), path) {
        (Method::Get, "/") | (Method::Get, "/index.html") => (200, "text/html; charset=utf-8", INDEX_HTML.to_string()),
        (Method::Get, "/health") => (200, JSON, r#"{"ok":true}"#.to_string()),
        (Method::Get, "/state") => answer(c.state().map(|s| json!(s))),
        (Method::Get, "/map") => ok(c.map()),
        (Method::Get, "/inspect") => inspect(c, query),
        (Method::Post, "/op/step-both") => answer(c.step_both().and_then(|()| with_state(c, json!({})))),
        (Method::Post, "/op/step-to-divergence") => answer(
            c.step_to_divergence()
                .and_then(|o| with_state(c, json!({ "outcome": o }))),
        ),
        (Method::Post, "/op/step-to-convergence") => answer(
            c.step_to_convergence()
                .and_then(|o| with_state(c, json!({ "outcome": o }))),
        ),
        (Method::Post, "/op/restart") => answer(c.restart().and_then(|()| with_state(c, json!({})))),
        (Method::Post, "/op/analyze") => answer(
            c.analyze()
                .map(|m| json!(m))
                .and_then(|m| with_state(c, json!({ "map": m }))),
        ),
        (Method::Post, "/op/goto") => {
            let index = serde_json::from_str::<Value>(&body)
                .ok()
                .and_then(|v| v.get("eventIndex").and_then(Value::as_u64));
            match index {
                None => err("bad-request", "body must be {\"eventIndex\": <non-negative integer>}"),
                Some(i) => answer(c.go_to(i as usize).and_then(|e| with_state(c, json!({ "event": e })))),
            }
        }
        _ => {
            let (_, ct, body) = err("bad-request", format!("no route for {} {path}", request.method()));
            (404, ct, body)
        }
    }
}

fn with_state(c: &Controller, mut payload: Value) -> Result<Value, ControllerError> {
    payload["state"] = json!(c.state()?);
    Ok(payload)
}

fn inspect(c: &Controller, query: &str) -> (u16, &'static str, String) {
    let param = |key: &str| {
        query
            .split('&')
            .filter_map(|kv| kv.split_once('='))
            .find(|(k, _)| *k == key)
            .map(|(_, v)| v)
    };
    let side = match param("side") {
        Some("working") => Side::Working,
        Some("failing") => Side::Failing,
        _ => return err("bad-request", "side must be working or failing"),
    };
    let Some(id) = param("objectId").and_then(|v| v.parse::<u64>().ok()) else {
        return err("bad-request", "objectId must be a non-negative integer");
    };
    answer(c.inspect(side, id).map(|fields| json!({ "fields": fields })))
}
