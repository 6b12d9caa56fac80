use std::io::{Read, Write};
use std::net::TcpListener;
use std::time::Duration;

use echo_core::cdm::{analyze_online, Debuggee};
use echo_core::testkit::{fixture_pair, fixture_pairs};
use echo_core::{DebugError, DebugSession};
use echo_wire::protocol::{BudgetDocument, StatusDocument};
use echo_wire::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

struct Served {
    remote: RemoteDebuggee,
    stop: StopHandle,
}

impl Drop for Served {
    fn drop(&mut self) {
        self.stop.stop();
    }
}

fn serve(session: DebugSession) -> Served {
    let server = DebuggeeServer::bind(session, "127.0.0.1:0").unwrap();
    let (addr, stop, _join) = server.spawn();
    Served {
        remote: RemoteDebuggee::connect(&addr.to_string()),
        stop,
    }
}

#[test]
fn status_of_a_fresh_session() {
    let (w, _) = fixture_pair("pillar").sessions();
    let s = serve(w);
    s.remote.client().health().unwrap();
    let resp = s.remote.client().call(&WireRequest::new(Command::Status)).unwrap();
    assert_eq!(
        serde_json::to_value(&resp).unwrap(),
        json!({"ok": true, "payload": {"status": "Ready", "stepCount": 0, "stackDepth": 1}})
    );
}

#[test]
fn unknown_and_malformed_requests_are_answered_in_band() {
    let (w, _) = fixture_pair("pillar").sessions();
    let s = serve(w);
    let resp = s
        .remote
        .client()
        .call(&WireRequest {
            command: "Bogus".into(),
            args: Default::default(),
        })
        .unwrap();
    assert!(!resp.ok);
    assert_eq!(resp.error.unwrap().code, codes::UNKNOWN_COMMAND);
    let resp = s.remote.client().call(&WireRequest::new(Command::StepN)).unwrap();
    assert_eq!(resp.error.unwrap().code, codes::BAD_REQUEST);
    let resp = s
        .remote
        .client()
        .call(&WireRequest::new(Command::Inspect).arg("objectId", 999))
        .unwrap();
    assert_eq!(resp.error.unwrap().code, codes::UNKNOWN_OBJECT);
}

#[test]
fn traces_cross_the_wire_intact() {
    for pair in fixture_pairs() {
        let ((mut local, _), (remote, _)) = (pair.sessions(), pair.sessions());
        let expected = local.collect_full_trace().unwrap();
        let s = serve(remote);
        assert_eq!(s.remote.collect_trace(None).unwrap(), expected, "{}", pair.name);
        // a used session must be restarted first
        let mut r = s.remote.clone();
        r.step().ok();
        assert_eq!(s.remote.collect_trace(None), Err(DebugError::NotFresh));
        r.restart().unwrap();
        assert_eq!(s.remote.collect_trace(None).unwrap(), expected);
    }
}

#[test]
fn collect_trace_honours_max_steps() {
    let (w, _) = fixture_pair("pillar").sessions();
    let s = serve(w);
    let t = s.remote.collect_trace(Some(10)).unwrap();
    assert!(t.truncated);
    assert_eq!(t.len(), 10);
    let mut r = s.remote.clone();
    r.restart().unwrap();
    assert_eq!(s.remote.collect_trace(None).unwrap().len(), 105);
}

#[test]
fn budget_errors_carry_the_budget() {
    let (_, f) = fixture_pair("infinite").sessions();
    let s = serve(f);
    let mut r = s.remote.clone();
    assert_eq!(
        r.step_n(1_000_000),
        Err(DebugError::StepBudgetExceeded { max_steps: 100_000 })
    );
    let resp = s.remote.client().call(&WireRequest::new(Command::Step)).unwrap();
    let err = resp.error.clone().unwrap();
    assert_eq!(err.code, codes::STEP_BUDGET_EXCEEDED);
    let doc: BudgetDocument = serde_json::from_value(resp.payload.unwrap()).unwrap();
    assert_eq!(
        doc,
        BudgetDocument {
            max_steps: 100_000,
            step_count: 100_000
        }
    );
}

/// Apply the same random operations locally and remotely and compare every answer.
#[test]
fn remote_sessions_behave_like_local_ones() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for pair in fixture_pairs() {
        let ((mut local, _), (remote, _)) = (pair.sessions(), pair.sessions());
        let s = serve(remote);
        let mut r = s.remote.clone();
        for _ in 0..60 {
            let (a, b) = match rng.gen_range(0..6) {
                0 => (local.step(), r.step()),
                1 => {
                    let n = rng.gen_range(0..40);
                    (Debuggee::step_n(&mut local, n), r.step_n(n))
                }
                2 => {
                    let d = rng.gen_range(0..4);
                    (
                        Debuggee::step_until_depth_below(&mut local, d),
                        r.step_until_depth_below(d),
                    )
                }
                3 if rng.gen_bool(0.3) => (Debuggee::restart(&mut local), r.restart()),
                _ => (Ok(()), Ok(())),
            };
            assert_eq!(a, b, "{}", pair.name);
            let ctx = s.remote.context().unwrap();
            assert_eq!(ctx.observation(), local.observe().unwrap(), "{}", pair.name);
            assert_eq!(ctx, ContextDocument::of(&local));
            assert_eq!(s.remote.status().unwrap(), StatusDocument::of(&local));
            assert_eq!(s.remote.stack_depth().unwrap(), local.exec().stack_depth());
            assert_eq!(
                s.remote.stack_summary().unwrap(),
                local.exec().call_stack_summary().unwrap_or_default()
            );
            for id in 0..4 {
                let remote_fields = s
                    .remote
                    .inspect(id)
                    .ok()
                    .map(|f| f.into_iter().map(|f| (f.name, f.value)).collect::<Vec<_>>());
                let local_fields = local
                    .exec()
                    .inspect_object(echo_core::interp::ObjectId(id))
                    .ok()
                    .map(|m| m.into_iter().collect::<Vec<_>>());
                assert_eq!(remote_fields, local_fields);
            }
        }
    }
}

#[test]
fn online_mapping_over_the_wire_matches_local() {
    for pair in fixture_pairs() {
        let (mut lw, mut lf) = pair.sessions();
        let expected = analyze_online(&mut lw, &mut lf).unwrap();
        let (w, f) = pair.sessions();
        let (sw, sf) = (serve(w), serve(f));
        let (mut rw, mut rf) = (sw.remote.clone(), sf.remote.clone());
        if pair.name == "infinite" {
            continue; // 100k round trips; covered offline
        }
        assert_eq!(analyze_online(&mut rw, &mut rf).unwrap(), expected, "{}", pair.name);
    }
}

#[test]
fn port_collisions_are_reported() {
    let taken = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = taken.local_addr().unwrap().to_string();
    let (w, _) = fixture_pair("body").sessions();
    assert!(matches!(
        DebuggeeServer::bind(w, addr.as_str()),
        Err(ServeError::AddrInUse(_))
    ));
}

#[test]
fn unreachable_servers_are_transport_errors() {
    let addr = {
        let l = TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap().to_string()
    };
    let client = WireClient::new(&addr);
    assert!(matches!(
        client.call(&WireRequest::new(Command::Status)),
        Err(TransportError::ConnectionRefused { .. })
    ));
    let mut remote = RemoteDebuggee::new(client);
    assert!(matches!(remote.step(), Err(DebugError::Transport { .. })));
}

#[test]
fn silent_servers_time_out() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    let hold = std::thread::spawn(move || {
        let (conn, _) = listener.accept().unwrap();
        std::thread::sleep(Duration::from_millis(1500));
        drop(conn);
    });
    let client = WireClient::with_timeouts(&addr, Duration::from_millis(300), Duration::from_millis(300));
    assert!(matches!(
        client.call(&WireRequest::new(Command::Status)),
        Err(TransportError::Timeout { .. })
    ));
    hold.join().unwrap();
}

#[test]
fn garbage_answers_are_malformed() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    let serve = std::thread::spawn(move || {
        let (mut conn, _) = listener.accept().unwrap();
        let mut buf = [0u8; 4096];
        let _ = conn.read(&mut buf);
        conn.write_all(b"HTTP/1.1 200 OK\r\nContent-Length: 3\r\nConnection: close\r\n\r\nxyz")
            .unwrap();
    });
    let client = WireClient::new(&addr);
    assert!(matches!(
        client.call(&WireRequest::new(Command::Status)),
        Err(TransportError::MalformedResponse { .. })
    ));
    serve.join().unwrap();
}
