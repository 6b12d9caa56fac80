use echo_core::testkit::{fixture_pair, Pair};
use echo_wire::{DebuggeeServer, StopHandle};
use echodbg::{ApiServer, Controller};
use serde_json::{json, Value};

struct Rig {
    base: String,
    stops: Vec<StopHandle>,
}

impl Drop for Rig {
    fn drop(&mut self) {
        for s in &self.stops {
            s.stop();
        }
    }
}

fn rig(pair: &Pair) -> Rig {
    let (w, f) = pair.sessions();
    let (wa, ws, _) = DebuggeeServer::bind(w, "127.0.0.1:0").unwrap().spawn();
    let (fa, fs, _) = DebuggeeServer::bind(f, "127.0.0.1:0").unwrap().spawn();
    let controller = Controller::connect(&wa.to_string(), &fa.to_string(), None).unwrap();
    let (aa, as_, _) = ApiServer::bind(controller, "127.0.0.1:0").unwrap().spawn();
    Rig {
        base: format!("http://{aa}"),
        stops: vec![ws, fs, as_],
    }
}

fn agent() -> ureq::Agent {
    ureq::Agent::config_builder()
        .http_status_as_error(false)
        .proxy(None)
        .build()
        .into()
}

impl Rig {
    fn get(&self, path: &str) -> Value {
        let mut resp = agent().get(format!("{}{path}", self.base)).call().unwrap();
        serde_json::from_str(&resp.body_mut().read_to_string().unwrap()).unwrap()
    }

    fn post(&self, path: &str, body: Value) -> Value {
        let mut resp = agent()
            .post(format!("{}{path}", self.base))
            .header("Content-Type", "application/json")
            .send(body.to_string())
            .unwrap();
        serde_json::from_str(&resp.body_mut().read_to_string().unwrap()).unwrap()
    }

    fn ok(&self, path: &str, body: Value) -> Value {
        let v = self.post(path, body);
        assert_eq!(v["ok"], true, "{path}: {v}");
        v["payload"].clone()
    }
}

fn quadruple(pane: &Value) -> Value {
    let c = &pane["context"];
    json!([c["className"], c["selector"], c["nodeType"], c["sourceText"]])
}

#[test]
fn fresh_session_is_convergent() {
    let r = rig(&fixture_pair("pillar"));
    let state = r.get("/state");
    assert_eq!(state["ok"], true);
    let s = &state["payload"];
    assert_eq!(s["convergent"], true);
    assert_eq!(s["hasMap"], false);
    assert_eq!(quadruple(&s["working"]), quadruple(&s["failing"]));
    assert_eq!(s["working"]["context"]["stepCount"], 0);
    assert_eq!(s["working"]["stack"].as_array().unwrap().len(), 1);
    assert_eq!(r.get("/map")["payload"], Value::Null);
}

#[test]
fn stepping_to_the_first_divergence() {
    let r = rig(&fixture_pair("pillar"));
    let p = r.ok("/op/step-to-divergence", json!({}));
    assert_eq!(
        p["outcome"]["event"],
        json!({"kind": "divergence", "wSteps": 17, "fSteps": 17})
    );
    let s = &p["state"];
    assert_eq!(s["convergent"], false);
    assert_eq!(s["working"]["context"]["selector"], "methodMissing::");
    assert_eq!(s["failing"]["context"]["selector"], "mySetting:");
    assert_eq!(
        r.post("/op/step-to-divergence", json!({}))["error"]["code"],
        "not-convergent"
    );
    let p = r.ok("/op/step-to-convergence", json!({}));
    assert_eq!(
        p["outcome"]["event"],
        json!({"kind": "convergence", "wSteps": 34, "fSteps": 21})
    );
    assert_eq!(p["state"]["convergent"], true);
    let p = r.ok("/op/restart", json!({}));
    assert_eq!(p["state"]["working"]["context"]["stepCount"], 0);
}

#[test]
fn analyze_then_goto_every_event() {
    let r = rig(&fixture_pair("pillar"));
    assert_eq!(r.post("/op/goto", json!({"eventIndex": 0}))["error"]["code"], "no-map");
    let map = r.ok("/op/analyze", json!({}))["map"].clone();
    assert_eq!(r.get("/map")["payload"], map);
    let events = map["events"].as_array().unwrap();
    assert_eq!(events.len(), 6);
    for (i, e) in events.iter().enumerate() {
        let p = r.ok("/op/goto", json!({ "eventIndex": i }));
        let s = &p["state"];
        assert_eq!(s["working"]["context"]["stepCount"], e["wSteps"]);
        assert_eq!(s["failing"]["context"]["stepCount"], e["fSteps"]);
        if e["kind"] == "divergence" {
            assert_eq!(s["convergent"], false);
            assert_ne!(quadruple(&s["working"]), quadruple(&s["failing"]));
        } else {
            assert_eq!(s["convergent"], true);
            assert_eq!(
                s["working"]["context"]["stackDepth"],
                s["failing"]["context"]["stackDepth"]
            );
        }
    }
    assert_eq!(
        r.post("/op/goto", json!({"eventIndex": 6}))["error"]["code"],
        "bad-request"
    );
    assert_eq!(r.post("/op/goto", json!({"index": 0}))["error"]["code"], "bad-request");
}

#[test]
fn convergence_flag_tracks_identity_equality() {
    let r = rig(&fixture_pair("wrapper"));
    loop {
        let v = r.post("/op/step-both", json!({}));
        if v["ok"] == false {
            assert_eq!(v["error"]["code"], "not-running");
            break;
        }
        let s = &v["payload"]["state"];
        let both_live =
            !s["working"]["context"]["className"].is_null() && !s["failing"]["context"]["className"].is_null();
        let equal = both_live && quadruple(&s["working"]) == quadruple(&s["failing"]);
        assert_eq!(s["convergent"], equal);
    }
}

#[test]
fn inspect_and_misc_routes() {
    let r = rig(&fixture_pair("pillar"));
    r.ok("/op/analyze", json!({}));
    r.ok("/op/goto", json!({"eventIndex": 5}));
    let fields = r.get("/inspect?side=failing&objectId=1");
    assert_eq!(
        fields["payload"]["fields"],
        json!([{"name": "parentConfig", "value": "nil"}, {"name": "props", "value": "2@PCBDict"}, {"name": "mySetting", "value": "0"}])
    );
    assert_eq!(r.get("/inspect?side=both&objectId=1")["error"]["code"], "bad-request");
    assert_eq!(
        r.get("/inspect?side=working&objectId=99")["error"]["code"],
        "unknown-object"
    );
    assert_eq!(r.get("/nope")["ok"], false);
    let mut resp = agent().get(format!("{}/", r.base)).call().unwrap();
    assert!(resp.body_mut().read_to_string().unwrap().contains("echodbg"));
}
