mod common;

use std::net::TcpListener;
use std::time::{Duration, Instant};

use common::*;
use echo_core::NavigationMap;

const ENTRY: &str = "PCBTest.new().run()";

#[test]
fn analyze_prints_the_table_and_writes_the_map() {
    let (_w, wu) = serve("pillar_working.echo", ENTRY);
    let (_f, fu) = serve("pillar_failing.echo", ENTRY);
    let out = std::env::temp_dir().join(format!("echodbg-cli-{}.json", std::process::id()));
    let o = run(&[
        "analyze",
        "--working",
        &wu,
        "--failing",
        &fu,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = String::from_utf8(o.stdout).unwrap();
    let first_row = table.lines().nth(1).unwrap();
    assert!(first_row.split_whitespace().nth(1) == Some("divergence"), "{table}");
    let map = NavigationMap::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(map.events.len(), 6);
    std::fs::remove_file(out).ok();
}

#[test]
fn identical_programs_report_no_divergences() {
    let (_w, wu) = serve("pillar_working.echo", ENTRY);
    let (_f, fu) = serve("pillar_working.echo", ENTRY);
    let out = std::env::temp_dir().join(format!("echodbg-same-{}.json", std::process::id()));
    let o = run(&[
        "analyze",
        "--working",
        &wu,
        "--failing",
        &fu,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("no divergences"));
    let map = NavigationMap::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(map.events.is_empty());
    std::fs::remove_file(out).ok();
}

#[test]
fn parse_errors_exit_2() {
    let p = fixture("pillar_working.echo");
    let o = run(&[
        "serve",
        p.to_str().unwrap(),
        "--entry",
        "PCBTest.new(.run()",
        "--port",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("SyntaxError"));
    let bad = std::env::temp_dir().join(format!("echodbg-bad-{}.echo", std::process::id()));
    std::fs::write(&bad, "class A { method m( { } }").unwrap();
    let o = run(&["serve", bad.to_str().unwrap(), "--entry", "1", "--port", "0"]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::remove_file(bad).ok();
}

#[test]
fn port_collision_exits_3() {
    let taken = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = taken.local_addr().unwrap().port().to_string();
    let p = fixture("pillar_working.echo");
    let o = run(&["serve", p.to_str().unwrap(), "--entry", ENTRY, "--port", &port]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn endpoint_down_exits_4_and_names_it() {
    let (_w, wu) = serve("pillar_working.echo", ENTRY);
    let down = {
        let l = TcpListener::bind("127.0.0.1:0").unwrap();
        format!("127.0.0.1:{}", l.local_addr().unwrap().port())
    };
    let o = run(&["analyze", "--working", &wu, "--failing", &down]);
    assert_eq!(o.status.code(), Some(4));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains(&down) && err.contains("failing"), "{err}");
}

#[test]
fn demo_runs_three_processes_and_cleans_up() {
    let (w, f) = (fixture("pillar_working.echo"), fixture("pillar_failing.echo"));
    let mut demo = spawn(&[
        "demo",
        "--working",
        w.to_str().unwrap(),
        "--failing",
        f.to_str().unwrap(),
        "--entry",
        ENTRY,
        "--ui-port",
        "0",
    ]);
    let wu = demo.line().strip_prefix("working debuggee on ").unwrap().to_string();
    let _fu = demo.line();
    let api = loop {
        let line = demo.line();
        if let Some(url) = line.strip_prefix("controller API on ") {
            break url.to_string();
        }
        assert!(!line.is_empty(), "demo exited early");
    };
    let agent: ureq::Agent = ureq::Agent::config_builder().proxy(None).build().into();
    let state = agent
        .get(format!("{api}/map"))
        .call()
        .unwrap()
        .body_mut()
        .read_to_string()
        .unwrap();
    assert!(state.contains("\"divergence\""), "{state}");
    drop(demo);
    // children notice their parent is gone via stdin EOF
    let client = echo_wire::WireClient::new(&wu);
    let deadline = Instant::now() + Duration::from_secs(10);
    while client.health().is_ok() {
        assert!(Instant::now() < deadline, "debuggee outlived the demo");
        std::thread::sleep(Duration::from_millis(50));
    }
}
