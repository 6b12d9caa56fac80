use echo_core::cdm::Debuggee;
use echo_core::testkit::{fixture_pair, fixture_pairs};
use echo_core::trace::{read_trace_file, write_trace_file};
use echo_core::{open_session, DebugError, Status, TraceEntry};

#[test]
fn literal_entry_trace() {
    let mut s = open_session("", "1", 100).unwrap();
    let trace = s.collect_full_trace().unwrap();
    assert!(!trace.truncated);
    assert_eq!(trace.entries, vec![TraceEntry::new(0x5442_b01a_61d4_b7c3, 1)]);
}

#[test]
fn restart_returns_to_the_initial_state() {
    let (mut w, _) = fixture_pair("pillar").sessions();
    let initial = w.observe().unwrap();
    let full = w.collect_full_trace().unwrap();
    for n in [0, 1, 17, 50, 200] {
        w.restart();
        w.step_n(n).unwrap();
        w.restart();
        assert_eq!(w.observe().unwrap(), initial);
        assert_eq!(w.collect_full_trace().unwrap(), full);
    }
}

#[test]
fn traces_are_only_collected_from_a_fresh_session() {
    let (mut w, _) = fixture_pair("pillar").sessions();
    w.step().unwrap();
    assert_eq!(w.collect_full_trace(), Err(DebugError::NotFresh));
}

#[test]
fn step_until_depth_below() {
    let (mut w, _) = fixture_pair("pillar").sessions();
    assert!(matches!(
        w.step_until_depth_below(0),
        Err(DebugError::InvalidArgument(_))
    ));
    // already shallower than the target: no-op
    w.step_until_depth_below(5).unwrap();
    assert_eq!(w.step_count(), 0);
    while w.exec().stack_depth() != Some(3) {
        w.step().unwrap();
    }
    w.step_until_depth_below(3).unwrap();
    assert_eq!(w.exec().stack_depth(), Some(2));
    // running off the end is not an error
    w.step_until_depth_below(1).unwrap();
    assert_eq!(w.status(), Status::Completed);
    assert_eq!(w.step(), Err(DebugError::NotRunning));
}

#[test]
fn step_n_stops_at_the_end() {
    let (_, mut f) = fixture_pair("body").sessions();
    f.step_n(1_000).unwrap();
    assert_eq!(f.step_count(), 10);
    assert_eq!(f.status(), Status::Completed);
}

#[test]
fn infinite_loop_hits_the_budget() {
    let pair = fixture_pair("infinite");
    assert_eq!(pair.budget, 100_000);
    let (_, mut f) = pair.sessions();
    assert_eq!(
        f.step_n(u64::MAX),
        Err(DebugError::StepBudgetExceeded { max_steps: 100_000 })
    );
    assert_eq!(f.step_count(), 100_000);
    assert_eq!(f.status(), Status::Running);
    assert!(f.step().is_err());
    assert_eq!(f.step_count(), 100_000);

    let (_, mut f) = pair.sessions();
    let trace = f.collect_full_trace().unwrap();
    assert!(trace.truncated);
    assert_eq!(trace.len(), 100_000);
}

#[test]
fn replayed_steps_match_the_trace() {
    for pair in fixture_pairs() {
        let (mut w, _) = pair.sessions();
        let trace = w.collect_full_trace().unwrap();
        let len = trace.len() as u64;
        for n in [0, 1, len / 3, len / 2, len.saturating_sub(1)] {
            w.restart();
            w.step_n(n).unwrap();
            let node = w.exec().current_node().unwrap();
            let entry = trace.entries[n as usize];
            assert_eq!(node.identity_hash(), entry.identity_hash, "{} at {n}", pair.name);
            assert_eq!(w.exec().stack_depth(), Some(entry.stack_depth as usize));
            assert_eq!(node.identity().hash64(), entry.identity_hash);
        }
    }
}

#[test]
fn trace_files_round_trip() {
    let (mut w, _) = fixture_pair("pillar").sessions();
    let trace = w.collect_full_trace().unwrap();
    let mut buf = Vec::new();
    write_trace_file(&mut buf, &trace.entries).unwrap();
    assert_eq!(read_trace_file(&buf[..]).unwrap(), trace.entries);
}
