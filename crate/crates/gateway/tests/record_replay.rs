use hapticopter_core::metrics::summarize_trial;
use hapticopter_core::pilot::{PilotKind, PilotParams, PilotPolicy};
use hapticopter_core::runner::LoopConfig;
use hapticopter_core::world::{build_scenario, ScenarioParams, Task};
use hapticopter_gateway::record::{RecordEnd, RecordHeader, RECORD_FORMAT_VERSION};
use hapticopter_gateway::script::run_scripted_session;
use hapticopter_gateway::{replay_session, SessionRecord};

fn scripted(task: Task, kind: PilotKind, seed: u64, seconds: f64) -> hapticopter_gateway::script::ScriptedSession {
    let s = build_scenario(task, &ScenarioParams::default()).unwrap();
    let cfg = LoopConfig::for_scenario(&s, 30.0).unwrap();
    let policy = PilotPolicy {
        kind,
        params: PilotParams::default(),
        seed,
    };
    run_scripted_session(&s, &cfg, &policy, (seconds * 120.0) as u64).unwrap()
}

#[test]
fn ten_second_session_replays_identically() {
    let live = scripted(Task::LateralGate, PilotKind::HapticReactive, 5, 10.0);
    let text = live.record.to_ndjson().unwrap();
    let parsed = SessionRecord::from_ndjson(&text).unwrap();
    assert_eq!(parsed, live.record);
    let replayed = replay_session(&parsed).unwrap();
    assert_eq!(replayed.to_json(), live.log.to_json());
    assert_eq!(live.log.samples.len(), 1200);
}

#[test]
fn record_lines_have_expected_shape() {
    let live = scripted(Task::WallApproach, PilotKind::NoisyDepth, 8, 1.0);
    let text = live.record.to_ndjson().unwrap();
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines[0]["header"]["format_version"], 1);
    assert_eq!(lines[0]["header"]["seed"], 8);
    assert_eq!(lines[0]["header"]["scenario"]["task"], "WallApproach");
    assert_eq!(lines.last().unwrap()["end"]["ticks"], 120);
    for l in &lines[1..lines.len() - 1] {
        assert!(l["tick"].is_u64());
        assert!(l["msg"]["kind"].is_string() && l["msg"]["seq"].is_u64());
    }
    assert_eq!(lines[1]["msg"]["kind"], "ClutchInput");
}

#[test]
fn empty_record_hovers_at_spawn() {
    let s = build_scenario::<f64>(Task::GateCourse, &ScenarioParams::default()).unwrap();
    let record = SessionRecord {
        header: RecordHeader {
            format_version: RECORD_FORMAT_VERSION,
            session: 1,
            seed: 0,
            config: LoopConfig::for_scenario(&s, 10.0).unwrap(),
            scenario: s.clone(),
        },
        entries: vec![],
        end: Some(RecordEnd { ticks: 240 }),
    };
    let log = replay_session(&record).unwrap();
    assert_eq!(log.samples.len(), 240);
    assert!(log.samples.iter().all(|p| p.position.distance(s.spawn) < 0.01 && !p.clutch_engaged));
    assert!(log.events.is_empty());
}

#[test]
fn corrupted_records_name_the_line() {
    let live = scripted(Task::VerticalGate, PilotKind::Waypoint, 2, 0.5);
    let text = live.record.to_ndjson().unwrap();
    let mut lines: Vec<&str> = text.lines().collect();

    let mut broken = lines.clone();
    broken[3] = "{\"tick\": 2, \"msg\": {\"kind\": \"Warp\"}}";
    let e = SessionRecord::from_ndjson(&broken.join("\n")).unwrap_err();
    assert!(e.to_string().contains("line 3"), "{e}");

    lines.pop();
    let e = SessionRecord::from_ndjson(&lines.join("\n")).unwrap_err();
    assert!(e.to_string().contains("end marker"), "{e}");

    assert!(SessionRecord::from_ndjson("").is_err());
    let e = SessionRecord::from_ndjson("{\"end\":{\"ticks\":3}}").unwrap_err();
    assert!(e.to_string().contains("line 0"), "{e}");
}

#[test]
fn twenty_sessions_replay_with_equal_metrics() {
    let tasks = [Task::WallApproach, Task::LateralGate, Task::VerticalGate, Task::GateCourse];
    let kinds = [PilotKind::NoisyDepth, PilotKind::HapticReactive, PilotKind::Waypoint];
    for i in 0..20u64 {
        let (task, kind) = (tasks[i as usize % 4], kinds[i as usize % 3]);
        let live = scripted(task, kind, 1000 + i, 8.0);
        let record = SessionRecord::from_ndjson(&live.record.to_ndjson().unwrap()).unwrap();
        let replayed = replay_session(&record).unwrap();
        assert_eq!(replayed.to_json(), live.log.to_json(), "session {i}");
        let s = &record.header.scenario;
        assert_eq!(summarize_trial(&replayed, s).unwrap(), summarize_trial(&live.log, s).unwrap());
    }
}

#[test]
fn records_round_trip_through_files() {
    let live = scripted(Task::LateralGate, PilotKind::NoisyDepth, 77, 1.0);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.ndjson");
    live.record.save(&path).unwrap();
    assert_eq!(SessionRecord::load(&path).unwrap(), live.record);
}
