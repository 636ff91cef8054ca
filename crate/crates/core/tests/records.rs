use hapticopter_core::harness::{run_trial, ExperimentConfig};
use hapticopter_core::metrics::{path_length, read_results, summarize_trial, write_results, ResultRow};
use hapticopter_core::pilot::{PilotKind, PilotParams};
use hapticopter_core::trial::TrialLog;
use hapticopter_core::world::{build_scenario, ScenarioParams, Task};
use hapticopter_core::Vec3;
use proptest::prelude::*;

type V = Vec3<f64>;

fn point() -> impl Strategy<Value = V> {
    (-10.0f64..10.0, -10.0f64..10.0, -10.0f64..10.0).prop_map(|(x, y, z)| V::new(x, y, z))
}

proptest! {
    #[test]
    fn path_length_is_superadditive(a in proptest::collection::vec(point(), 0..30), b in proptest::collection::vec(point(), 0..30)) {
        let joined = path_length(a.iter().chain(&b).copied());
        let (la, lb) = (path_length(a.iter().copied()), path_length(b.iter().copied()));
        prop_assert!(joined + 1e-9 >= la.max(lb));
        prop_assert!(joined + 1e-9 >= la + lb);
    }

    #[test]
    fn results_csv_round_trips(
        rows in proptest::collection::vec(
            (0usize..100, any::<u64>(), any::<bool>(), 0.0f64..60.0, 0.0f64..50.0, 0usize..9,
             proptest::option::of(-1.0f64..3.0), proptest::option::of(point())),
            1..20,
        )
    ) {
        let rows: Vec<ResultRow> = rows
            .into_iter()
            .map(|(trial, seed, completed, t, d, c, w, x)| ResultRow {
                trial,
                task: "LateralGate".into(),
                policy: "haptic_reactive".into(),
                seed,
                completed,
                time_s: t,
                distance_m: d,
                collisions: c,
                min_wall_dist_m: w,
                cross_x: x.map(|p| p.x),
                cross_y: x.map(|p| p.y),
                cross_z: x.map(|p| p.z),
            })
            .collect();
        let mut buf = Vec::new();
        write_results(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        prop_assert!(text.starts_with(
            "trial,task,policy,seed,completed,time_s,distance_m,collisions,min_wall_dist_m,cross_x,cross_y,cross_z\n"
        ));
        prop_assert_eq!(read_results(buf.as_slice()).unwrap(), rows);
    }
}

#[test]
fn straight_traverse_length() {
    let pts = (0..=300).map(|k| V::new(k as f64 / 100.0, 0.0, 1.0));
    assert!((path_length(pts) - 3.0).abs() < 1e-9);
}

#[test]
fn wrong_header_is_rejected() {
    assert!(read_results("a,b\n1,2\n".as_bytes()).is_err());
}

#[test]
fn trial_log_json_round_trips_bit_exactly() {
    let s = build_scenario::<f64>(Task::VerticalGate, &ScenarioParams::default()).unwrap();
    let c = ExperimentConfig::new(s, PilotKind::HapticReactive, PilotParams::default(), 99, 1).unwrap();
    let r = run_trial(&c, 0).unwrap();
    let json = r.log.to_json();
    let back: TrialLog<f64> = serde_json::from_str(&json).unwrap();
    assert_eq!(back, r.log);
    assert_eq!(back.to_json(), json);
    assert_eq!(summarize_trial(&back, &c.scenario).unwrap(), summarize_trial(&r.log, &c.scenario).unwrap());

    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    for e in v["events"].as_array().unwrap() {
        assert!(e.get("time").is_some() && e.get("kind").is_some(), "{e}");
    }
}
