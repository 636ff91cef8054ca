//! End-to-end acceptance checks. Each criterion is evaluated at its stated
//! tolerance and runtime budget; one PASS/FAIL line is printed per criterion
//! and the test fails if any of them does.

use std::time::{Duration, Instant};

use hapticopter_core::harness::{results_table, run_experiment, ExperimentConfig};
use hapticopter_core::haptics::{cue_from_ranges, pulse_schedule, CueParams};
use hapticopter_core::metrics::{summarize_trial, ResultRow};
use hapticopter_core::pilot::{PilotKind, PilotParams, PilotPolicy};
use hapticopter_core::runner::LoopConfig;
use hapticopter_core::sensing::{raycast_range, sense_six, Direction, RangeReading};
use hapticopter_core::sim::{sim_tick, DroneState, PidGains, PidState, SimConfig};
use hapticopter_core::stats::{kruskal_wallis, levene, ConfusionMatrix, CueTrial, LeveneCenter, TABLE_ORDER};
use hapticopter_core::teleop::{clutch_transition, map_hand_to_goal, ClutchMode, ClutchState, HandPose, MappingConfig};
use hapticopter_core::world::{build_scenario, Aabb, ScenarioParams, Task, World};
use hapticopter_core::Vec3;
use hapticopter_gateway::script::run_scripted_session;
use hapticopter_gateway::{replay_session, SessionRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Deserialize;

type V = Vec3<f64>;
type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn room() -> Aabb<f64> {
    Aabb {
        min: V::new(-5.0, -5.0, 0.0),
        max: V::new(5.0, 5.0, 4.0),
    }
}

fn cue_law() -> Outcome {
    let p = CueParams::<f64>::default();
    ensure(p.max_intensity == 1.0 && p.threshold == 0.5, || format!("defaults {p:?}"))?;
    let reading = RangeReading {
        distances: [0.5, 1.0, 0.25, 4.0, 0.5, 0.5],
        max_range: 4.0,
    };
    let cue = cue_from_ranges(&reading, &p).map_err(|e| e.to_string())?;
    for (got, want) in cue.intensities[..4].iter().zip([1.0, 0.5, 1.0, 0.0]) {
        ensure((got - want).abs() <= 1e-12, || format!("intensities {:?}", cue.intensities))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let (a, b): (f64, f64) = (rng.random_range(0.0..6.0), rng.random_range(0.0..6.0));
        let (near, far) = if a <= b { (a, b) } else { (b, a) };
        let (i_near, i_far) = (p.intensity(near).unwrap(), p.intensity(far).unwrap());
        ensure(i_near >= i_far, || format!("i({near}) = {i_near} < i({far}) = {i_far}"))?;
    }
    Ok("reference points exact, 1000 pairs monotone".into())
}

fn mapping() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let hand = |rng: &mut ChaCha8Rng| V::new(rng.random_range(-0.55..0.55), rng.random_range(-0.55..0.55), rng.random_range(0.04..0.47));
    let engaged = ClutchState {
        engaged: true,
        ..ClutchState::released(ClutchMode::Absolute)
    };
    for (cfg, scale) in [
        (MappingConfig::simulation(&room()).unwrap(), 8.0),
        (MappingConfig::hardware(&room()).unwrap(), 6.0),
    ] {
        for _ in 0..1000 {
            let h = hand(&mut rng);
            let g = map_hand_to_goal(&HandPose::new(h, 0.0), &engaged, &cfg, V::zero());
            let err = [g.x - scale * h.x, g.y - scale * h.y, g.z - scale * h.z];
            ensure(err.iter().all(|e| e.abs() <= 1e-12), || format!("scale {scale}: {h:?} -> {g:?}"))?;
        }
    }

    for mode in [ClutchMode::Absolute, ClutchMode::Relative] {
        let cfg = MappingConfig::simulation(&room()).unwrap().with_mode(mode);
        let released = ClutchState::released(mode);
        for _ in 0..100 {
            let g0 = V::new(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0), rng.random_range(0.3..3.7));
            let mut g = g0;
            for k in 0..100 {
                let h = V::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
                g = map_hand_to_goal(&HandPose::new(h, k as f64 / 120.0), &released, &cfg, g);
                ensure(g == g0, || format!("{mode:?}: released goal moved {g0:?} -> {g:?}"))?;
            }
        }
    }

    let cfg = MappingConfig::simulation(&room()).unwrap().with_mode(ClutchMode::Relative);
    let mut clutch = ClutchState::released(ClutchMode::Relative);
    let mut goal = V::new(0.0, 0.0, 1.2);
    let mut engages = 0;
    while engages < 1000 {
        let h = HandPose::new(V::new(rng.random_range(-0.6..0.6), rng.random_range(-0.6..0.6), rng.random_range(0.0..0.5)), 0.0);
        let press = rng.random_bool(0.5);
        let was = clutch.engaged;
        clutch = clutch_transition(&clutch, press, &h, goal);
        let next = map_hand_to_goal(&h, &clutch, &cfg, goal);
        if press && !was {
            engages += 1;
            ensure(next == goal, || format!("engage jumped {goal:?} -> {next:?}"))?;
        }
        goal = next;
    }
    Ok("scale 8 and 6 exact, released streams inert, 1000 engages without jump".into())
}

fn fly(start: V, goal: V, seconds: f64) -> Vec<DroneState<f64>> {
    let w = World::empty(Aabb {
        min: V::new(-50.0, -50.0, -50.0),
        max: V::new(50.0, 50.0, 50.0),
    })
    .unwrap();
    let (cfg, gains) = (SimConfig::default(), PidGains::default());
    let mut s = DroneState::at_rest(start);
    let mut pid = PidState::default();
    (0..(seconds * 120.0).round() as usize)
        .map(|_| {
            let t = sim_tick(&s, goal, &pid, &gains, &cfg, &w).unwrap();
            s = t.state;
            pid = t.pid;
            s.clone()
        })
        .collect()
}

fn dynamics() -> Outcome {
    let mut worst = 0.0f64;
    for axis in 0..3 {
        let mut g = [0.0; 3];
        g[axis] = 1.0;
        let goal = V::new(g[0], g[1], g[2]);
        let traj = fly(V::new(0.0, 0.0, 0.0), goal, 5.0);
        let err = |s: &DroneState<f64>| (s.position - goal).norm();
        let settle = traj.iter().rposition(|s| err(s) > 0.02).map_or(0.0, |k| traj[k + 1].time);
        worst = worst.max(settle);
        ensure(settle < 3.0, || format!("axis {axis} settles at {settle} s"))?;
        let last = traj.last().unwrap();
        ensure((last.time - 5.0).abs() < 1e-9 && err(last) < 1e-3, || format!("axis {axis}: error {} at 5 s", err(last)))?;
    }
    let a = fly(V::new(0.3, -0.2, 1.0), V::new(-1.7, 2.2, 2.9), 4.0);
    let b = fly(V::new(0.3, -0.2, 1.0), V::new(-1.7, 2.2, 2.9), 4.0);
    let bits = |s: &DroneState<f64>| {
        [s.position.x, s.position.y, s.position.z, s.velocity.x, s.velocity.y, s.velocity.z].map(f64::to_bits)
    };
    ensure(a.iter().zip(&b).all(|(x, y)| bits(x) == bits(y)), || "runs differ".into())?;
    Ok(format!("worst 2% settling {worst:.3} s, runs bit-identical"))
}

fn random_world(rng: &mut ChaCha8Rng) -> World<f64> {
    let boxes = (0..rng.random_range(0..8))
        .map(|_| {
            let c = V::new(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0), rng.random_range(0.5..3.5));
            let h = V::new(rng.random_range(0.1..1.0), rng.random_range(0.1..1.0), rng.random_range(0.1..0.5));
            Aabb { min: c - h, max: c + h }
        })
        .collect();
    World::new(room(), boxes, vec![]).unwrap()
}

fn free_point(rng: &mut ChaCha8Rng, w: &World<f64>) -> V {
    loop {
        let p = V::new(rng.random_range(-4.9..4.9), rng.random_range(-4.9..4.9), rng.random_range(0.1..3.9));
        if !w.inside_solid(p) {
            return p;
        }
    }
}

/// Distance to the first 1 mm step that lands in a box or leaves the room.
fn march(o: V, d: Direction, w: &World<f64>, max_range: f64) -> f64 {
    let u = d.unit::<f64>();
    let inside = |b: &Aabb<f64>, p: V| {
        p.x >= b.min.x && p.x <= b.max.x && p.y >= b.min.y && p.y <= b.max.y && p.z >= b.min.z && p.z <= b.max.z
    };
    let mut k = 0u32;
    loop {
        let s = f64::from(k) * 1e-3;
        let p = o + u * s;
        if s >= max_range {
            return max_range;
        }
        if !inside(&w.room, p) || w.obstacles.iter().any(|b| inside(b, p)) {
            return s;
        }
        k += 1;
    }
}

fn raycast() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let w = random_world(&mut rng);
        let o = free_point(&mut rng, &w);
        let r = sense_six(&DroneState::at_rest(o), &w, 4.0).map_err(|e| e.to_string())?;
        for d in Direction::ALL {
            let err = (r.get(d) - march(o, d, &w, 4.0)).abs();
            worst = worst.max(err);
            ensure(err <= 1e-3, || format!("{d:?} from {o:?}: off by {err}"))?;
        }
    }

    let rot = |p: V| V::new(-p.y, p.x, p.z);
    let rot_box = |b: &Aabb<f64>| Aabb {
        min: V::new(-b.max.y, b.min.x, b.min.z),
        max: V::new(-b.min.y, b.max.x, b.max.z),
    };
    let rot_dir = |d| match d {
        Direction::Front => Direction::Left,
        Direction::Left => Direction::Back,
        Direction::Back => Direction::Right,
        Direction::Right => Direction::Front,
        other => other,
    };
    for _ in 0..1000 {
        let w = random_world(&mut rng);
        let rw = World::new(rot_box(&w.room), w.obstacles.iter().map(rot_box).collect(), vec![]).unwrap();
        let o = free_point(&mut rng, &w);
        for d in Direction::ALL {
            let a = raycast_range(o, d, &w, 4.0).unwrap();
            let b = raycast_range(rot(o), rot_dir(d), &rw, 4.0).unwrap();
            ensure(a == b, || format!("{d:?} from {o:?}: {a} vs rotated {b}"))?;
        }
    }
    Ok(format!("worst deviation from march {:.2} mm, quarter turn exact", worst * 1e3))
}

#[derive(Deserialize)]
struct Ref {
    statistic: f64,
    p: f64,
}

#[derive(Deserialize)]
struct Case {
    groups: Vec<Vec<f64>>,
    kruskal: Ref,
    levene_mean: Ref,
}

#[derive(Deserialize)]
struct Fixture {
    cases: Vec<Case>,
}

fn matches(name: &str, k: usize, got: (f64, f64), want: &Ref) -> Result<(), String> {
    let d = (got.0 - want.statistic).abs();
    ensure(d <= 1e-9 * want.statistic.abs() || d <= 1e-12, || {
        format!("case {k} {name}: statistic {} vs {}", got.0, want.statistic)
    })?;
    ensure((got.1 - want.p).abs() <= 1e-6, || format!("case {k} {name}: p {} vs {}", got.1, want.p))
}

fn null_rate(test: impl Fn(&[Vec<f64>]) -> f64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n01 = Normal::new(0.0, 1.0).unwrap();
    let rejected = (0..10_000)
        .filter(|_| {
            let g: Vec<Vec<f64>> = (0..3).map(|_| (0..20).map(|_| n01.sample(&mut rng)).collect()).collect();
            test(&g) < 0.05
        })
        .count();
    rejected as f64 / 10_000.0
}

fn statistics() -> Outcome {
    let h = kruskal_wallis(&[vec![1.0f64, 2.0], vec![3.0, 4.0]]).map_err(|e| e.to_string())?;
    ensure(h.statistic == 2.4, || format!("H = {}", h.statistic))?;

    let f: Fixture = serde_json::from_str(include_str!("../../core/tests/fixtures/stats_reference.json")).unwrap();
    ensure(f.cases.len() == 200, || format!("{} reference cases", f.cases.len()))?;
    for (k, c) in f.cases.iter().enumerate() {
        let r = kruskal_wallis(&c.groups).map_err(|e| e.to_string())?;
        matches("kruskal", k, (r.statistic, r.p_value), &c.kruskal)?;
        let r = levene(&c.groups, LeveneCenter::Mean).map_err(|e| e.to_string())?;
        matches("levene", k, (r.statistic, r.p_value), &c.levene_mean)?;
    }

    let kw = null_rate(|g| kruskal_wallis(g).unwrap().p_value, 101);
    let lv = null_rate(|g| levene(g, LeveneCenter::Mean).unwrap().p_value, 102);
    for (name, rate) in [("kruskal", kw), ("levene", lv)] {
        ensure((0.04..=0.06).contains(&rate), || format!("{name} null rejection {rate}"))?;
    }
    Ok(format!("H = 2.4, 200 reference cases agree, null rejection KW {kw:.4} Levene {lv:.4}"))
}

fn confusion() -> Outcome {
    let mut trials = vec![
        CueTrial {
            actual: Direction::Up,
            reported: Direction::Up,
        };
        19
    ];
    for reported in [Direction::Front, Direction::Right] {
        trials.push(CueTrial {
            actual: Direction::Up,
            reported,
        });
    }
    let m = ConfusionMatrix::from_trials(&trials).map_err(|e| e.to_string())?;
    let row: Vec<f64> = m.table_row(Direction::Up).iter().map(|v| (v * 100.0).round() / 100.0).collect();
    ensure(row == [0.0, 4.76, 0.0, 4.76, 90.48, 0.0], || format!("row {row:?} in order {TABLE_ORDER:?}"))?;
    Ok(format!("up row {row:?}"))
}

fn task_rows(task: Task, kind: PilotKind) -> Vec<ResultRow> {
    let s = build_scenario(task, &ScenarioParams::default()).unwrap();
    let params = PilotParams {
        sigma: 0.3,
        ..PilotParams::default()
    };
    let configs = [ExperimentConfig::new(s, kind, params, 2024, 20).unwrap()];
    let rows = run_experiment(&configs).unwrap();
    assert!(rows.iter().all(|r| r.outcome.is_ok()));
    results_table(&configs, &rows)
}

fn sample_variance(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0)
}

fn qualitative() -> Outcome {
    let mut totals = [0usize; 2];
    let mut notes = Vec::new();
    let mut failures = Vec::new();
    for task in [Task::WallApproach, Task::LateralGate, Task::VerticalGate] {
        let noisy = task_rows(task, PilotKind::NoisyDepth);
        let haptic = task_rows(task, PilotKind::HapticReactive);
        if noisy.len() != 20 || haptic.len() != 20 || noisy.iter().zip(&haptic).any(|(a, b)| a.seed != b.seed) {
            return Err(format!("{task:?}: seeds not paired"));
        }
        let coll = |rows: &[ResultRow]| rows.iter().map(|r| r.collisions).sum::<usize>();
        totals[0] += coll(&noisy);
        totals[1] += coll(&haptic);
        notes.push(format!("{}: collisions {} vs {}", task.name(), coll(&noisy), coll(&haptic)));

        if task == Task::WallApproach {
            let mean_clear = |rows: &[ResultRow]| {
                let d: Vec<f64> = rows.iter().filter(|r| r.collisions == 0).filter_map(|r| r.min_wall_dist_m).collect();
                (!d.is_empty()).then(|| d.iter().sum::<f64>() / d.len() as f64)
            };
            match (mean_clear(&noisy), mean_clear(&haptic)) {
                (Some(n), Some(h)) => {
                    notes.push(format!("wall distance {n:.3} vs {h:.3} m"));
                    if h >= n {
                        failures.push(format!("haptic wall distance {h:.4} not below noisy {n:.4}"));
                    }
                }
                other => failures.push(format!("no collision-free wall approaches: {other:?}")),
            }
        } else {
            let xs = |rows: &[ResultRow]| rows.iter().filter_map(|r| r.cross_x).collect::<Vec<_>>();
            let (n, h) = (xs(&noisy), xs(&haptic));
            if n.len() < 2 || h.len() < 2 {
                failures.push(format!("{}: too few crossings ({} / {})", task.name(), n.len(), h.len()));
                continue;
            }
            let (vn, vh) = (sample_variance(&n), sample_variance(&h));
            notes.push(format!("{} cross-x variance {vn:.4} vs {vh:.4}", task.name()));
            if vh >= vn {
                failures.push(format!("{}: haptic crossing variance {vh:.5} not below noisy {vn:.5}", task.name()));
            }
        }
    }
    if 2 * totals[1] > totals[0] {
        failures.push(format!("haptic collisions {} exceed half of noisy {}", totals[1], totals[0]));
    }
    notes.insert(0, format!("total collisions noisy {} haptic {}", totals[0], totals[1]));
    if failures.is_empty() {
        Ok(notes.join("; "))
    } else {
        Err(format!("{} [{}]", failures.join("; "), notes.join("; ")))
    }
}

fn record_replay() -> Outcome {
    let tasks = [Task::WallApproach, Task::LateralGate, Task::VerticalGate, Task::GateCourse];
    let kinds = [PilotKind::HapticReactive, PilotKind::NoisyDepth, PilotKind::Waypoint];
    let mut entries = 0;
    for i in 0..20usize {
        let s = build_scenario(tasks[i % 4], &ScenarioParams::default()).unwrap();
        let cfg = LoopConfig::for_scenario(&s, 30.0).unwrap();
        let policy = PilotPolicy {
            kind: kinds[i % 3],
            params: PilotParams::default(),
            seed: 7000 + i as u64,
        };
        let live = run_scripted_session(&s, &cfg, &policy, 1200).map_err(|e| e.to_string())?;
        let text = live.record.to_ndjson().map_err(|e| e.to_string())?;
        let record = SessionRecord::from_ndjson(&text).map_err(|e| e.to_string())?;
        entries += record.entries.len();
        let replayed = replay_session(&record).map_err(|e| e.to_string())?;
        ensure(replayed.to_json() == live.log.to_json(), || format!("session {i}: logs differ"))?;
        let (a, b) = (summarize_trial(&replayed, &s).unwrap(), summarize_trial(&live.log, &s).unwrap());
        ensure(a == b, || format!("session {i}: summaries differ"))?;
    }
    Ok(format!("20 sessions, {entries} recorded inputs, logs and summaries identical"))
}

fn pulses() -> Outcome {
    let s = pulse_schedule(2024, 10_000, 6.0, 12.0, 0.45).map_err(|e| e.to_string())?;
    ensure(s.len() == 10_000, || format!("{} pulses", s.len()))?;
    ensure((6.0..=12.0).contains(&s[0].onset), || format!("first onset {}", s[0].onset))?;
    for w in s.windows(2) {
        let gap = w[1].onset - (w[0].onset + w[0].duration);
        ensure((6.0 - 1e-9..=12.0 + 1e-9).contains(&gap), || format!("gap {gap}"))?;
    }
    ensure(s.iter().all(|p| p.duration == 0.45), || "duration differs from 0.45".into())?;
    let mut worst = 0.0f64;
    for d in Direction::ALL {
        let f = s.iter().filter(|p| p.direction == d).count() as f64 / 10_000.0;
        worst = worst.max((f - 1.0 / 6.0).abs());
    }
    ensure(worst <= 0.02, || format!("direction frequency off by {worst}"))?;
    Ok(format!("gaps within [6, 12] s, worst direction deviation {worst:.4}"))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 9] = [
        ("cue law", cue_law, Duration::from_secs(1)),
        ("mapping", mapping, Duration::from_secs(1)),
        ("pid dynamics", dynamics, Duration::from_secs(5)),
        ("raycast oracle", raycast, Duration::from_secs(10)),
        ("statistics oracle", statistics, Duration::from_secs(60)),
        ("confusion matrix", confusion, Duration::from_secs(1)),
        ("qualitative reproduction", qualitative, Duration::from_secs(120)),
        ("record/replay", record_replay, Duration::from_secs(120)),
        ("pulse scheduler", pulses, Duration::from_secs(1)),
    ];
    let mut failed = Vec::new();
    for (name, check, budget) in criteria {
        let t0 = Instant::now();
        let mut result = check();
        let took = t0.elapsed();
        if result.is_ok() && took > budget {
            result = Err(format!("took {took:.2?}, budget {budget:?}"));
        }
        match result {
            Ok(detail) => println!("PASS  {name} ({took:.2?}): {detail}"),
            Err(why) => {
                println!("FAIL  {name} ({took:.2?}): {why}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
