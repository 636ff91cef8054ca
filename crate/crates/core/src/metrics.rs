//! Per-trial metrics and the results-table row format.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::trial::{EventDetail, EventKind, TrialLog};
use crate::world::{Scenario, Task};
use crate::{Scalar, Vec3};

/// Column order of the results table.
pub const RESULTS_HEADER: [&str; 12] = [
    "trial",
    "task",
    "policy",
    "seed",
    "completed",
    "time_s",
    "distance_m",
    "collisions",
    "min_wall_dist_m",
    "cross_x",
    "cross_y",
    "cross_z",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct MetricsSummary<S> {
    pub completed: bool,
    /// Time of task completion, or the duration limit when incomplete.
    pub completion_time: S,
    pub path_length: S,
    pub collisions: usize,
    /// Closest approach of the drone center to the target wall face
    /// (WallApproach only).
    pub min_wall_distance: Option<S>,
    pub crossing_points: Vec<Vec3<S>>,
}

/// Sum of segment lengths along a polyline.
pub fn path_length<S: Scalar>(points: impl IntoIterator<Item = Vec3<S>>) -> S {
    let mut it = points.into_iter();
    let Some(mut prev) = it.next() else {
        return S::zero();
    };
    let mut total = S::zero();
    for p in it {
        total = total + p.distance(prev);
        prev = p;
    }
    total
}

pub fn summarize_trial<S: Scalar>(log: &TrialLog<S>, scenario: &Scenario<S>) -> Result<MetricsSummary<S>> {
    if log.samples.is_empty() {
        return Err(domain("cannot summarize an empty trial log"));
    }
    let start = log.samples[0].time - log.dt;
    let (completed, completion_time) = match log.completion_time() {
        Some(t) => (true, t - start),
        None => (false, log.duration_limit),
    };
    let min_wall_distance = if scenario.task == Task::WallApproach {
        log.samples
            .iter()
            .filter_map(|s| scenario.wall_face_distance(s.position))
            .reduce(S::min)
    } else {
        None
    };
    let crossing_points = log
        .events
        .iter()
        .filter_map(|e| match e.detail {
            EventDetail::GateCross { point, .. } => Some(point),
            _ => None,
        })
        .collect();
    Ok(MetricsSummary {
        completed,
        completion_time,
        path_length: path_length(log.samples.iter().map(|s| s.position)),
        collisions: log.events_of(EventKind::Collision).count(),
        min_wall_distance,
        crossing_points,
    })
}

/// One line of the results table. The crossing columns hold the first gate
/// crossing of the trial, if any.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub trial: usize,
    pub task: String,
    pub policy: String,
    pub seed: u64,
    pub completed: bool,
    pub time_s: f64,
    pub distance_m: f64,
    pub collisions: usize,
    pub min_wall_dist_m: Option<f64>,
    pub cross_x: Option<f64>,
    pub cross_y: Option<f64>,
    pub cross_z: Option<f64>,
}

impl ResultRow {
    pub fn from_summary<S: Scalar>(
        trial: usize,
        task: Task,
        policy: &str,
        seed: u64,
        m: &MetricsSummary<S>,
    ) -> Self {
        let cross = m.crossing_points.first().map(|p| p.cast::<f64>());
        Self {
            trial,
            task: task.name().to_string(),
            policy: policy.to_string(),
            seed,
            completed: m.completed,
            time_s: m.completion_time.as_f64(),
            distance_m: m.path_length.as_f64(),
            collisions: m.collisions,
            min_wall_dist_m: m.min_wall_distance.map(|d| d.as_f64()),
            cross_x: cross.map(|p| p.x),
            cross_y: cross.map(|p| p.y),
            cross_z: cross.map(|p| p.z),
        }
    }
}

pub fn write_results<W: std::io::Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results<R: std::io::Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.iter().ne(RESULTS_HEADER.iter().copied()) {
        return Err(crate::Error::Parse(format!(
            "unexpected results header `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    r.deserialize()
        .map(|row| row.map_err(crate::Error::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trial::{Sample, TrialEvent};
    use crate::world::{build_scenario, ContactTarget, ScenarioParams};

    fn log_along(points: &[Vec3<f64>]) -> TrialLog<f64> {
        let mut log = TrialLog::new(Task::GateCourse, 0.01, 9.0);
        for (k, &p) in points.iter().enumerate() {
            log.push_sample(Sample {
                time: (k + 1) as f64 * 0.01,
                position: p,
                goal: p,
                cue: [0.0; 6],
                clutch_engaged: true,
            })
            .unwrap();
        }
        log
    }

    fn course() -> Scenario<f64> {
        build_scenario(Task::GateCourse, &ScenarioParams::default()).unwrap()
    }

    #[test]
    fn stationary_has_zero_length() {
        let p = Vec3::new(1.0, 2.0, 1.0);
        let m = summarize_trial(&log_along(&[p; 50]), &course()).unwrap();
        assert_eq!(m.path_length, 0.0);
        assert!(!m.completed);
        assert_eq!(m.completion_time, 9.0);
    }

    #[test]
    fn straight_traverse_length() {
        let pts: Vec<_> = (0..=300).map(|k| Vec3::new(k as f64 * 0.01, 0.0, 1.0)).collect();
        let m = summarize_trial(&log_along(&pts), &course()).unwrap();
        assert!((m.path_length - 3.0).abs() < 1e-9);
    }

    #[test]
    fn counts_collisions_and_completion() {
        let mut log = log_along(&[Vec3::zero(); 100]);
        for t in [0.2, 0.4] {
            log.push_event(TrialEvent {
                time: t,
                detail: EventDetail::Collision {
                    target: ContactTarget::Solid { index: 0 },
                    normal: Vec3::new(-1.0, 0.0, 0.0),
                    depth: 0.01,
                },
            })
            .unwrap();
        }
        log.push_event(TrialEvent { time: 0.5, detail: EventDetail::TaskComplete }).unwrap();
        let m = summarize_trial(&log, &course()).unwrap();
        assert_eq!(m.collisions, 2);
        assert!(m.completed);
        assert!((m.completion_time - 0.5).abs() < 1e-15);
    }

    #[test]
    fn wall_distance_only_for_approach() {
        let s = build_scenario::<f64>(Task::WallApproach, &ScenarioParams::default()).unwrap();
        let face = s.target_wall_box().unwrap().min.x;
        let pts: Vec<_> = (0..10).map(|k| Vec3::new(face - 1.0 + k as f64 * 0.05, 0.0, 1.2)).collect();
        let m = summarize_trial(&log_along(&pts), &s).unwrap();
        assert!((m.min_wall_distance.unwrap() - 0.55).abs() < 1e-12);
        assert_eq!(summarize_trial(&log_along(&pts), &course()).unwrap().min_wall_distance, None);
    }

    #[test]
    fn empty_log_rejected() {
        assert!(summarize_trial(&TrialLog::new(Task::GateCourse, 0.01, 1.0), &course()).is_err());
    }

    #[test]
    fn csv_round_trip_with_header() {
        let rows = vec![
            ResultRow {
                trial: 0,
                task: "WallApproach".into(),
                policy: "NoisyDepth".into(),
                seed: 42,
                completed: true,
                time_s: 12.5,
                distance_m: 3.25,
                collisions: 1,
                min_wall_dist_m: Some(0.1),
                cross_x: None,
                cross_y: None,
                cross_z: None,
            },
            ResultRow {
                trial: 1,
                task: "LateralGate".into(),
                policy: "HapticReactive".into(),
                seed: 43,
                completed: false,
                time_s: 30.0,
                distance_m: 1.0 / 3.0,
                collisions: 0,
                min_wall_dist_m: None,
                cross_x: Some(0.5),
                cross_y: Some(0.0),
                cross_z: Some(1.2),
            },
        ];
        let mut buf = Vec::new();
        write_results(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), RESULTS_HEADER.join(","));
        assert_eq!(read_results(buf.as_slice()).unwrap(), rows);
    }
}
