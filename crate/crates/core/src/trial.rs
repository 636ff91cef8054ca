//! Per-trial logs and the task completion predicate shared by the batch
//! harness and live sessions.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::sim::{CollisionEvent, DRONE_RADIUS};
use crate::world::{gate_crossing_check, ContactTarget, Scenario, Task};
use crate::{Scalar, Vec3};

/// Time (s) the wall-approach goal must stay put before the task counts as done.
pub const WALL_HOLD_TIME: f64 = 3.0;
/// Commanded forward goal speed (m/s) at or below which the goal counts as held.
pub const WALL_HOLD_SPEED: f64 = 1e-3;
/// Holding only counts within this distance (m) of the wall face.
pub const WALL_HOLD_ZONE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Sample<S> {
    pub time: S,
    pub position: Vec3<S>,
    pub goal: Vec3<S>,
    /// Cue intensities indexed by tactor direction.
    pub cue: [S; 6],
    pub clutch_engaged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    Collision,
    GateCross,
    TaskComplete,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", tag = "kind", content = "payload")]
pub enum EventDetail<S> {
    Collision {
        target: ContactTarget,
        normal: Vec3<S>,
        depth: S,
    },
    GateCross {
        gate: u32,
        point: Vec3<S>,
        through_opening: bool,
    },
    TaskComplete,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct TrialEvent<S> {
    pub time: S,
    #[serde(flatten)]
    pub detail: EventDetail<S>,
}

impl<S: Scalar> TrialEvent<S> {
    pub fn kind(&self) -> EventKind {
        match self.detail {
            EventDetail::Collision { .. } => EventKind::Collision,
            EventDetail::GateCross { .. } => EventKind::GateCross,
            EventDetail::TaskComplete => EventKind::TaskComplete,
        }
    }
}

impl<S: Scalar> From<&CollisionEvent<S>> for TrialEvent<S> {
    fn from(c: &CollisionEvent<S>) -> Self {
        TrialEvent {
            time: c.time,
            detail: EventDetail::Collision {
                target: c.target,
                normal: c.normal,
                depth: c.depth,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct TrialLog<S> {
    pub task: Task,
    pub dt: S,
    pub duration_limit: S,
    pub samples: Vec<Sample<S>>,
    pub events: Vec<TrialEvent<S>>,
}

impl<S: Scalar> TrialLog<S> {
    pub fn new(task: Task, dt: S, duration_limit: S) -> Self {
        Self {
            task,
            dt,
            duration_limit,
            samples: Vec::new(),
            events: Vec::new(),
        }
    }

    pub fn push_sample(&mut self, sample: Sample<S>) -> Result<()> {
        if let Some(last) = self.samples.last() {
            if !(sample.time > last.time) {
                return Err(domain("sample times must be strictly increasing"));
            }
        }
        self.samples.push(sample);
        Ok(())
    }

    pub fn push_event(&mut self, event: TrialEvent<S>) -> Result<()> {
        if let Some(last) = self.events.last() {
            if event.time < last.time {
                return Err(domain("events must be time-ordered"));
            }
        }
        self.events.push(event);
        Ok(())
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &TrialEvent<S>> + '_ {
        self.events.iter().filter(move |e| e.kind() == kind)
    }

    /// Time of the first `TaskComplete` event.
    pub fn completion_time(&self) -> Option<S> {
        self.events_of(EventKind::TaskComplete).next().map(|e| e.time)
    }

    pub fn validate(&self) -> Result<()> {
        for w in self.samples.windows(2) {
            if !(w[1].time > w[0].time) {
                return Err(domain("sample times must be strictly increasing"));
            }
        }
        for w in self.events.windows(2) {
            if w[1].time < w[0].time {
                return Err(domain("events must be time-ordered"));
            }
        }
        Ok(())
    }

    /// Bit-exact JSON form; `f64` values round-trip.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trial log serializes")
    }
}

/// Tracks task progress from successive drone positions and goals and emits
/// gate-crossing and completion events.
#[derive(Debug, Clone)]
pub struct TaskMonitor<S: Scalar> {
    scenario: Scenario<S>,
    next_gate: usize,
    /// Sign of the side the task gate was last crossed to, through its opening.
    crossed_to: Option<bool>,
    hold_time: S,
    complete: bool,
}

impl<S: Scalar> TaskMonitor<S> {
    pub fn new(scenario: &Scenario<S>) -> Self {
        Self {
            scenario: scenario.clone(),
            next_gate: 0,
            crossed_to: None,
            hold_time: S::zero(),
            complete: false,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// Number of course gates crossed in order so far.
    pub fn gates_passed(&self) -> usize {
        self.next_gate
    }

    /// Observes one tick. `prev_goal`/`goal` are the commanded setpoints
    /// before and after the tick.
    pub fn observe(
        &mut self,
        time: S,
        dt: S,
        prev: Vec3<S>,
        curr: Vec3<S>,
        prev_goal: Vec3<S>,
        goal: Vec3<S>,
    ) -> Vec<TrialEvent<S>> {
        let mut out = Vec::new();
        for gate in &self.scenario.world.gates {
            let Some(c) = gate_crossing_check(prev, curr, gate) else {
                continue;
            };
            out.push(TrialEvent {
                time,
                detail: EventDetail::GateCross {
                    gate: gate.id,
                    point: c.point,
                    through_opening: c.through_opening,
                },
            });
            if self.complete {
                continue;
            }
            let expected = self.scenario.gate_order.get(self.next_gate).copied();
            match self.scenario.task {
                Task::GateCourse => {
                    if c.through_opening && expected == Some(gate.id) {
                        self.next_gate += 1;
                    }
                }
                Task::LateralGate | Task::VerticalGate => {
                    if expected == Some(gate.id) {
                        let far = curr[gate.plane.axis] >= gate.plane.coord;
                        self.crossed_to = c.through_opening.then_some(far);
                    }
                }
                Task::WallApproach => {}
            }
        }
        if self.complete {
            return out;
        }

        let done = match self.scenario.task {
            Task::GateCourse => self.next_gate == self.scenario.gate_order.len(),
            Task::LateralGate | Task::VerticalGate => self.clear_of_gate(curr),
            Task::WallApproach => {
                let forward = (goal.x - prev_goal.x) / dt;
                let near = self
                    .scenario
                    .wall_face_distance(curr)
                    .is_some_and(|d| d <= S::lit(WALL_HOLD_ZONE));
                if near && forward <= S::lit(WALL_HOLD_SPEED) {
                    self.hold_time = self.hold_time + dt;
                } else {
                    self.hold_time = S::zero();
                }
                self.hold_time >= S::lit(WALL_HOLD_TIME - 1e-9)
            }
        };
        if done {
            self.complete = true;
            out.push(TrialEvent {
                time,
                detail: EventDetail::TaskComplete,
            });
        }
        out
    }

    fn clear_of_gate(&self, p: Vec3<S>) -> bool {
        let (Some(far), Some(gate)) = (
            self.crossed_to,
            self.scenario.gate_order.first().and_then(|&id| self.scenario.world.gate(id)),
        ) else {
            return false;
        };
        let (lo, hi) = gate.slab();
        let r = S::lit(DRONE_RADIUS);
        let a = gate.plane.axis;
        if far {
            p[a] - r >= hi
        } else {
            p[a] + r <= lo
        }
    }
}
