use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{collision_check, Aabb, Gate, GatePlane, Rect, World};
use crate::error::{Error, Result};
use crate::sim::DRONE_RADIUS;
use crate::{Axis, Scalar, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Task {
    GateCourse,
    WallApproach,
    LateralGate,
    VerticalGate,
}

impl Task {
    pub const ALL: [Task; 4] = [
        Task::GateCourse,
        Task::WallApproach,
        Task::LateralGate,
        Task::VerticalGate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::GateCourse => "GateCourse",
            Task::WallApproach => "WallApproach",
            Task::LateralGate => "LateralGate",
            Task::VerticalGate => "VerticalGate",
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Task::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown task `{s}`")))
    }
}

/// Optional overrides of a task's default layout.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioParams<S> {
    pub spawn: Option<Vec3<S>>,
    /// Opening width of the task gate (Lateral/VerticalGate) or of every
    /// course gate (GateCourse).
    pub opening_width: Option<S>,
    /// Spawn-to-wall-face distance (WallApproach).
    pub wall_distance: Option<S>,
}

/// A task world plus the task's bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    bound = "S: Scalar",
    try_from = "ScenarioFile<S>",
    into = "ScenarioFile<S>"
)]
pub struct Scenario<S: Scalar> {
    pub task: Task,
    pub world: World<S>,
    pub spawn: Vec3<S>,
    /// Gates in the order they must be crossed.
    pub gate_order: Vec<u32>,
    /// Index into `world.obstacles` of the wall to approach.
    pub target_wall: Option<usize>,
}

/// On-disk layout of a scenario document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", deny_unknown_fields)]
struct ScenarioFile<S: Scalar> {
    task: Task,
    room: Aabb<S>,
    #[serde(default)]
    obstacles: Vec<Aabb<S>>,
    #[serde(default)]
    gates: Vec<Gate<S>>,
    spawn: Vec3<S>,
    #[serde(default)]
    gate_order: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target_wall: Option<usize>,
}

impl<S: Scalar> TryFrom<ScenarioFile<S>> for Scenario<S> {
    type Error = Error;
    fn try_from(f: ScenarioFile<S>) -> Result<Self> {
        let s = Scenario {
            task: f.task,
            world: World {
                room: f.room,
                obstacles: f.obstacles,
                gates: f.gates,
            },
            spawn: f.spawn,
            gate_order: f.gate_order,
            target_wall: f.target_wall,
        };
        s.validate()?;
        Ok(s)
    }
}

impl<S: Scalar> From<Scenario<S>> for ScenarioFile<S> {
    fn from(s: Scenario<S>) -> Self {
        ScenarioFile {
            task: s.task,
            room: s.world.room,
            obstacles: s.world.obstacles,
            gates: s.world.gates,
            spawn: s.spawn,
            gate_order: s.gate_order,
            target_wall: s.target_wall,
        }
    }
}

impl<S: Scalar> Scenario<S> {
    pub fn validate(&self) -> Result<()> {
        self.world.validate()?;
        if !self.spawn.is_finite() || !self.world.room.contains(self.spawn) {
            return Err(Error::Scenario("spawn must be a finite point in the room".into()));
        }
        if let Some(c) = collision_check(self.spawn, S::lit(DRONE_RADIUS), &self.world) {
            return Err(Error::Scenario(format!(
                "spawn {:?} collides with {:?}",
                self.spawn, c.target
            )));
        }
        for id in &self.gate_order {
            if self.world.gate(*id).is_none() {
                return Err(Error::Scenario(format!("gate_order references unknown gate {id}")));
            }
        }
        if let Some(i) = self.target_wall {
            if i >= self.world.obstacles.len() {
                return Err(Error::Scenario(format!("target_wall {i} out of range")));
            }
        }
        match self.task {
            Task::WallApproach if self.target_wall.is_none() => {
                Err(Error::Scenario("WallApproach needs a target_wall".into()))
            }
            Task::GateCourse | Task::LateralGate | Task::VerticalGate
                if self.gate_order.is_empty() =>
            {
                Err(Error::Scenario(format!("{} needs a nonempty gate_order", self.task)))
            }
            _ => Ok(()),
        }
    }

    pub fn target_wall_box(&self) -> Option<&Aabb<S>> {
        self.target_wall.map(|i| &self.world.obstacles[i])
    }

    /// Distance from `p` to the approach face (the face toward the spawn)
    /// of the target wall, measured along the approach axis X.
    pub fn wall_face_distance(&self, p: Vec3<S>) -> Option<S> {
        self.target_wall_box().map(|b| b.min.x - p.x)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

pub(crate) const ROOM_MIN: [f64; 3] = [-5.0, -5.0, 0.0];
pub(crate) const ROOM_MAX: [f64; 3] = [5.0, 5.0, 4.0];
const PANEL_THICKNESS: f64 = 0.1;
const PANEL_HEIGHT: f64 = 2.4;
const PANEL_WIDTH: f64 = 2.0;
const COURSE_OPENING: f64 = 1.0;
const SLOT_WIDTH: f64 = 0.8;
/// Depth (X) of the lateral slot and vertical opening centers.
const OPENING_X: f64 = 0.5;

struct CourseGate {
    axis: Axis,
    coord: f64,
    panel_center: f64,
    opening_lateral: f64,
    opening_height: f64,
}

/// Six panels around a counter-clockwise loop, alternating lateral and
/// vertical opening offsets.
const COURSE: [CourseGate; 6] = [
    CourseGate { axis: Axis::X, coord: -1.0, panel_center: -2.5, opening_lateral: -2.2, opening_height: 1.2 },
    CourseGate { axis: Axis::X, coord: 1.5, panel_center: -2.5, opening_lateral: -2.5, opening_height: 1.6 },
    CourseGate { axis: Axis::Y, coord: 0.0, panel_center: 3.0, opening_lateral: 2.7, opening_height: 1.2 },
    CourseGate { axis: Axis::X, coord: 1.5, panel_center: 2.5, opening_lateral: 2.5, opening_height: 0.9 },
    CourseGate { axis: Axis::X, coord: -1.0, panel_center: 2.5, opening_lateral: 2.8, opening_height: 1.2 },
    CourseGate { axis: Axis::Y, coord: 0.0, panel_center: -3.0, opening_lateral: -3.0, opening_height: 1.6 },
];

/// Builds a box from bounds given in (crossing axis, lateral, vertical)
/// coordinates. `axis` must be X or Y; vertical is always Z.
fn panel_box<S: Scalar>(axis: Axis, along: (f64, f64), lateral: (f64, f64), z: (f64, f64)) -> Aabb<S> {
    match axis {
        Axis::X => Aabb::from_f64([along.0, lateral.0, z.0], [along.1, lateral.1, z.1]),
        _ => Aabb::from_f64([lateral.0, along.0, z.0], [lateral.1, along.1, z.1]),
    }
}

/// Frame boxes around a rectangular hole in a panel. `outer` and `hole` are
/// (lateral, vertical) bounds.
fn framed_panel<S: Scalar>(
    axis: Axis,
    coord: f64,
    outer: ((f64, f64), (f64, f64)),
    hole: ((f64, f64), (f64, f64)),
) -> Vec<Aabb<S>> {
    let along = (coord - PANEL_THICKNESS / 2.0, coord + PANEL_THICKNESS / 2.0);
    let ((ol0, ol1), (ov0, ov1)) = outer;
    let ((hl0, hl1), (hv0, hv1)) = hole;
    let mut frame = Vec::with_capacity(4);
    let mut push = |lat: (f64, f64), v: (f64, f64)| {
        if lat.0 < lat.1 && v.0 < v.1 {
            frame.push(panel_box(axis, along, lat, v));
        }
    };
    push((ol0, hl0), (ov0, ov1));
    push((hl1, ol1), (ov0, ov1));
    push((hl0, hl1), (ov0, hv0));
    push((hl0, hl1), (hv1, ov1));
    frame
}

fn checked_width<S: Scalar>(w: Option<S>, default: f64, max: f64) -> Result<f64> {
    let w = w.map_or(default, |w| w.as_f64());
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::Scenario(format!("opening width must be positive, got {w}")));
    }
    if w >= max {
        return Err(Error::Scenario(format!("opening width {w} does not fit in its panel")));
    }
    Ok(w)
}

/// The default world for `task`, with `params` applied. Deterministic.
pub fn build_scenario<S: Scalar>(task: Task, params: &ScenarioParams<S>) -> Result<Scenario<S>> {
    let room = Aabb::from_f64(ROOM_MIN, ROOM_MAX);
    let (obstacles, gates, spawn, target_wall) = match task {
        Task::GateCourse => {
            let w = checked_width(params.opening_width, COURSE_OPENING, PANEL_HEIGHT)?;
            let gates = COURSE
                .iter()
                .enumerate()
                .map(|(id, g)| {
                    let half = w / 2.0;
                    let outer = (
                        (g.panel_center - PANEL_WIDTH / 2.0, g.panel_center + PANEL_WIDTH / 2.0),
                        (0.0, PANEL_HEIGHT),
                    );
                    let hole = (
                        (g.opening_lateral - half, g.opening_lateral + half),
                        (g.opening_height - half, g.opening_height + half),
                    );
                    Gate {
                        id: id as u32,
                        frame: framed_panel(g.axis, g.coord, outer, hole),
                        plane: GatePlane { axis: g.axis, coord: S::lit(g.coord) },
                        opening: Rect {
                            min: [S::lit(hole.0 .0), S::lit(hole.1 .0)],
                            max: [S::lit(hole.0 .1), S::lit(hole.1 .1)],
                        },
                    }
                })
                .collect();
            (Vec::new(), gates, Vec3::from_f64(-2.5, -2.5, 1.2), None)
        }
        Task::WallApproach => {
            let spawn = params.spawn.unwrap_or(Vec3::from_f64(-2.0, 0.0, 1.2));
            let d = params.wall_distance.map_or(4.0, |d| d.as_f64());
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::Scenario(format!("wall distance must be positive, got {d}")));
            }
            let face = spawn.x.as_f64() + d;
            let wall = Aabb::from_f64([face, -2.0, 0.0], [face + 0.2, 2.0, 2.4]);
            (vec![wall], Vec::new(), spawn, Some(0))
        }
        Task::LateralGate => {
            let w = checked_width(params.opening_width, SLOT_WIDTH, 9.0)?;
            let hole = ((OPENING_X - w / 2.0, OPENING_X + w / 2.0), (0.1, 3.9));
            let outer = ((ROOM_MIN[0], ROOM_MAX[0]), (ROOM_MIN[2], ROOM_MAX[2]));
            let gate = Gate {
                id: 0,
                frame: framed_panel(Axis::Y, 0.0, outer, hole),
                plane: GatePlane { axis: Axis::Y, coord: S::zero() },
                opening: Rect {
                    min: [S::lit(hole.0 .0), S::lit(hole.1 .0)],
                    max: [S::lit(hole.0 .1), S::lit(hole.1 .1)],
                },
            };
            (Vec::new(), vec![gate], Vec3::from_f64(-1.0, -2.0, 1.2), None)
        }
        Task::VerticalGate => {
            let w = checked_width(params.opening_width, SLOT_WIDTH, 9.0)?;
            let hole = ((OPENING_X - w / 2.0, OPENING_X + w / 2.0), (-w / 2.0, w / 2.0));
            let along = (2.0 - PANEL_THICKNESS / 2.0, 2.0 + PANEL_THICKNESS / 2.0);
            let slab = |x: (f64, f64), y: (f64, f64)| {
                Aabb::from_f64([x.0, y.0, along.0], [x.1, y.1, along.1])
            };
            let (x0, x1, y0, y1) = (ROOM_MIN[0], ROOM_MAX[0], ROOM_MIN[1], ROOM_MAX[1]);
            let frame = vec![
                slab((x0, hole.0 .0), (y0, y1)),
                slab((hole.0 .1, x1), (y0, y1)),
                slab(hole.0, (y0, hole.1 .0)),
                slab(hole.0, (hole.1 .1, y1)),
            ];
            let gate = Gate {
                id: 0,
                frame,
                plane: GatePlane { axis: Axis::Z, coord: S::lit(2.0) },
                opening: Rect {
                    min: [S::lit(hole.0 .0), S::lit(hole.1 .0)],
                    max: [S::lit(hole.0 .1), S::lit(hole.1 .1)],
                },
            };
            (Vec::new(), vec![gate], Vec3::from_f64(-1.0, 0.0, 1.0), None)
        }
    };
    let gate_order = gates.iter().map(|g: &Gate<S>| g.id).collect();
    let scenario = Scenario {
        task,
        world: World {
            room,
            obstacles,
            gates,
        },
        spawn: params.spawn.unwrap_or(spawn),
        gate_order,
        target_wall,
    };
    scenario.validate()?;
    Ok(scenario)
}
