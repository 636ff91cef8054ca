//! Six single-ray rangefinders along the body axes.
//!
//! The drone never yaws, so body axes coincide with world axes.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::sim::DroneState;
use crate::world::World;
use crate::{Axis, Scalar, Vec3};

/// Default sensor range (m).
pub const DEFAULT_MAX_RANGE: f64 = 4.0;

/// Tactor / ranger direction. The discriminant is the fixed tactor index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    Front = 0,
    Back = 1,
    Left = 2,
    Right = 3,
    Up = 4,
    Down = 5,
}

impl Direction {
    pub const ALL: [Direction; 6] = [
        Direction::Front,
        Direction::Back,
        Direction::Left,
        Direction::Right,
        Direction::Up,
        Direction::Down,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Direction> {
        Self::ALL.get(i).copied()
    }

    pub fn axis(self) -> Axis {
        match self {
            Direction::Front | Direction::Back => Axis::X,
            Direction::Left | Direction::Right => Axis::Y,
            Direction::Up | Direction::Down => Axis::Z,
        }
    }

    /// True for the +X, +Y and +Z directions.
    pub fn is_positive(self) -> bool {
        matches!(self, Direction::Front | Direction::Left | Direction::Up)
    }

    pub fn unit<S: Scalar>(self) -> Vec3<S> {
        let s = if self.is_positive() { S::one() } else { -S::one() };
        Vec3::axis(self.axis(), s)
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::Front => Direction::Back,
            Direction::Back => Direction::Front,
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::Front => "front",
            Direction::Back => "back",
            Direction::Left => "left",
            Direction::Right => "right",
            Direction::Up => "up",
            Direction::Down => "down",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct RangeReading<S> {
    /// Indexed by [`Direction::index`]. `max_range` means no return.
    pub distances: [S; 6],
    pub max_range: S,
}

impl<S: Scalar> RangeReading<S> {
    pub fn get(&self, d: Direction) -> S {
        self.distances[d.index()]
    }
}

/// Distance along one axis ray to the nearest box face or room wall,
/// capped at `max_range`.
pub fn raycast_range<S: Scalar>(
    origin: Vec3<S>,
    direction: Direction,
    world: &World<S>,
    max_range: S,
) -> Result<S> {
    if !origin.is_finite() {
        return Err(domain("ray origin must be finite"));
    }
    if !(max_range.is_finite() && max_range > S::zero()) {
        return Err(domain("max_range must be positive"));
    }
    if world.inside_solid(origin) {
        return Err(Error::SensorFault {
            x: origin.x.as_f64(),
            y: origin.y.as_f64(),
            z: origin.z.as_f64(),
        });
    }
    let a = direction.axis();
    let (u, v) = a.others();
    let positive = direction.is_positive();
    let o = origin[a];

    let room = &world.room;
    let mut best = if positive { room.max[a] - o } else { o - room.min[a] };
    best = best.max(S::zero());

    for b in world.solids() {
        let in_shadow = origin[u] >= b.min[u]
            && origin[u] <= b.max[u]
            && origin[v] >= b.min[v]
            && origin[v] <= b.max[v];
        if !in_shadow {
            continue;
        }
        let d = if positive {
            if b.max[a] <= o {
                continue;
            }
            (b.min[a] - o).max(S::zero())
        } else {
            if b.min[a] >= o {
                continue;
            }
            (o - b.max[a]).max(S::zero())
        };
        if d < best {
            best = d;
        }
    }
    Ok(best.min(max_range))
}

/// One ray per [`Direction`] from the drone center.
pub fn sense_six<S: Scalar>(
    state: &DroneState<S>,
    world: &World<S>,
    max_range: S,
) -> Result<RangeReading<S>> {
    let mut distances = [S::zero(); 6];
    for d in Direction::ALL {
        distances[d.index()] = raycast_range(state.position, d, world, max_range)?;
    }
    Ok(RangeReading {
        distances,
        max_range,
    })
}
