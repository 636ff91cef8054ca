//! Axis-aligned worlds: boxes, gates, contact and plane-crossing geometry.

pub mod scenario;

pub use scenario::{build_scenario, Scenario, ScenarioParams, Task};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{Axis, Scalar, Vec3};

/// Closed axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", deny_unknown_fields)]
pub struct Aabb<S> {
    pub min: Vec3<S>,
    pub max: Vec3<S>,
}

impl<S: Scalar> Aabb<S> {
    pub fn new(min: Vec3<S>, max: Vec3<S>) -> Result<Self> {
        let b = Self { min, max };
        b.validate()?;
        Ok(b)
    }

    pub(crate) fn from_f64(min: [f64; 3], max: [f64; 3]) -> Self {
        Self {
            min: Vec3::from_f64(min[0], min[1], min[2]),
            max: Vec3::from_f64(max[0], max[1], max[2]),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::Scenario("box corners must be finite".into()));
        }
        if Axis::ALL.iter().any(|&a| self.min[a] >= self.max[a]) {
            return Err(Error::Scenario(format!(
                "box min {:?} must be below max {:?} on every axis",
                self.min, self.max
            )));
        }
        Ok(())
    }

    pub fn center(&self) -> Vec3<S> {
        (self.min + self.max) * S::lit(0.5)
    }

    pub fn contains(&self, p: Vec3<S>) -> bool {
        Axis::ALL
            .iter()
            .all(|&a| p[a] >= self.min[a] && p[a] <= self.max[a])
    }

    /// True when `p` is in the open interior.
    pub fn contains_strict(&self, p: Vec3<S>) -> bool {
        Axis::ALL
            .iter()
            .all(|&a| p[a] > self.min[a] && p[a] < self.max[a])
    }

    pub fn contains_box(&self, other: &Aabb<S>) -> bool {
        self.contains(other.min) && self.contains(other.max)
    }

    pub fn closest_point(&self, p: Vec3<S>) -> Vec3<S> {
        p.clamp_box(self.min, self.max)
    }

    pub fn translated(&self, by: Vec3<S>) -> Self {
        Self {
            min: self.min + by,
            max: self.max + by,
        }
    }

    /// Shrinks every face inward by `margin`.
    pub fn shrunk(&self, margin: S) -> Self {
        Self {
            min: self.min + Vec3::splat(margin),
            max: self.max - Vec3::splat(margin),
        }
    }

    pub fn overlaps_open(&self, other: &Aabb<S>) -> bool {
        Axis::ALL
            .iter()
            .all(|&a| self.min[a] < other.max[a] && other.min[a] < self.max[a])
    }
}

/// Axis-aligned rectangle in the two coordinates orthogonal to a gate's
/// crossing axis (see [`Axis::others`] for ordering).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", deny_unknown_fields)]
pub struct Rect<S> {
    pub min: [S; 2],
    pub max: [S; 2],
}

impl<S: Scalar> Rect<S> {
    pub fn contains(&self, uv: [S; 2]) -> bool {
        (0..2).all(|i| uv[i] >= self.min[i] && uv[i] <= self.max[i])
    }

    fn strictly_inside(&self, outer: &Rect<S>) -> bool {
        (0..2).all(|i| self.min[i] > outer.min[i] && self.max[i] < outer.max[i])
    }

    fn overlaps_open(&self, other: &Rect<S>) -> bool {
        (0..2).all(|i| self.min[i] < other.max[i] && other.min[i] < self.max[i])
    }

    pub fn center(&self) -> [S; 2] {
        let h = S::lit(0.5);
        [(self.min[0] + self.max[0]) * h, (self.min[1] + self.max[1]) * h]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", deny_unknown_fields)]
pub struct GatePlane<S> {
    pub axis: Axis,
    pub coord: S,
}

/// A rectangular opening in a panel made of frame boxes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", deny_unknown_fields)]
pub struct Gate<S> {
    pub id: u32,
    pub frame: Vec<Aabb<S>>,
    pub plane: GatePlane<S>,
    pub opening: Rect<S>,
}

fn project<S: Scalar>(p: Vec3<S>, axis: Axis) -> [S; 2] {
    let (u, v) = axis.others();
    [p[u], p[v]]
}

impl<S: Scalar> Gate<S> {
    /// Bounding rectangle of the frame projected onto the crossing plane.
    pub fn outline(&self) -> Rect<S> {
        let (u, v) = self.plane.axis.others();
        let mut r = Rect {
            min: [S::infinity(); 2],
            max: [S::neg_infinity(); 2],
        };
        for b in &self.frame {
            r.min[0] = r.min[0].min(b.min[u]);
            r.min[1] = r.min[1].min(b.min[v]);
            r.max[0] = r.max[0].max(b.max[u]);
            r.max[1] = r.max[1].max(b.max[v]);
        }
        r
    }

    /// Extent of the frame material along the crossing axis.
    pub fn slab(&self) -> (S, S) {
        let a = self.plane.axis;
        self.frame.iter().fold(
            (S::infinity(), S::neg_infinity()),
            |(lo, hi), b| (lo.min(b.min[a]), hi.max(b.max[a])),
        )
    }

    /// World-space center of the opening on the crossing plane.
    pub fn opening_center(&self) -> Vec3<S> {
        let (u, v) = self.plane.axis.others();
        let c = self.opening.center();
        let mut p = Vec3::zero();
        p[self.plane.axis] = self.plane.coord;
        p[u] = c[0];
        p[v] = c[1];
        p
    }

    pub fn validate(&self) -> Result<()> {
        if self.frame.is_empty() {
            return Err(Error::Scenario(format!("gate {} has no frame", self.id)));
        }
        for b in &self.frame {
            b.validate()?;
        }
        if !self.plane.coord.is_finite() {
            return Err(Error::Scenario(format!("gate {} plane not finite", self.id)));
        }
        let o = &self.opening;
        if (0..2).any(|i| !(o.min[i] < o.max[i])) {
            return Err(Error::Scenario(format!(
                "gate {} opening must have positive width and height",
                self.id
            )));
        }
        if !o.strictly_inside(&self.outline()) {
            return Err(Error::Scenario(format!(
                "gate {} opening is not strictly inside its frame outline",
                self.id
            )));
        }
        let (u, v) = self.plane.axis.others();
        for b in &self.frame {
            let face = Rect {
                min: [b.min[u], b.min[v]],
                max: [b.max[u], b.max[v]],
            };
            if face.overlaps_open(o) {
                return Err(Error::Scenario(format!(
                    "gate {} frame box overlaps its opening",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

/// Static geometry of one task room.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct World<S> {
    pub room: Aabb<S>,
    pub obstacles: Vec<Aabb<S>>,
    pub gates: Vec<Gate<S>>,
}

impl<S: Scalar> World<S> {
    pub fn new(room: Aabb<S>, obstacles: Vec<Aabb<S>>, gates: Vec<Gate<S>>) -> Result<Self> {
        let w = Self {
            room,
            obstacles,
            gates,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn empty(room: Aabb<S>) -> Result<Self> {
        Self::new(room, Vec::new(), Vec::new())
    }

    pub fn validate(&self) -> Result<()> {
        self.room.validate()?;
        for g in &self.gates {
            g.validate()?;
        }
        let mut ids: Vec<u32> = self.gates.iter().map(|g| g.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Scenario("duplicate gate id".into()));
        }
        for (i, b) in self.solids().enumerate() {
            b.validate()?;
            if !self.room.contains_box(b) {
                return Err(Error::Scenario(format!("solid {i} extends outside the room")));
            }
        }
        Ok(())
    }

    /// Every solid box: free obstacles first, then gate frames in gate order.
    /// [`ContactTarget::Solid`] indexes into this sequence.
    pub fn solids(&self) -> impl Iterator<Item = &Aabb<S>> + '_ {
        self.obstacles
            .iter()
            .chain(self.gates.iter().flat_map(|g| g.frame.iter()))
    }

    pub fn gate(&self, id: u32) -> Option<&Gate<S>> {
        self.gates.iter().find(|g| g.id == id)
    }

    /// Whether `p` lies in the open interior of any solid.
    pub fn inside_solid(&self, p: Vec3<S>) -> bool {
        self.solids().any(|b| b.contains_strict(p))
    }

    pub fn translated(&self, by: Vec3<S>) -> Self {
        Self {
            room: self.room.translated(by),
            obstacles: self.obstacles.iter().map(|b| b.translated(by)).collect(),
            gates: self
                .gates
                .iter()
                .map(|g| {
                    let mut g = g.clone();
                    for b in &mut g.frame {
                        *b = b.translated(by);
                    }
                    let a = g.plane.axis;
                    g.plane.coord = g.plane.coord + by[a];
                    let (u, v) = a.others();
                    g.opening.min = [g.opening.min[0] + by[u], g.opening.min[1] + by[v]];
                    g.opening.max = [g.opening.max[0] + by[u], g.opening.max[1] + by[v]];
                    g
                })
                .collect(),
        }
    }
}

/// What a contact is against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ContactTarget {
    /// Index into [`World::solids`].
    Solid { index: usize },
    /// One of the six room boundary faces; `max_side` picks the face at the
    /// room's maximum coordinate on `axis`.
    RoomWall { axis: Axis, max_side: bool },
}

/// Sphere penetration into a box or through a room wall. Moving the sphere
/// center by `normal * depth` resolves it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Contact<S> {
    pub target: ContactTarget,
    pub normal: Vec3<S>,
    pub depth: S,
}

fn sphere_box<S: Scalar>(c: Vec3<S>, radius: S, b: &Aabb<S>) -> Option<(Vec3<S>, S)> {
    let q = b.closest_point(c);
    let diff = c - q;
    let d2 = diff.norm_squared();
    if d2 > S::zero() {
        let d = d2.sqrt();
        return (d < radius).then(|| (diff * (S::one() / d), radius - d));
    }
    // center inside or on the boundary: push out through the nearest face
    let mut best: Option<(Vec3<S>, S)> = None;
    for a in Axis::ALL {
        for (exit, sign) in [(c[a] - b.min[a], -S::one()), (b.max[a] - c[a], S::one())] {
            if best.is_none_or(|(_, e)| exit < e) {
                best = Some((Vec3::axis(a, sign), exit));
            }
        }
    }
    best.map(|(n, exit)| (n, radius + exit))
}

fn room_contacts<S: Scalar>(
    c: Vec3<S>,
    radius: S,
    room: &Aabb<S>,
    out: &mut impl FnMut(Contact<S>),
) {
    for a in Axis::ALL {
        let low = room.min[a] + radius - c[a];
        if low > S::zero() {
            out(Contact {
                target: ContactTarget::RoomWall { axis: a, max_side: false },
                normal: Vec3::axis(a, S::one()),
                depth: low,
            });
        }
        let high = c[a] + radius - room.max[a];
        if high > S::zero() {
            out(Contact {
                target: ContactTarget::RoomWall { axis: a, max_side: true },
                normal: Vec3::axis(a, -S::one()),
                depth: high,
            });
        }
    }
}

/// Every contact of a sphere at `position` with the world, in target order
/// (solids first, then room faces).
pub fn contacts<S: Scalar>(position: Vec3<S>, radius: S, world: &World<S>) -> Vec<Contact<S>> {
    let mut out = Vec::new();
    for (index, b) in world.solids().enumerate() {
        if let Some((normal, depth)) = sphere_box(position, radius, b) {
            out.push(Contact {
                target: ContactTarget::Solid { index },
                normal,
                depth,
            });
        }
    }
    room_contacts(position, radius, &world.room, &mut |c| out.push(c));
    out
}

/// Deepest contact of a sphere with the world, if any. A sphere exactly
/// tangent to a face is not in contact; a center lying on a face is.
pub fn collision_check<S: Scalar>(
    position: Vec3<S>,
    radius: S,
    world: &World<S>,
) -> Option<Contact<S>> {
    contacts(position, radius, world)
        .into_iter()
        .fold(None, |best: Option<Contact<S>>, c| match best {
            Some(b) if b.depth >= c.depth => Some(b),
            _ => Some(c),
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Crossing<S> {
    pub point: Vec3<S>,
    pub through_opening: bool,
}

/// Detects the segment `prev -> curr` piercing the gate plane within the
/// gate's frame outline. Points exactly on the plane count as the far side,
/// so a trajectory touching the plane and turning back crosses once.
///
/// Plane crossings outside the outline (flying around a panel) return `None`.
pub fn gate_crossing_check<S: Scalar>(
    prev: Vec3<S>,
    curr: Vec3<S>,
    gate: &Gate<S>,
) -> Option<Crossing<S>> {
    let axis = gate.plane.axis;
    let a = prev[axis] - gate.plane.coord;
    let b = curr[axis] - gate.plane.coord;
    if (a < S::zero()) == (b < S::zero()) {
        return None;
    }
    let t = a / (a - b);
    let mut point = prev + (curr - prev) * t;
    point[axis] = gate.plane.coord;
    let uv = project(point, axis);
    if !gate.outline().contains(uv) {
        return None;
    }
    Some(Crossing {
        point,
        through_opening: gate.opening.contains(uv),
    })
}
