//! Hand pose to goal setpoint mapping with a clutch, plus zero-order-hold
//! resampling of the operator input stream onto the simulation tick grid.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::sim::DRONE_RADIUS;
use crate::world::{Aabb, Scenario};
use crate::{Scalar, Vec3};

/// Input older than this (s) is stale and freezes the goal.
pub const STALE_AFTER: f64 = 0.25;

/// Slack used when comparing timestamps against the tick grid.
const GRID_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", deny_unknown_fields)]
pub struct HandPose<S> {
    /// Operator frame (m).
    pub position: Vec3<S>,
    pub timestamp: S,
}

impl<S: Scalar> HandPose<S> {
    pub fn new(position: Vec3<S>, timestamp: S) -> Self {
        Self { position, timestamp }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClutchMode {
    /// Engaged goal is `scale * hand`.
    #[default]
    Absolute,
    /// Engaged goal moves with hand displacement from the engage point.
    Relative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct ClutchState<S> {
    pub engaged: bool,
    pub anchor_hand: Vec3<S>,
    pub anchor_goal: Vec3<S>,
    pub mode: ClutchMode,
}

impl<S: Scalar> ClutchState<S> {
    pub fn released(mode: ClutchMode) -> Self {
        Self {
            engaged: false,
            anchor_hand: Vec3::zero(),
            anchor_goal: Vec3::zero(),
            mode,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", deny_unknown_fields)]
pub struct MappingConfig<S> {
    pub scale: S,
    pub mode: ClutchMode,
    /// Operator reach box: the room scaled down by `scale`.
    pub workspace: Aabb<S>,
    /// Goals are clamped into this box.
    pub goal_bounds: Aabb<S>,
}

impl<S: Scalar> MappingConfig<S> {
    pub const SIMULATION_SCALE: f64 = 8.0;
    pub const HARDWARE_SCALE: f64 = 6.0;

    pub fn new(scale: S, mode: ClutchMode, room: &Aabb<S>) -> Result<Self> {
        if !(scale.is_finite() && scale > S::zero()) {
            return Err(domain("mapping scale must be positive"));
        }
        room.validate()?;
        let inv = S::one() / scale;
        let workspace = Aabb {
            min: room.min * inv,
            max: room.max * inv,
        };
        let goal_bounds = room.shrunk(S::lit(2.0 * DRONE_RADIUS));
        goal_bounds.validate()?;
        Ok(Self {
            scale,
            mode,
            workspace,
            goal_bounds,
        })
    }

    pub fn simulation(room: &Aabb<S>) -> Result<Self> {
        Self::new(S::lit(Self::SIMULATION_SCALE), ClutchMode::Absolute, room)
    }

    pub fn hardware(room: &Aabb<S>) -> Result<Self> {
        Self::new(S::lit(Self::HARDWARE_SCALE), ClutchMode::Absolute, room)
    }

    pub fn with_mode(mut self, mode: ClutchMode) -> Self {
        self.mode = mode;
        self
    }
}

/// Engaged goal before clamping. `None` when the clutch is released.
pub fn unclamped_goal<S: Scalar>(hand: Vec3<S>, clutch: &ClutchState<S>, scale: S) -> Option<Vec3<S>> {
    if !clutch.engaged {
        return None;
    }
    Some(match clutch.mode {
        ClutchMode::Absolute => hand * scale,
        ClutchMode::Relative => clutch.anchor_goal + (hand - clutch.anchor_hand) * scale,
    })
}

/// New goal for a hand sample. A released clutch, or a non-finite hand,
/// leaves `current_goal` untouched.
pub fn map_hand_to_goal<S: Scalar>(
    hand: &HandPose<S>,
    clutch: &ClutchState<S>,
    config: &MappingConfig<S>,
    current_goal: Vec3<S>,
) -> Vec3<S> {
    if !hand.position.is_finite() {
        return current_goal;
    }
    match unclamped_goal(hand.position, clutch, config.scale) {
        Some(g) if g.is_finite() => g.clamp_box(config.goal_bounds.min, config.goal_bounds.max),
        _ => current_goal,
    }
}

pub fn clutch_transition<S: Scalar>(
    clutch: &ClutchState<S>,
    engage: bool,
    hand: &HandPose<S>,
    current_goal: Vec3<S>,
) -> ClutchState<S> {
    match (engage, clutch.engaged) {
        (true, true) | (false, false) => *clutch,
        (true, false) => ClutchState {
            engaged: true,
            anchor_hand: hand.position,
            anchor_goal: current_goal,
            mode: clutch.mode,
        },
        (false, true) => ClutchState {
            engaged: false,
            ..*clutch
        },
    }
}

pub fn reset_goal<S: Scalar>(scenario: &Scenario<S>) -> Vec3<S> {
    scenario.spawn
}

/// Incremental zero-order hold over a live stream.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ZeroOrderHold<S> {
    latest: Option<HandPose<S>>,
}

impl<S: Scalar> ZeroOrderHold<S> {
    pub fn new() -> Self {
        Self { latest: None }
    }

    /// Records a sample. Out-of-order samples are rejected.
    pub fn push(&mut self, pose: HandPose<S>) -> Result<()> {
        if !(pose.position.is_finite() && pose.timestamp.is_finite()) {
            return Err(domain("hand pose must be finite"));
        }
        if let Some(prev) = self.latest {
            if pose.timestamp < prev.timestamp {
                return Err(domain(format!(
                    "hand timestamps must be nondecreasing ({} after {})",
                    pose.timestamp, prev.timestamp
                )));
            }
        }
        self.latest = Some(pose);
        Ok(())
    }

    pub fn latest(&self) -> Option<&HandPose<S>> {
        self.latest.as_ref()
    }

    /// True once the held sample is at least [`STALE_AFTER`] old at `now`.
    pub fn is_stale(&self, now: S) -> bool {
        match self.latest {
            Some(p) => now - p.timestamp >= S::lit(STALE_AFTER - GRID_EPS),
            None => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resampled<S> {
    /// One pose per tick, stamped with the tick time.
    pub samples: Vec<HandPose<S>>,
    /// Parallel to `samples`.
    pub stale: Vec<bool>,
}

impl<S> Resampled<S> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Holds each input sample until the next one arrives, on the grid
/// `t0 + k*dt` spanning the stream. A tick is stale when the held sample is
/// at least [`STALE_AFTER`] old; its position is still the held one, so a
/// consumer that skips stale ticks sees a frozen goal.
pub fn resample_input<S: Scalar>(stream: &[HandPose<S>], dt: S) -> Result<Resampled<S>> {
    if !(dt.is_finite() && dt > S::zero()) {
        return Err(domain("resampling dt must be positive"));
    }
    let Some(first) = stream.first() else {
        return Ok(Resampled {
            samples: Vec::new(),
            stale: Vec::new(),
        });
    };
    let t0 = first.timestamp;
    let span = stream[stream.len() - 1].timestamp - t0;
    let ticks = (span / dt + S::lit(GRID_EPS)).floor().to_usize().unwrap_or(0) + 1;

    let mut hold = ZeroOrderHold::new();
    let mut next = 0;
    let mut samples = Vec::with_capacity(ticks);
    let mut stale = Vec::with_capacity(ticks);
    for k in 0..ticks {
        let t = t0 + S::from_usize_lossy(k) * dt;
        while next < stream.len() && stream[next].timestamp <= t + S::lit(GRID_EPS) {
            hold.push(stream[next])?;
            next += 1;
        }
        let held = hold.latest().copied().expect("first sample is at t0");
        samples.push(HandPose::new(held.position, t));
        stale.push(hold.is_stale(t));
    }
    // Remaining samples still need their ordering checked.
    for p in &stream[next..] {
        hold.push(*p)?;
    }
    Ok(Resampled { samples, stale })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn room() -> Aabb<f64> {
        Aabb::from_f64([-5.0, -5.0, 0.0], [5.0, 5.0, 4.0])
    }

    fn hand(x: f64, y: f64, z: f64) -> HandPose<f64> {
        HandPose::new(Vec3::new(x, y, z), 0.0)
    }

    fn engaged(mode: ClutchMode) -> ClutchState<f64> {
        ClutchState {
            engaged: true,
            ..ClutchState::released(mode)
        }
    }

    #[test]
    fn absolute_scale_eight() {
        let cfg = MappingConfig::simulation(&room()).unwrap();
        let g = map_hand_to_goal(&hand(0.1, 0.2, 0.05), &engaged(ClutchMode::Absolute), &cfg, Vec3::zero());
        assert!((g - Vec3::new(0.8, 1.6, 0.4)).norm() < 1e-12);
    }

    #[test]
    fn hardware_scale_six() {
        let cfg = MappingConfig::hardware(&room()).unwrap();
        let g = map_hand_to_goal(&hand(0.1, 0.2, 0.3), &engaged(ClutchMode::Absolute), &cfg, Vec3::zero());
        assert!((g - Vec3::new(0.6, 1.2, 1.8)).norm() < 1e-12);
    }

    #[test]
    fn released_clutch_keeps_goal() {
        let cfg = MappingConfig::simulation(&room()).unwrap();
        let g0 = Vec3::new(1.0, 2.0, 1.0);
        let c = ClutchState::released(ClutchMode::Absolute);
        assert_eq!(map_hand_to_goal(&hand(0.4, -0.3, 0.2), &c, &cfg, g0), g0);
    }

    #[test]
    fn relative_at_anchor_is_anchor_goal() {
        let cfg = MappingConfig::simulation(&room()).unwrap().with_mode(ClutchMode::Relative);
        let c = clutch_transition(
            &ClutchState::released(ClutchMode::Relative),
            true,
            &hand(0.3, 0.1, 0.2),
            Vec3::new(1.0, -1.0, 2.0),
        );
        let g = map_hand_to_goal(&hand(0.3, 0.1, 0.2), &c, &cfg, Vec3::zero());
        assert_eq!(g, Vec3::new(1.0, -1.0, 2.0));
    }

    #[test]
    fn goal_clamped_inside_room_clearance() {
        let cfg = MappingConfig::simulation(&room()).unwrap();
        let g = map_hand_to_goal(&hand(10.0, -10.0, -1.0), &engaged(ClutchMode::Absolute), &cfg, Vec3::zero());
        assert_eq!(g, Vec3::new(4.8, -4.8, 0.2));
    }

    #[test]
    fn engage_sets_anchors_and_release_is_idempotent() {
        let c0 = ClutchState::released(ClutchMode::Relative);
        let h = hand(0.1, 0.2, 0.3);
        let g = Vec3::new(1.0, 1.0, 1.0);
        let c1 = clutch_transition(&c0, true, &h, g);
        assert!(c1.engaged);
        assert_eq!((c1.anchor_hand, c1.anchor_goal), (h.position, g));
        assert_eq!(clutch_transition(&c1, true, &hand(9.0, 9.0, 9.0), Vec3::zero()), c1);
        let r1 = clutch_transition(&c1, false, &h, g);
        let r2 = clutch_transition(&r1, false, &hand(5.0, 5.0, 5.0), Vec3::zero());
        assert_eq!(r1, r2);
        assert!(!r1.engaged);
    }

    #[test]
    fn reengage_relative_has_no_jump() {
        let cfg = MappingConfig::simulation(&room()).unwrap().with_mode(ClutchMode::Relative);
        let mut c = ClutchState::released(ClutchMode::Relative);
        let mut goal = Vec3::new(0.0, 0.0, 1.0);
        c = clutch_transition(&c, true, &hand(0.0, 0.0, 0.0), goal);
        goal = map_hand_to_goal(&hand(0.1, 0.0, 0.05), &c, &cfg, goal);
        c = clutch_transition(&c, false, &hand(0.1, 0.0, 0.05), goal);
        goal = map_hand_to_goal(&hand(-0.2, 0.1, 0.0), &c, &cfg, goal);
        let before = goal;
        c = clutch_transition(&c, true, &hand(-0.2, 0.1, 0.0), goal);
        let after = map_hand_to_goal(&hand(-0.2, 0.1, 0.0), &c, &cfg, goal);
        assert_eq!(before, after);
    }

    #[test]
    fn resample_on_grid_is_identity() {
        let dt = 1.0 / 120.0;
        let s: Vec<_> = (0..10)
            .map(|k| HandPose::new(Vec3::new(k as f64, 0.0, 0.0), k as f64 * dt))
            .collect();
        let r = resample_input(&s, dt).unwrap();
        assert_eq!(r.samples, s);
        assert!(r.stale.iter().all(|&x| !x));
    }

    #[test]
    fn resample_sixty_hz_holds_two_ticks() {
        let dt = 1.0 / 120.0;
        let s: Vec<_> = (0..5)
            .map(|k| HandPose::new(Vec3::new(k as f64, 0.0, 0.0), k as f64 / 60.0))
            .collect();
        let r = resample_input(&s, dt).unwrap();
        let xs: Vec<f64> = r.samples.iter().map(|p| p.position.x).collect();
        assert_eq!(xs, vec![0.0, 0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 4.0]);
    }

    #[test]
    fn half_second_gap_goes_stale_at_quarter_second() {
        let dt = 1.0 / 120.0;
        let s: Vec<HandPose<f64>> = vec![
            HandPose::new(Vec3::new(0.0, 0.0, 0.0), 0.0),
            HandPose::new(Vec3::new(1.0, 0.0, 0.0), 0.5),
        ];
        let r = resample_input(&s, dt).unwrap();
        assert_eq!(r.len(), 61);
        let first_stale = r.stale.iter().position(|&x| x).unwrap();
        assert!((r.samples[first_stale].timestamp - 0.25).abs() < 1e-12);
        assert!(r.stale[first_stale..60].iter().all(|&x| x));
        assert!(!r.stale[60]);
        assert!(r.samples[..60].iter().all(|p| p.position.x == 0.0));
    }

    #[test]
    fn resample_edge_cases() {
        assert!(resample_input::<f64>(&[], 0.01).unwrap().is_empty());
        let bad = vec![hand(0.0, 0.0, 0.0), HandPose::new(Vec3::zero(), -1.0)];
        assert!(resample_input(&bad, 0.01).is_err());
        assert!(resample_input(&[hand(0.0, 0.0, 0.0)], 0.0).is_err());
    }
}
