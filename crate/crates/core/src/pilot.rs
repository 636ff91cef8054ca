//! Scripted stand-ins for a human pilot.
//!
//! A pilot keeps its own commanded goal, walks it toward the current
//! waypoint at a bounded speed, and emits the hand pose that maps to that
//! goal. `NoisyDepth` misjudges every waypoint's X coordinate by a per-trial
//! Gaussian offset. `HapticReactive` adds cue-driven backoff and, when
//! approaching a wall, trusts the front cue over its biased depth estimate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::haptics::HapticCue;
use crate::sensing::Direction;
use crate::teleop::HandPose;
use crate::world::{Scenario, Task};
use crate::{Scalar, Vec3};

/// Distance (m) of the pre- and post-gate waypoints from a gate plane.
pub const GATE_LEAD: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PilotKind {
    Waypoint,
    NoisyDepth,
    HapticReactive,
}

impl PilotKind {
    pub const ALL: [PilotKind; 3] = [PilotKind::Waypoint, PilotKind::NoisyDepth, PilotKind::HapticReactive];

    pub fn name(self) -> &'static str {
        match self {
            PilotKind::Waypoint => "Waypoint",
            PilotKind::NoisyDepth => "NoisyDepth",
            PilotKind::HapticReactive => "HapticReactive",
        }
    }
}

impl std::fmt::Display for PilotKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PilotKind {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        PilotKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| crate::Error::Parse(format!("unknown pilot `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", deny_unknown_fields)]
pub struct PilotParams<S> {
    /// World-frame route. Empty means the task's default route.
    #[serde(default)]
    pub waypoints: Vec<Vec3<S>>,
    /// Std of the per-trial depth bias (m).
    pub sigma: S,
    /// Cue level above which the pilot backs off.
    pub rho: S,
    /// Front cue level at which a wall approach stops advancing.
    pub rho_hold: S,
    /// Backoff speed (m/s) at full cue intensity.
    pub backoff_speed: S,
    /// Goal speed (m/s) toward the current waypoint.
    pub speed: S,
    pub capture_radius: S,
    /// Wall-approach stand-off (m, drone center to wall face) aimed for
    /// by the default route.
    pub standoff: S,
    /// Cue law constants the pilot uses to read distance from intensity.
    pub max_intensity: S,
    pub threshold: S,
}

impl<S: Scalar> Default for PilotParams<S> {
    fn default() -> Self {
        Self {
            waypoints: Vec::new(),
            sigma: S::lit(0.3),
            rho: S::lit(0.6),
            rho_hold: S::lit(0.8),
            backoff_speed: S::one(),
            speed: S::lit(0.4),
            capture_radius: S::lit(0.15),
            standoff: S::lit(0.8),
            max_intensity: S::one(),
            threshold: S::lit(0.5),
        }
    }
}

impl<S: Scalar> PilotParams<S> {
    pub fn validate(&self) -> Result<()> {
        let m = self.max_intensity;
        if !(m.is_finite() && m > S::zero() && self.threshold > S::zero()) {
            return Err(domain("cue constants must be positive"));
        }
        if !(self.rho > S::zero() && self.rho <= m && self.rho_hold > S::zero() && self.rho_hold <= m) {
            return Err(domain("cue thresholds must lie in (0, M]"));
        }
        if !(self.sigma >= S::zero() && self.sigma.is_finite()) {
            return Err(domain("depth noise sigma must be >= 0"));
        }
        for (name, v) in [
            ("speed", self.speed),
            ("capture_radius", self.capture_radius),
            ("standoff", self.standoff),
        ] {
            if !(v.is_finite() && v > S::zero()) {
                return Err(domain(format!("{name} must be positive")));
            }
        }
        if !(self.backoff_speed.is_finite() && self.backoff_speed >= S::zero()) {
            return Err(domain("backoff_speed must be >= 0"));
        }
        if self.waypoints.iter().any(|w| !w.is_finite()) {
            return Err(domain("waypoints must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", deny_unknown_fields)]
pub struct PilotPolicy<S> {
    pub kind: PilotKind,
    pub params: PilotParams<S>,
    pub seed: u64,
}

/// Route used when the policy gives none: a stand-off point for the wall,
/// and a pre/post point on either side of each gate in order.
pub fn default_route<S: Scalar>(scenario: &Scenario<S>, standoff: S) -> Result<Vec<Vec3<S>>> {
    match scenario.task {
        Task::WallApproach => {
            let face = scenario
                .target_wall_box()
                .ok_or_else(|| domain("wall approach needs a target wall"))?
                .min
                .x;
            Ok(vec![Vec3::new(face - standoff, scenario.spawn.y, scenario.spawn.z)])
        }
        Task::GateCourse | Task::LateralGate | Task::VerticalGate => {
            let lead = S::lit(GATE_LEAD);
            let mut from = scenario.spawn;
            let mut route = Vec::with_capacity(2 * scenario.gate_order.len());
            for id in &scenario.gate_order {
                let gate = scenario
                    .world
                    .gate(*id)
                    .ok_or_else(|| domain(format!("unknown gate {id}")))?;
                let c = gate.opening_center();
                let a = gate.plane.axis;
                let sign = if c[a] >= from[a] { S::one() } else { -S::one() };
                let mut pre = c;
                let mut post = c;
                pre[a] = c[a] - sign * lead;
                post[a] = c[a] + sign * lead;
                route.push(pre);
                route.push(post);
                from = post;
            }
            Ok(route)
        }
    }
}

/// Per-trial depth bias drawn from `N(0, sigma)` with the trial seed.
pub fn depth_bias<S: Scalar>(sigma: S, seed: u64) -> Result<S> {
    if sigma == S::zero() {
        return Ok(S::zero());
    }
    let normal = Normal::new(0.0, sigma.as_f64()).map_err(|e| domain(e.to_string()))?;
    Ok(S::lit(normal.sample(&mut ChaCha8Rng::seed_from_u64(seed))))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation<S> {
    pub position: Vec3<S>,
    pub time: S,
}

#[derive(Debug, Clone)]
pub struct Pilot<S> {
    kind: PilotKind,
    params: PilotParams<S>,
    route: Vec<Vec3<S>>,
    bias: S,
    index: usize,
    goal: Vec3<S>,
    scale: S,
    approach: bool,
}

impl<S: Scalar> Pilot<S> {
    /// `scale` converts the commanded goal back to operator-frame hand
    /// coordinates.
    pub fn new(policy: &PilotPolicy<S>, scenario: &Scenario<S>, scale: S) -> Result<Self> {
        policy.params.validate()?;
        if !(scale.is_finite() && scale > S::zero()) {
            return Err(domain("pilot scale must be positive"));
        }
        let route = if policy.params.waypoints.is_empty() {
            default_route(scenario, policy.params.standoff)?
        } else {
            policy.params.waypoints.clone()
        };
        if route.is_empty() {
            return Err(domain("pilot route is empty"));
        }
        let bias = match policy.kind {
            PilotKind::Waypoint => S::zero(),
            PilotKind::NoisyDepth | PilotKind::HapticReactive => depth_bias(policy.params.sigma, policy.seed)?,
        };
        Ok(Self {
            kind: policy.kind,
            params: policy.params.clone(),
            route,
            bias,
            index: 0,
            goal: scenario.spawn,
            scale,
            approach: scenario.task == Task::WallApproach,
        })
    }

    pub fn bias(&self) -> S {
        self.bias
    }

    pub fn goal(&self) -> Vec3<S> {
        self.goal
    }

    pub fn waypoint_index(&self) -> usize {
        self.index
    }

    pub fn route(&self) -> &[Vec3<S>] {
        &self.route
    }

    fn perceived(&self, i: usize) -> Vec3<S> {
        let mut w = self.route[i];
        w.x = w.x + self.bias;
        w
    }

    /// Advances one tick and returns the hand pose to send.
    pub fn step(&mut self, obs: &Observation<S>, cue: &HapticCue<S>, dt: S) -> HandPose<S> {
        let p = &self.params;
        if self.index + 1 < self.route.len() && obs.position.distance(self.perceived(self.index)) < p.capture_radius {
            self.index += 1;
        }
        let mut target = self.perceived(self.index);
        let haptic = self.kind == PilotKind::HapticReactive;
        let front = cue.get(Direction::Front);

        if haptic && self.approach && front > S::zero() {
            // read the true distance off the front tactor
            let held = p.max_intensity * p.threshold / p.rho_hold;
            target.x = if front < p.max_intensity {
                obs.position.x + p.max_intensity * p.threshold / front - held
            } else {
                target.x.min(obs.position.x)
            };
        }

        let before = self.goal;
        let mut next = before + (target - before).clamp_norm(p.speed * dt);
        if haptic {
            let span = p.max_intensity - p.rho;
            for d in Direction::ALL {
                let c = cue.get(d);
                if c > p.rho && span > S::zero() {
                    next -= d.unit::<S>() * (p.backoff_speed * (c - p.rho) / span * dt);
                }
            }
            if self.approach && front >= p.rho_hold && next.x > before.x {
                next.x = before.x;
            }
        }
        self.goal = next;
        HandPose::new(next * (S::one() / self.scale), obs.time)
    }
}
