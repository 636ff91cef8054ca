//! Fixed-step point-mass drone with a PID position loop and sphere contact.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::world::{contacts, ContactTarget, World};
use crate::{Scalar, Vec3};

/// Collision radius of the simulated vehicle (m).
pub const DRONE_RADIUS: f64 = 0.10;
/// Input and simulation rate (Hz).
pub const TICK_HZ: f64 = 120.0;

/// Extra distance beyond the radius within which an existing contact is
/// still considered ongoing. Only a fresh contact emits an event.
const CONTACT_MARGIN: f64 = 1.0e-3;
const MAX_RESOLVE_PASSES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", deny_unknown_fields)]
pub struct PidGains<S> {
    pub kp: S,
    pub ki: S,
    pub kd: S,
    /// Per-axis clamp on the error integral (m·s).
    pub i_max: S,
    /// Per-axis clamp on the commanded acceleration (m/s²).
    pub a_max: S,
}

impl<S: Scalar> Default for PidGains<S> {
    fn default() -> Self {
        Self {
            kp: S::lit(4.0),
            ki: S::lit(0.2),
            kd: S::lit(3.0),
            i_max: S::lit(0.01),
            a_max: S::lit(6.0),
        }
    }
}

impl<S: Scalar> PidGains<S> {
    pub fn validate(&self) -> Result<()> {
        let all = [self.kp, self.ki, self.kd, self.i_max, self.a_max];
        if all.iter().any(|g| !g.is_finite()) {
            return Err(domain("PID gains must be finite"));
        }
        if self.kp < S::zero() || self.ki < S::zero() || self.kd < S::zero() {
            return Err(domain("PID gains must be nonnegative"));
        }
        if self.i_max < S::zero() || self.a_max <= S::zero() {
            return Err(domain("i_max must be >= 0 and a_max > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct PidState<S> {
    pub integral: Vec3<S>,
    pub prev_error: Vec3<S>,
    pub initialized: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", deny_unknown_fields)]
pub struct SimConfig<S> {
    pub dt: S,
    /// Linear drag coefficient (1/s).
    pub drag: S,
    /// Speed limit (m/s).
    pub v_max: S,
    /// Collision sphere radius (m).
    pub radius: S,
}

impl<S: Scalar> Default for SimConfig<S> {
    fn default() -> Self {
        Self {
            dt: S::one() / S::lit(TICK_HZ),
            drag: S::lit(0.3),
            v_max: S::lit(2.0),
            radius: S::lit(DRONE_RADIUS),
        }
    }
}

impl<S: Scalar> SimConfig<S> {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > S::zero()) {
            return Err(domain("dt must be positive"));
        }
        if !(self.drag.is_finite() && self.drag >= S::zero()) {
            return Err(domain("drag must be nonnegative"));
        }
        if !(self.v_max.is_finite() && self.v_max > S::zero()) {
            return Err(domain("v_max must be positive"));
        }
        if !(self.radius.is_finite() && self.radius > S::zero()) {
            return Err(domain("radius must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct DroneState<S> {
    pub position: Vec3<S>,
    pub velocity: Vec3<S>,
    pub time: S,
    /// Targets currently touched, sorted. Used to emit one collision event
    /// per contact onset.
    #[serde(default)]
    pub touching: Vec<ContactTarget>,
}

impl<S: Scalar> DroneState<S> {
    pub fn at_rest(position: Vec3<S>) -> Self {
        Self {
            position,
            velocity: Vec3::zero(),
            time: S::zero(),
            touching: Vec::new(),
        }
    }

    fn check_finite(&self) -> Result<()> {
        if self.position.is_finite() && self.velocity.is_finite() && self.time.is_finite() {
            Ok(())
        } else {
            Err(domain("drone state must be finite"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct CollisionEvent<S> {
    pub time: S,
    pub target: ContactTarget,
    pub normal: Vec3<S>,
    pub depth: S,
}

/// One PID update on position error. The derivative term is zero on the
/// first call after construction.
pub fn pid_step<S: Scalar>(
    state: &PidState<S>,
    gains: &PidGains<S>,
    goal: Vec3<S>,
    measured: Vec3<S>,
    dt: S,
) -> Result<(Vec3<S>, PidState<S>)> {
    if !(goal.is_finite() && measured.is_finite()) {
        return Err(domain("PID goal and measurement must be finite"));
    }
    if !(dt.is_finite() && dt > S::zero()) {
        return Err(domain("PID dt must be positive"));
    }
    let error = goal - measured;
    let integral = (state.integral + error * dt).clamp_abs(gains.i_max);
    let derivative = if state.initialized {
        (error - state.prev_error) * (S::one() / dt)
    } else {
        Vec3::zero()
    };
    let accel = (error * gains.kp + integral * gains.ki + derivative * gains.kd).clamp_abs(gains.a_max);
    Ok((
        accel,
        PidState {
            integral,
            prev_error: error,
            initialized: true,
        },
    ))
}

/// Semi-implicit Euler step with linear drag and a speed clamp.
pub fn point_mass_step<S: Scalar>(
    state: &DroneState<S>,
    accel: Vec3<S>,
    config: &SimConfig<S>,
) -> Result<DroneState<S>> {
    state.check_finite()?;
    if !accel.is_finite() {
        return Err(domain("acceleration must be finite"));
    }
    let dt = config.dt;
    let velocity = (state.velocity + (accel - state.velocity * config.drag) * dt).clamp_norm(config.v_max);
    Ok(DroneState {
        position: state.position + velocity * dt,
        velocity,
        time: state.time + dt,
        touching: state.touching.clone(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickOutput<S> {
    pub state: DroneState<S>,
    pub pid: PidState<S>,
    pub collisions: Vec<CollisionEvent<S>>,
}

/// Pushes the sphere out of every penetrated target (deepest first) and
/// removes the velocity component pointing into each resolved surface.
/// Returns the deepest pre-resolution contact per target.
fn resolve_contacts<S: Scalar>(
    state: &mut DroneState<S>,
    radius: S,
    world: &World<S>,
) -> Vec<crate::world::Contact<S>> {
    let mut resolved: Vec<crate::world::Contact<S>> = Vec::new();
    for _ in 0..MAX_RESOLVE_PASSES {
        let Some(c) = contacts(state.position, radius, world)
            .into_iter()
            .fold(None, |best: Option<crate::world::Contact<S>>, c| match best {
                Some(b) if b.depth >= c.depth => Some(b),
                _ => Some(c),
            })
        else {
            break;
        };
        state.position += c.normal * c.depth;
        let vn = state.velocity.dot(c.normal);
        if vn < S::zero() {
            state.velocity -= c.normal * vn;
        }
        if !resolved.iter().any(|r| r.target == c.target) {
            resolved.push(c);
        }
    }
    resolved
}

/// Advances one fixed step: PID on the goal, dynamics, then contact
/// response against `world`.
pub fn sim_tick<S: Scalar>(
    state: &DroneState<S>,
    goal: Vec3<S>,
    pid: &PidState<S>,
    gains: &PidGains<S>,
    config: &SimConfig<S>,
    world: &World<S>,
) -> Result<TickOutput<S>> {
    let (accel, pid) = pid_step(pid, gains, goal, state.position, config.dt)?;
    let mut next = point_mass_step(state, accel, config)?;
    let resolved = resolve_contacts(&mut next, config.radius, world);

    let mut touching: Vec<ContactTarget> = contacts(
        next.position,
        config.radius + S::lit(CONTACT_MARGIN),
        world,
    )
    .into_iter()
    .map(|c| c.target)
    .filter(|t| state.touching.binary_search(t).is_ok())
    .chain(resolved.iter().map(|c| c.target))
    .collect();
    touching.sort_unstable();
    touching.dedup();

    let collisions = resolved
        .iter()
        .filter(|c| state.touching.binary_search(&c.target).is_err())
        .map(|c| CollisionEvent {
            time: next.time,
            target: c.target,
            normal: c.normal,
            depth: c.depth,
        })
        .collect();
    next.touching = touching;
    Ok(TickOutput {
        state: next,
        pid,
        collisions,
    })
}
