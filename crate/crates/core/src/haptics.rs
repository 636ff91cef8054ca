//! Vibrotactile cue synthesis from range readings, and the pulse schedule
//! used to validate tactor placement.
//!
//! Each tactor's intensity follows an inverse-distance law `i = M·T/d`,
//! saturated at `M` and silenced below a cutoff so far obstacles stay quiet.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::sensing::{Direction, RangeReading};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", deny_unknown_fields)]
pub struct CueParams<S> {
    /// Maximum intensity `M`.
    pub max_intensity: S,
    /// Distance threshold `T` (m) at which the cue saturates.
    pub threshold: S,
    /// Intensities below `cutoff * M` are zeroed.
    pub cutoff: S,
}

impl<S: Scalar> Default for CueParams<S> {
    fn default() -> Self {
        Self {
            max_intensity: S::one(),
            threshold: S::lit(0.5),
            cutoff: S::lit(0.15),
        }
    }
}

impl<S: Scalar> CueParams<S> {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_intensity.is_finite() && self.max_intensity > S::zero()) {
            return Err(domain("max intensity must be positive"));
        }
        if !(self.threshold.is_finite() && self.threshold > S::zero()) {
            return Err(domain("threshold must be positive"));
        }
        if !(self.cutoff >= S::zero() && self.cutoff <= S::one()) {
            return Err(domain("cutoff must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Intensity for a single obstacle distance.
    pub fn intensity(&self, distance: S) -> Result<S> {
        if !(distance >= S::zero()) {
            return Err(domain(format!("distance must be >= 0, got {distance}")));
        }
        let m = self.max_intensity;
        let i = if distance == S::zero() {
            m
        } else {
            (m * self.threshold / distance).min(m)
        };
        Ok(if i < self.cutoff * m { S::zero() } else { i })
    }

    /// Distance implied by an unsaturated, nonzero intensity.
    pub fn distance_for(&self, intensity: S) -> Option<S> {
        (intensity > S::zero() && intensity < self.max_intensity)
            .then(|| self.max_intensity * self.threshold / intensity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct HapticCue<S> {
    /// Indexed by [`Direction::index`], each in `[0, max]`.
    pub intensities: [S; 6],
    pub max: S,
}

impl<S: Scalar> HapticCue<S> {
    pub fn silent(max: S) -> Self {
        Self {
            intensities: [S::zero(); 6],
            max,
        }
    }

    pub fn get(&self, d: Direction) -> S {
        self.intensities[d.index()]
    }
}

pub fn cue_from_ranges<S: Scalar>(reading: &RangeReading<S>, params: &CueParams<S>) -> Result<HapticCue<S>> {
    params.validate()?;
    let mut intensities = [S::zero(); 6];
    for (out, &d) in intensities.iter_mut().zip(reading.distances.iter()) {
        *out = params.intensity(d)?;
    }
    Ok(HapticCue {
        intensities,
        max: params.max_intensity,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct PulseTrial<S> {
    pub direction: Direction,
    /// Onset time (s) from the start of the session.
    pub onset: S,
    pub duration: S,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseConfig<S> {
    pub n_trials: usize,
    pub wait_min: S,
    pub wait_max: S,
    pub duration: S,
}

impl<S: Scalar> Default for PulseConfig<S> {
    fn default() -> Self {
        Self {
            n_trials: 20,
            wait_min: S::lit(6.0),
            wait_max: S::lit(12.0),
            duration: S::lit(0.45),
        }
    }
}

/// Random single-tactor pulses. Each pulse is followed by a uniform wait in
/// `[wait_min, wait_max]` before the next onset; the first onset comes after
/// one such wait. Directions are uniform over the six tactors.
pub fn pulse_schedule<S: Scalar>(
    seed: u64,
    n_trials: usize,
    wait_min: S,
    wait_max: S,
    duration: S,
) -> Result<Vec<PulseTrial<S>>> {
    if n_trials == 0 {
        return Err(domain("n_trials must be positive"));
    }
    if !(wait_min > S::zero() && wait_min <= wait_max && wait_max.is_finite()) {
        return Err(domain("need 0 < wait_min <= wait_max"));
    }
    if !(duration > S::zero() && duration.is_finite()) {
        return Err(domain("pulse duration must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (wait_min.as_f64(), wait_max.as_f64());
    let mut t = S::zero();
    let mut out = Vec::with_capacity(n_trials);
    for k in 0..n_trials {
        let wait = S::lit(rng.random_range(lo..=hi));
        let direction = Direction::ALL[rng.random_range(0..6)];
        t = if k == 0 { wait } else { t + duration + wait };
        out.push(PulseTrial {
            direction,
            onset: t,
            duration,
        });
    }
    Ok(out)
}
