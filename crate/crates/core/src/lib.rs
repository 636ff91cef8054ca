//! Simulation, sensing, haptic cue synthesis, teleoperation mapping and
//! experiment analysis for a haptically-guided indoor drone.
//!
//! Everything numeric is generic over [`Scalar`]; the `*f` aliases below fix
//! it to `f64`, which is what the binaries use.

pub mod error;
pub mod haptics;
pub mod harness;
pub mod metrics;
pub mod pilot;
pub mod runner;
pub mod scalar;
pub mod sensing;
pub mod sim;
pub mod stats;
pub mod teleop;
pub mod trial;
pub mod vec3;
pub mod world;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use vec3::{Axis, Vec3};

pub type Vec3f = Vec3<f64>;
pub type Aabbf = world::Aabb<f64>;
pub type Worldf = world::World<f64>;
pub type Scenariof = world::Scenario<f64>;
pub type DroneStatef = sim::DroneState<f64>;
pub type PidGainsf = sim::PidGains<f64>;
pub type SimConfigf = sim::SimConfig<f64>;
pub type RangeReadingf = sensing::RangeReading<f64>;
pub type HapticCuef = haptics::HapticCue<f64>;
pub type CueParamsf = haptics::CueParams<f64>;
pub type HandPosef = teleop::HandPose<f64>;
pub type MappingConfigf = teleop::MappingConfig<f64>;
pub type TrialLogf = trial::TrialLog<f64>;
pub type MetricsSummaryf = metrics::MetricsSummary<f64>;
