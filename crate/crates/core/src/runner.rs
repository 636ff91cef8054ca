//! The closed loop shared by scripted trials and live sessions:
//! hand input, mapping, PID and dynamics, sensing, cue.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::haptics::{cue_from_ranges, CueParams, HapticCue};
use crate::sensing::{sense_six, DEFAULT_MAX_RANGE};
use crate::sim::{sim_tick, DroneState, PidGains, PidState, SimConfig};
use crate::teleop::{clutch_transition, map_hand_to_goal, reset_goal, ClutchMode, ClutchState, HandPose, MappingConfig};
use crate::trial::{EventDetail, Sample, TaskMonitor, TrialEvent, TrialLog};
use crate::world::Scenario;
use crate::{Scalar, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", deny_unknown_fields)]
pub struct LoopConfig<S> {
    pub sim: SimConfig<S>,
    pub gains: PidGains<S>,
    pub mapping: MappingConfig<S>,
    pub cue: CueParams<S>,
    pub max_range: S,
    pub duration_limit: S,
}

impl<S: Scalar> LoopConfig<S> {
    /// Simulation preset for a scenario's room.
    pub fn for_scenario(scenario: &Scenario<S>, duration_limit: S) -> Result<Self> {
        Ok(Self {
            sim: SimConfig::default(),
            gains: PidGains::default(),
            mapping: MappingConfig::simulation(&scenario.world.room)?,
            cue: CueParams::default(),
            max_range: S::lit(DEFAULT_MAX_RANGE),
            duration_limit,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        self.gains.validate()?;
        self.cue.validate()?;
        if !(self.max_range.is_finite() && self.max_range > S::zero()) {
            return Err(domain("max_range must be positive"));
        }
        if !(self.duration_limit.is_finite() && self.duration_limit > S::zero()) {
            return Err(domain("duration_limit must be positive"));
        }
        Ok(())
    }

    /// Number of ticks that fit in the duration limit.
    pub fn tick_limit(&self) -> usize {
        (self.duration_limit / self.sim.dt).round().to_usize().unwrap_or(0)
    }
}

/// Operator input for one tick.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TickInput<S> {
    pub hand: Option<HandPose<S>>,
    /// `Some(true)` presses the clutch, `Some(false)` releases it.
    pub clutch: Option<bool>,
    /// Input is stale; the goal is frozen for this tick.
    pub stale: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickReport<S> {
    pub tick: usize,
    pub events: Vec<TrialEvent<S>>,
    pub complete: bool,
    pub timed_out: bool,
}

#[derive(Debug, Clone)]
pub struct ClosedLoop<S: Scalar> {
    scenario: Scenario<S>,
    config: LoopConfig<S>,
    state: DroneState<S>,
    pid: PidState<S>,
    clutch: ClutchState<S>,
    goal: Vec3<S>,
    last_hand: Option<HandPose<S>>,
    cue: HapticCue<S>,
    monitor: TaskMonitor<S>,
    log: TrialLog<S>,
    ticks: usize,
}

impl<S: Scalar> ClosedLoop<S> {
    pub fn new(scenario: &Scenario<S>, config: &LoopConfig<S>) -> Result<Self> {
        scenario.validate()?;
        config.validate()?;
        let state = DroneState::at_rest(scenario.spawn);
        let cue = cue_from_ranges(&sense_six(&state, &scenario.world, config.max_range)?, &config.cue)?;
        Ok(Self {
            scenario: scenario.clone(),
            config: config.clone(),
            state,
            pid: PidState::default(),
            clutch: ClutchState::released(config.mapping.mode),
            goal: reset_goal(scenario),
            last_hand: None,
            cue,
            monitor: TaskMonitor::new(scenario),
            log: TrialLog::new(scenario.task, config.sim.dt, config.duration_limit),
            ticks: 0,
        })
    }

    pub fn scenario(&self) -> &Scenario<S> {
        &self.scenario
    }

    pub fn config(&self) -> &LoopConfig<S> {
        &self.config
    }

    pub fn state(&self) -> &DroneState<S> {
        &self.state
    }

    pub fn goal(&self) -> Vec3<S> {
        self.goal
    }

    pub fn clutch(&self) -> &ClutchState<S> {
        &self.clutch
    }

    /// Cue at the current drone position.
    pub fn cue(&self) -> &HapticCue<S> {
        &self.cue
    }

    pub fn log(&self) -> &TrialLog<S> {
        &self.log
    }

    pub fn into_log(self) -> TrialLog<S> {
        self.log
    }

    pub fn ticks(&self) -> usize {
        self.ticks
    }

    pub fn is_complete(&self) -> bool {
        self.monitor.is_complete()
    }

    pub fn is_timed_out(&self) -> bool {
        self.ticks >= self.config.tick_limit()
    }

    pub fn set_clutch_mode(&mut self, mode: ClutchMode) {
        self.clutch.mode = mode;
        self.config.mapping.mode = mode;
    }

    /// Moves the goal back to the spawn point and releases the clutch.
    pub fn reset_goal(&mut self) {
        self.goal = reset_goal(&self.scenario);
        self.clutch = ClutchState::released(self.clutch.mode);
    }

    /// Advances one tick.
    pub fn step(&mut self, input: &TickInput<S>) -> Result<TickReport<S>> {
        if let Some(h) = input.hand {
            self.last_hand = Some(h);
        }
        if let Some(engage) = input.clutch {
            let hand = self.last_hand.unwrap_or(HandPose::new(Vec3::zero(), self.state.time));
            self.clutch = clutch_transition(&self.clutch, engage, &hand, self.goal);
        }
        let prev_goal = self.goal;
        if !input.stale {
            if let Some(h) = input.hand {
                self.goal = map_hand_to_goal(&h, &self.clutch, &self.config.mapping, self.goal);
            }
        }

        let prev_pos = self.state.position;
        let out = sim_tick(
            &self.state,
            self.goal,
            &self.pid,
            &self.config.gains,
            &self.config.sim,
            &self.scenario.world,
        )?;
        self.state = out.state;
        self.pid = out.pid;
        self.ticks += 1;
        let time = self.state.time;

        let mut events: Vec<TrialEvent<S>> = out.collisions.iter().map(TrialEvent::from).collect();
        events.extend(self.monitor.observe(
            time,
            self.config.sim.dt,
            prev_pos,
            self.state.position,
            prev_goal,
            self.goal,
        ));
        self.cue = cue_from_ranges(
            &sense_six(&self.state, &self.scenario.world, self.config.max_range)?,
            &self.config.cue,
        )?;
        self.log.push_sample(Sample {
            time,
            position: self.state.position,
            goal: self.goal,
            cue: self.cue.intensities,
            clutch_engaged: self.clutch.engaged,
        })?;
        for e in &events {
            self.log.push_event(*e)?;
        }
        let complete = events.iter().any(|e| matches!(e.detail, EventDetail::TaskComplete));
        Ok(TickReport {
            tick: self.ticks,
            events,
            complete,
            timed_out: !self.is_complete() && self.is_timed_out(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{build_scenario, ScenarioParams, Task};

    #[test]
    fn hover_at_spawn_without_input() {
        let s = build_scenario::<f64>(Task::GateCourse, &ScenarioParams::default()).unwrap();
        let cfg = LoopConfig::for_scenario(&s, 5.0).unwrap();
        let mut l = ClosedLoop::new(&s, &cfg).unwrap();
        while !l.is_timed_out() {
            l.step(&TickInput::default()).unwrap();
        }
        assert_eq!(l.ticks(), 600);
        assert!(l.state().position.distance(s.spawn) < 0.01);
        assert!(l.log().events.is_empty());
    }

    #[test]
    fn released_clutch_ignores_hand() {
        let s = build_scenario::<f64>(Task::WallApproach, &ScenarioParams::default()).unwrap();
        let cfg = LoopConfig::for_scenario(&s, 5.0).unwrap();
        let mut l = ClosedLoop::new(&s, &cfg).unwrap();
        for k in 0..50 {
            let hand = HandPose::new(Vec3::new(0.1 * k as f64, 0.0, 0.2), k as f64 / 120.0);
            l.step(&TickInput { hand: Some(hand), clutch: None, stale: false }).unwrap();
            assert_eq!(l.goal(), s.spawn);
        }
    }

    #[test]
    fn stale_input_freezes_goal() {
        let s = build_scenario::<f64>(Task::WallApproach, &ScenarioParams::default()).unwrap();
        let cfg = LoopConfig::for_scenario(&s, 5.0).unwrap();
        let mut l = ClosedLoop::new(&s, &cfg).unwrap();
        let hand = HandPose::new(Vec3::new(-0.25, 0.0, 0.15), 0.0);
        l.step(&TickInput { hand: Some(hand), clutch: Some(true), stale: false }).unwrap();
        let g = l.goal();
        assert_eq!(g, Vec3::new(-2.0, 0.0, 1.2));
        let moved = HandPose::new(Vec3::new(0.0, 0.0, 0.15), 0.5);
        l.step(&TickInput { hand: Some(moved), clutch: None, stale: true }).unwrap();
        assert_eq!(l.goal(), g);
    }
}
