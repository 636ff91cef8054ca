//! What a session drives. The simulator is the only implementation; a
//! hardware drone would slot in behind the same trait.

use hapticopter_core::haptics::HapticCue;
use hapticopter_core::runner::{ClosedLoop, LoopConfig, TickInput, TickReport};
use hapticopter_core::sim::DroneState;
use hapticopter_core::teleop::MappingConfig;
use hapticopter_core::trial::TrialLog;
use hapticopter_core::world::Scenario;
use hapticopter_core::{Result, Vec3};

pub trait Backend: Send {
    fn scenario(&self) -> &Scenario<f64>;
    fn config(&self) -> &LoopConfig<f64>;
    /// Replaces the world and puts the drone back at the spawn point.
    fn load(&mut self, scenario: Scenario<f64>) -> Result<()>;
    fn reset_goal(&mut self);
    fn step(&mut self, input: &TickInput<f64>) -> Result<TickReport<f64>>;
    fn state(&self) -> &DroneState<f64>;
    fn goal(&self) -> Vec3<f64>;
    fn clutch_engaged(&self) -> bool;
    fn cue(&self) -> &HapticCue<f64>;
    fn is_complete(&self) -> bool;
    fn log(&self) -> &TrialLog<f64>;
}

#[derive(Debug, Clone)]
pub struct SimBackend {
    lp: ClosedLoop<f64>,
}

impl SimBackend {
    pub fn new(scenario: &Scenario<f64>, config: &LoopConfig<f64>) -> Result<Self> {
        Ok(Self {
            lp: ClosedLoop::new(scenario, config)?,
        })
    }

    pub fn into_log(self) -> TrialLog<f64> {
        self.lp.into_log()
    }
}

impl Backend for SimBackend {
    fn scenario(&self) -> &Scenario<f64> {
        self.lp.scenario()
    }

    fn config(&self) -> &LoopConfig<f64> {
        self.lp.config()
    }

    fn load(&mut self, scenario: Scenario<f64>) -> Result<()> {
        let old = self.lp.config();
        // keep gains, cue law and scale; the goal box follows the new room
        let config = LoopConfig {
            mapping: MappingConfig::new(old.mapping.scale, old.mapping.mode, &scenario.world.room)?,
            ..old.clone()
        };
        self.lp = ClosedLoop::new(&scenario, &config)?;
        Ok(())
    }

    fn reset_goal(&mut self) {
        self.lp.reset_goal();
    }

    fn step(&mut self, input: &TickInput<f64>) -> Result<TickReport<f64>> {
        self.lp.step(input)
    }

    fn state(&self) -> &DroneState<f64> {
        self.lp.state()
    }

    fn goal(&self) -> Vec3<f64> {
        self.lp.goal()
    }

    fn clutch_engaged(&self) -> bool {
        self.lp.clutch().engaged
    }

    fn cue(&self) -> &HapticCue<f64> {
        self.lp.cue()
    }

    fn is_complete(&self) -> bool {
        self.lp.is_complete()
    }

    fn log(&self) -> &TrialLog<f64> {
        self.lp.log()
    }
}
