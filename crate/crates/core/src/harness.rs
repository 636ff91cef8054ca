//! Batch runner: scripted pilots flying scenarios for many seeded trials.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::metrics::{summarize_trial, MetricsSummary, ResultRow};
use crate::pilot::{Observation, Pilot, PilotKind, PilotParams, PilotPolicy};
use crate::runner::{ClosedLoop, LoopConfig, TickInput};
use crate::trial::TrialLog;
use crate::world::Scenario;
use crate::Scalar;

/// Default per-trial time budget (s).
pub const DEFAULT_DURATION_LIMIT: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct ExperimentConfig<S: Scalar> {
    pub scenario: Scenario<S>,
    /// `policy.seed` is the base seed; trial `i` uses `seed ^ i`.
    pub policy: PilotPolicy<S>,
    pub repetitions: usize,
    pub loop_config: LoopConfig<S>,
}

impl<S: Scalar> ExperimentConfig<S> {
    pub fn new(
        scenario: Scenario<S>,
        kind: PilotKind,
        params: PilotParams<S>,
        base_seed: u64,
        repetitions: usize,
    ) -> Result<Self> {
        let loop_config = LoopConfig::for_scenario(&scenario, S::lit(DEFAULT_DURATION_LIMIT))?;
        let c = Self {
            scenario,
            policy: PilotPolicy {
                kind,
                params,
                seed: base_seed,
            },
            repetitions,
            loop_config,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_duration_limit(mut self, limit: S) -> Self {
        self.loop_config.duration_limit = limit;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(domain("repetitions must be >= 1"));
        }
        self.scenario.validate()?;
        self.policy.params.validate()?;
        self.loop_config.validate()
    }

    pub fn trial_seed(&self, trial_index: usize) -> u64 {
        self.policy.seed ^ trial_index as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrialReason {
    Finished,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct TrialResult<S> {
    pub log: TrialLog<S>,
    pub completed: bool,
    pub reason: TrialReason,
    pub seed: u64,
}

pub fn run_trial<S: Scalar>(config: &ExperimentConfig<S>, trial_index: usize) -> Result<TrialResult<S>> {
    config.validate()?;
    let seed = config.trial_seed(trial_index);
    let policy = PilotPolicy {
        seed,
        ..config.policy.clone()
    };
    let mut lp = ClosedLoop::new(&config.scenario, &config.loop_config)?;
    let mut pilot = Pilot::new(&policy, &config.scenario, config.loop_config.mapping.scale)?;
    let dt = config.loop_config.sim.dt;
    let reason = loop {
        if lp.is_complete() {
            break TrialReason::Finished;
        }
        if lp.is_timed_out() {
            break TrialReason::Timeout;
        }
        let obs = Observation {
            position: lp.state().position,
            time: lp.state().time,
        };
        let hand = pilot.step(&obs, lp.cue(), dt);
        let first = lp.ticks() == 0;
        lp.step(&TickInput {
            hand: Some(hand),
            clutch: first.then_some(true),
            stale: false,
        })?;
    };
    Ok(TrialResult {
        log: lp.into_log(),
        completed: reason == TrialReason::Finished,
        reason,
        seed,
    })
}

#[derive(Debug, Clone)]
pub struct ExperimentRow<S> {
    pub config_index: usize,
    pub trial: usize,
    pub seed: u64,
    pub outcome: Result<TrialResult<S>, Error>,
}

/// Runs every repetition of every config. Rows come back in
/// (config, trial) order whatever the execution order was; a failing trial
/// is reported in its row and does not stop the batch.
pub fn run_experiment<S: Scalar>(configs: &[ExperimentConfig<S>]) -> Result<Vec<ExperimentRow<S>>> {
    if configs.is_empty() {
        return Err(domain("no experiment configs"));
    }
    for c in configs {
        c.validate()?;
    }
    let cells: Vec<(usize, usize)> = configs
        .iter()
        .enumerate()
        .flat_map(|(ci, c)| (0..c.repetitions).map(move |t| (ci, t)))
        .collect();
    Ok(cells
        .into_par_iter()
        .map(|(ci, t)| ExperimentRow {
            config_index: ci,
            trial: t,
            seed: configs[ci].trial_seed(t),
            outcome: run_trial(&configs[ci], t),
        })
        .collect())
}

/// Summaries per row, in row order.
pub fn summarize_rows<S: Scalar>(
    configs: &[ExperimentConfig<S>],
    rows: &[ExperimentRow<S>],
) -> Vec<Result<MetricsSummary<S>>> {
    rows.iter()
        .map(|r| match &r.outcome {
            Ok(t) => summarize_trial(&t.log, &configs[r.config_index].scenario),
            Err(e) => Err(e.clone()),
        })
        .collect()
}

/// Results-table rows for every successful trial.
pub fn results_table<S: Scalar>(configs: &[ExperimentConfig<S>], rows: &[ExperimentRow<S>]) -> Vec<ResultRow> {
    rows.iter()
        .zip(summarize_rows(configs, rows))
        .filter_map(|(r, m)| {
            let m = m.ok()?;
            let c = &configs[r.config_index];
            Some(ResultRow::from_summary(r.trial, c.scenario.task, c.policy.kind.name(), r.seed, &m))
        })
        .collect()
}
