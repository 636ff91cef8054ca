//! Subcommands of the `hapticopter` binary. Each returns its report as a
//! value so it can be checked without spawning a process.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use hapticopter_core::harness::{run_experiment, results_table, ExperimentConfig, TrialReason};
use hapticopter_core::haptics::{pulse_schedule, PulseConfig, PulseTrial};
use hapticopter_core::metrics::{read_results, summarize_trial, write_results, ResultRow};
use hapticopter_core::pilot::{PilotKind, PilotParams};
use hapticopter_core::stats::{kruskal_wallis, levene, Dof, LeveneCenter};
use hapticopter_core::world::{build_scenario, Scenario, ScenarioParams, Task};
use hapticopter_core::{Error, Result};
use hapticopter_gateway::{replay_session, SessionRecord};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "hapticopter", version, about = "Haptic drone teleoperation simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run repeated trials of one pilot policy and write a results table.
    Run(RunArgs),
    /// Compare two results tables metric by metric.
    Compare(CompareArgs),
    /// Run a k-sample test on one column of a results table.
    Stats(StatsArgs),
    /// Serve live sessions over WebSocket at /session.
    Serve(ServeArgs),
    /// Re-run a recorded session and write its metrics row.
    Replay(ReplayArgs),
    /// Print a seeded random pulse schedule as JSON.
    Pulses(PulsesArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Scenario JSON file or a builtin task name.
    #[arg(long)]
    pub scenario: String,
    #[arg(long, value_parser = parse_kind)]
    pub policy: PilotKind,
    #[arg(long, default_value_t = 20)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory; receives results.csv.
    #[arg(long)]
    pub out: PathBuf,
    /// Depth-noise std (m).
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Per-trial time budget (s).
    #[arg(long)]
    pub duration_limit: Option<f64>,
    /// Exit with status 2 if any trial times out.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub baseline: PathBuf,
    #[arg(long)]
    pub treatment: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestKind {
    KruskalWallis,
    Levene,
    BrownForsythe,
}

impl TestKind {
    fn label(self) -> &'static str {
        match self {
            TestKind::KruskalWallis => "kruskal-wallis",
            TestKind::Levene => "levene",
            TestKind::BrownForsythe => "brown-forsythe",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GroupBy {
    Policy,
    Task,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Results table (CSV).
    pub table: PathBuf,
    /// Column to test, e.g. time_s, distance_m, collisions, cross_x.
    #[arg(long)]
    pub metric: String,
    #[arg(long, value_enum, default_value_t = TestKind::KruskalWallis)]
    pub test: TestKind,
    #[arg(long, value_enum, default_value_t = GroupBy::Policy)]
    pub by: GroupBy,
    /// Only use rows of this task.
    #[arg(long)]
    pub task: Option<String>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Scenario JSON file or a builtin task name.
    #[arg(long, default_value = "GateCourse")]
    pub scenario: String,
    /// Bind address.
    #[arg(long, default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub record: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PulsesArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
}

fn parse_kind(s: &str) -> Result<PilotKind> {
    s.parse()
}

/// Loads `arg` as a file if it exists, else as a builtin task name.
pub fn resolve_scenario(arg: &str) -> Result<Scenario<f64>> {
    let path = Path::new(arg);
    if path.is_file() {
        return Scenario::load(path);
    }
    let task: Task = arg.parse().map_err(|_| {
        Error::Parse(format!("`{arg}` is neither a scenario file nor one of {:?}", Task::ALL.map(Task::name)))
    })?;
    build_scenario(task, &ScenarioParams::default())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub rows: Vec<ResultRow>,
    pub timeouts: usize,
    pub failures: Vec<String>,
    pub table: PathBuf,
}

pub fn run(args: &RunArgs) -> Result<RunOutcome> {
    let scenario = resolve_scenario(&args.scenario)?;
    let mut params = PilotParams::default();
    if let Some(s) = args.sigma {
        params.sigma = s;
    }
    let mut config = ExperimentConfig::new(scenario, args.policy, params, args.seed, args.reps)?;
    if let Some(l) = args.duration_limit {
        config = config.with_duration_limit(l);
    }
    let configs = [config];
    let results = run_experiment(&configs)?;
    let timeouts = results
        .iter()
        .filter(|r| matches!(&r.outcome, Ok(t) if t.reason == TrialReason::Timeout))
        .count();
    let failures = results
        .iter()
        .filter_map(|r| r.outcome.as_ref().err().map(|e| format!("trial {}: {e}", r.trial)))
        .collect();
    let rows = results_table(&configs, &results);
    std::fs::create_dir_all(&args.out)?;
    let table = args.out.join("results.csv");
    write_results(&rows, File::create(&table)?)?;
    Ok(RunOutcome {
        rows,
        timeouts,
        failures,
        table,
    })
}

pub fn load_table(path: &Path) -> Result<Vec<ResultRow>> {
    read_results(BufReader::new(File::open(path)?))
}

/// Numeric value of a results-table column, `None` when the cell is empty.
pub fn metric_value(row: &ResultRow, metric: &str) -> Result<Option<f64>> {
    Ok(match metric {
        "time_s" => Some(row.time_s),
        "distance_m" => Some(row.distance_m),
        "collisions" => Some(row.collisions as f64),
        "completed" => Some(if row.completed { 1.0 } else { 0.0 }),
        "min_wall_dist_m" => row.min_wall_dist_m,
        "cross_x" => row.cross_x,
        "cross_y" => row.cross_y,
        "cross_z" => row.cross_z,
        other => return Err(Error::Parse(format!("`{other}` is not a numeric results column"))),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub test: String,
    pub metric: String,
    pub groups: Vec<String>,
    pub n: Vec<usize>,
    pub statistic: f64,
    pub dof: Dof,
    pub p: f64,
}

pub fn test_groups(test: TestKind, metric: &str, groups: &[(String, Vec<f64>)]) -> Result<TestReport> {
    let data: Vec<Vec<f64>> = groups.iter().map(|(_, v)| v.clone()).collect();
    let r = match test {
        TestKind::KruskalWallis => kruskal_wallis(&data)?,
        TestKind::Levene => levene(&data, LeveneCenter::Mean)?,
        TestKind::BrownForsythe => levene(&data, LeveneCenter::Median)?,
    };
    Ok(TestReport {
        test: test.label().into(),
        metric: metric.into(),
        groups: groups.iter().map(|(k, _)| k.clone()).collect(),
        n: data.iter().map(Vec::len).collect(),
        statistic: r.statistic,
        dof: r.dof,
        p: r.p_value,
    })
}

pub fn stats(args: &StatsArgs) -> Result<TestReport> {
    let rows = load_table(&args.table)?;
    let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
    for row in &rows {
        if args.task.as_ref().is_some_and(|t| *t != row.task) {
            continue;
        }
        let Some(v) = metric_value(row, &args.metric)? else { continue };
        let key = match args.by {
            GroupBy::Policy => &row.policy,
            GroupBy::Task => &row.task,
        };
        match groups.iter_mut().find(|(k, _)| k == key) {
            Some((_, g)) => g.push(v),
            None => groups.push((key.clone(), vec![v])),
        }
    }
    test_groups(args.test, &args.metric, &groups)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricComparison {
    pub task: String,
    pub metric: String,
    pub baseline_mean: Option<f64>,
    pub treatment_mean: Option<f64>,
    pub baseline_variance: Option<f64>,
    pub treatment_variance: Option<f64>,
    /// Absent when either side has too few values for the test.
    pub kruskal_wallis: Option<TestReport>,
    pub levene: Option<TestReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub baseline_policy: Vec<String>,
    pub treatment_policy: Vec<String>,
    pub baseline_collisions: usize,
    pub treatment_collisions: usize,
    pub metrics: Vec<MetricComparison>,
}

const COMPARED: [&str; 5] = ["time_s", "distance_m", "collisions", "min_wall_dist_m", "cross_x"];

fn mean_var(v: &[f64]) -> (Option<f64>, Option<f64>) {
    if v.is_empty() {
        return (None, None);
    }
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = (v.len() > 1).then(|| v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0));
    (Some(m), var)
}

fn distinct(rows: &[ResultRow], f: impl Fn(&ResultRow) -> &String) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for r in rows {
        if !out.contains(f(r)) {
            out.push(f(r).clone());
        }
    }
    out
}

/// Per task and metric, the two tables side by side with both k-sample
/// tests on the pair.
pub fn compare_tables(baseline: &[ResultRow], treatment: &[ResultRow]) -> Result<Comparison> {
    let mut metrics = Vec::new();
    let mut tasks = distinct(baseline, |r| &r.task);
    for t in distinct(treatment, |r| &r.task) {
        if !tasks.contains(&t) {
            tasks.push(t);
        }
    }
    for task in &tasks {
        for metric in COMPARED {
            let pick = |rows: &[ResultRow]| -> Result<Vec<f64>> {
                let mut v = Vec::new();
                for r in rows.iter().filter(|r| &r.task == task) {
                    if let Some(x) = metric_value(r, metric)? {
                        v.push(x);
                    }
                }
                Ok(v)
            };
            let (b, t) = (pick(baseline)?, pick(treatment)?);
            if b.is_empty() && t.is_empty() {
                continue;
            }
            let groups = [("baseline".to_string(), b.clone()), ("treatment".to_string(), t.clone())];
            let (bm, bv) = mean_var(&b);
            let (tm, tv) = mean_var(&t);
            metrics.push(MetricComparison {
                task: task.clone(),
                metric: metric.into(),
                baseline_mean: bm,
                treatment_mean: tm,
                baseline_variance: bv,
                treatment_variance: tv,
                kruskal_wallis: test_groups(TestKind::KruskalWallis, metric, &groups).ok(),
                levene: test_groups(TestKind::Levene, metric, &groups).ok(),
            });
        }
    }
    Ok(Comparison {
        baseline_policy: distinct(baseline, |r| &r.policy),
        treatment_policy: distinct(treatment, |r| &r.policy),
        baseline_collisions: baseline.iter().map(|r| r.collisions).sum(),
        treatment_collisions: treatment.iter().map(|r| r.collisions).sum(),
        metrics,
    })
}

pub fn compare(args: &CompareArgs) -> Result<Comparison> {
    compare_tables(&load_table(&args.baseline)?, &load_table(&args.treatment)?)
}

/// Replays a session record and writes its single results row.
pub fn replay(args: &ReplayArgs) -> Result<ResultRow> {
    let record = SessionRecord::load(&args.record)?;
    let log = replay_session(&record)?;
    let scenario = &record.header.scenario;
    let summary = summarize_trial(&log, scenario)?;
    let row = ResultRow::from_summary(0, scenario.task, "Live", record.header.seed, &summary);
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_results(std::slice::from_ref(&row), File::create(&args.out)?)?;
    Ok(row)
}

pub fn pulses(args: &PulsesArgs) -> Result<Vec<PulseTrial<f64>>> {
    let c = PulseConfig::<f64>::default();
    pulse_schedule(args.seed, args.trials, c.wait_min, c.wait_max, c.duration)
}
