//! Subcommand implementations shared by the binary and the test suites.

use crate::csvio;
use crate::stats::TimingStats;
use powershift::{
    simulate_ct, simulate_discrete, CtError, CtSolverConfig, CtTraceSample, Scenario, StepRecord,
};
use std::path::Path;
use std::time::Instant;
use thiserror::Error;

/// Errors mapped onto process exit codes: usage/validation 1, I/O 2, solver 3.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl From<CtError> for CliError {
    fn from(e: CtError) -> Self {
        match e {
            CtError::InvalidConfig(_) | CtError::Domain { .. } => {
                CliError::Validation(e.to_string())
            }
            CtError::StepSizeUnderflow { .. } | CtError::EventOverflow { .. } => {
                CliError::Solver(e.to_string())
            }
        }
    }
}

/// One row of the step-size convergence study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub ts: f64,
    /// Max over the discrete sampling instants of |w2_discrete - w2_reference|.
    pub sup_err_w2: f64,
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Scenario::parse(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn write_out(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Fixed-step trace for the scenario's own step size.
pub fn run_discrete(scenario: &Scenario) -> Result<Vec<StepRecord>, CliError> {
    simulate_discrete(&scenario.params, scenario, scenario.w0, scenario.n_steps())
        .map_err(|e| CliError::Validation(e.to_string()))
}

pub fn run_reference(
    scenario: &Scenario,
    cfg: &CtSolverConfig,
) -> Result<Vec<CtTraceSample>, CliError> {
    Ok(simulate_ct(
        &scenario.params,
        scenario,
        scenario.w0,
        scenario.t_end,
        cfg,
    )?)
}

pub fn cmd_run(scenario_path: &Path, out_path: &Path) -> Result<(), CliError> {
    let scenario = load_scenario(scenario_path)?;
    let records = run_discrete(&scenario)?;
    write_out(out_path, &csvio::trace_csv(&records))
}

pub fn cmd_ref(
    scenario_path: &Path,
    out_path: &Path,
    cfg: &CtSolverConfig,
) -> Result<(), CliError> {
    let scenario = load_scenario(scenario_path)?;
    let samples = run_reference(&scenario, cfg)?;
    write_out(out_path, &csvio::ref_csv(&samples, &scenario))
}

/// Piecewise-linear interpolation of the reference `w2` at time `t`.
fn ref_w2_at(samples: &[CtTraceSample], t: f64) -> f64 {
    let hi = samples.partition_point(|s| s.t <= t);
    if hi == 0 {
        return samples[0].w.w2;
    }
    if hi >= samples.len() {
        return samples[samples.len() - 1].w.w2;
    }
    let s0 = &samples[hi - 1];
    let s1 = &samples[hi];
    let theta = (t - s0.t) / (s1.t - s0.t);
    s0.w.w2 + theta * (s1.w.w2 - s0.w.w2)
}

/// Run the reference once, then the discrete model per step size, and report
/// the sup-norm output-speed error for each.
pub fn compare_rows(scenario: &Scenario, ts_list: &[f64]) -> Result<Vec<ConvergenceRow>, CliError> {
    if ts_list.is_empty() {
        return Err(CliError::Usage("--ts list must not be empty".into()));
    }
    for &ts in ts_list {
        if ts <= 0.0 || !ts.is_finite() {
            return Err(CliError::Usage(format!(
                "step sizes must be strictly positive, got {ts}"
            )));
        }
    }

    let ref_cfg = CtSolverConfig {
        rel_tol: 1e-8,
        abs_tol: 1e-10,
        max_step: 1e-3,
        event_tol: 1e-9,
    };
    let reference = run_reference(scenario, &ref_cfg)?;

    let mut rows = Vec::with_capacity(ts_list.len());
    for &ts in ts_list {
        let params = scenario
            .params
            .with_step_size(ts)
            .map_err(|e| CliError::Validation(e.to_string()))?;
        let n_steps = scenario.n_steps_for(ts);
        let records = simulate_discrete(&params, scenario, scenario.w0, n_steps)
            .map_err(|e| CliError::Validation(e.to_string()))?;
        let sup_err_w2 = records
            .iter()
            .map(|r| (r.w.w2 - ref_w2_at(&reference, r.t)).abs())
            .fold(0.0, f64::max);
        rows.push(ConvergenceRow { ts, sup_err_w2 });
    }
    Ok(rows)
}

pub fn cmd_compare(scenario_path: &Path, ts_list: &[f64], out_path: &Path) -> Result<(), CliError> {
    let scenario = load_scenario(scenario_path)?;
    let rows = compare_rows(&scenario, ts_list)?;
    write_out(out_path, &csvio::convergence_csv(&rows))
}

/// Time repeated whole runs of the discrete simulation.
///
/// Each execution is timed with a monotonic clock and divided by the step
/// count; a warm-up run is excluded from the statistics. Also returns the
/// final execution's trace so callers can check that timing is
/// observation-only.
pub fn bench_run(
    scenario: &Scenario,
    executions: usize,
) -> Result<(TimingStats, Vec<StepRecord>), CliError> {
    if executions < 1 {
        return Err(CliError::Usage("--executions must be at least 1".into()));
    }
    let warmup = run_discrete(scenario)?;
    let steps = warmup.len() - 1;
    std::hint::black_box(&warmup);

    let mut samples = Vec::with_capacity(executions);
    let mut last = warmup;
    for _ in 0..executions {
        let start = Instant::now();
        let records = run_discrete(scenario)?;
        let elapsed = start.elapsed();
        std::hint::black_box(&records);
        samples.push(elapsed.as_secs_f64() * 1e6 / steps.max(1) as f64);
        last = records;
    }
    Ok((TimingStats::from_samples(samples, steps), last))
}

pub fn cmd_bench(
    scenario_path: &Path,
    executions: usize,
    out_path: Option<&Path>,
) -> Result<TimingStats, CliError> {
    let scenario = load_scenario(scenario_path)?;
    let (stats, _) = bench_run(&scenario, executions)?;
    println!("executions: {}", stats.executions);
    println!("steps per execution: {}", stats.steps_per_execution);
    println!(
        "step time (us): q1 {:.3}, median {:.3}, q3 {:.3}",
        stats.q1_us, stats.median_us, stats.q3_us
    );
    if stats.outliers_us.is_empty() {
        println!("outliers (us): none");
    } else {
        let list: Vec<String> = stats
            .outliers_us
            .iter()
            .map(|x| format!("{x:.3}"))
            .collect();
        println!("outliers (us): {}", list.join(", "));
    }
    if let Some(path) = out_path {
        write_out(path, &csvio::bench_csv(&stats))?;
    }
    Ok(stats)
}
