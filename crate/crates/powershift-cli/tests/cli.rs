//! End-to-end tests of the command-line surface: argument handling, exit
//! codes, and the CSV contracts.

use powershift_cli::{bench_run, run_discrete};
use std::path::{Path, PathBuf};
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_powershift");
const PAPER_LIKE: &str = concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/../../scenarios/paper_like.scn"
);

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("powershift_cli_{name}_{}", std::process::id()))
}

fn zero_capacity_scenario() -> PathBuf {
    let path = tmp("zero_caps.scn");
    std::fs::write(
        &path,
        "\
[params]
j1 = 0.1
j2 = 0.5
ra = 3
rb = 2
ts = 0.02
w1_0 = 10 rad_s
w2_0 = 1 rad_s
t_end = 1

[schedule m1]
mode: hold
0 0.5

[schedule m2]
mode: hold
0 0

[schedule kca]
mode: hold
0 0

[schedule kcb]
mode: hold
0 0
",
    )
    .unwrap();
    path
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn run_emits_trace_with_header_and_row_count() {
    let out = tmp("run_trace.csv");
    let status = Command::new(BIN)
        .args(["run", PAPER_LIKE, "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let rows = read_csv(&out);
    assert_eq!(
        rows[0].join(","),
        "k,t,w1,w2,delta_a,delta_b,m_ca,m_cb,k_ca,k_cb,lock_a,lock_b"
    );
    // 275 steps plus the initial row plus the header.
    assert_eq!(rows.len(), 277);
    let _ = std::fs::remove_file(&out);
}

#[test]
fn zero_capacity_trace_never_locks() {
    let scn = zero_capacity_scenario();
    let out = tmp("zerocap_trace.csv");
    let status = Command::new(BIN)
        .arg("run")
        .arg(&scn)
        .arg("-o")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let rows = read_csv(&out);
    for row in &rows[1..] {
        assert_eq!(row[10], "0");
        assert_eq!(row[11], "0");
    }
    let _ = std::fs::remove_file(&out);
    let _ = std::fs::remove_file(&scn);
}

#[test]
fn missing_scenario_file_exits_2() {
    let output = Command::new(BIN)
        .args(["run", "/no/such/file.scn", "-o", "/tmp/x.csv"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(!output.stderr.is_empty());
}

#[test]
fn invalid_scenario_exits_1_with_line_number() {
    let path = tmp("bad.scn");
    std::fs::write(&path, "[params]\nbogus = 1\n").unwrap();
    let out = tmp("bad_out.csv");
    let output = Command::new(BIN)
        .arg("run")
        .arg(&path)
        .arg("-o")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line 2"), "diagnostic was: {stderr}");
    let _ = std::fs::remove_file(&path);
}

#[test]
fn unwritable_output_exits_2() {
    let output = Command::new(BIN)
        .args(["run", PAPER_LIKE, "-o", "/no-such-dir/trace.csv"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn compare_requires_ts_list() {
    let output = Command::new(BIN)
        .args(["compare", PAPER_LIKE, "-o", "/tmp/x.csv"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn compare_rejects_nonpositive_ts() {
    let out = tmp("cmp_bad.csv");
    let output = Command::new(BIN)
        .args(["compare", PAPER_LIKE, "--ts", "0.02,-0.01", "-o"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn ref_respects_max_step_and_reports_frequency() {
    let out = tmp("ref_trace.csv");
    let status = Command::new(BIN)
        .args(["ref", PAPER_LIKE, "--max-step", "2e-3", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let rows = read_csv(&out);
    assert_eq!(
        rows[0].join(","),
        "k,t,w1,w2,delta_a,delta_b,m_ca,m_cb,k_ca,k_cb,lock_a,lock_b,exec_frequency"
    );
    let mut prev_t = f64::NEG_INFINITY;
    for row in &rows[1..] {
        let t: f64 = row[1].parse().unwrap();
        assert!(t > prev_t, "times must be strictly increasing");
        if prev_t.is_finite() {
            assert!(
                t - prev_t <= 2e-3 + 1e-9,
                "dt {} above max step",
                t - prev_t
            );
            let freq: f64 = row[12].parse().unwrap();
            assert!((freq - 1.0 / (t - prev_t)).abs() <= 1e-6 * freq.abs().max(1.0));
        }
        prev_t = t;
    }
    let _ = std::fs::remove_file(&out);
}

#[test]
fn ref_rejects_loose_tolerance() {
    let output = Command::new(BIN)
        .args(["ref", PAPER_LIKE, "--rel-tol", "1e-2", "-o", "/tmp/x.csv"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn compare_writes_one_row_per_step_size() {
    let out = tmp("cmp.csv");
    let status = Command::new(BIN)
        .args(["compare", PAPER_LIKE, "--ts", "0.05,0.02", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let rows = read_csv(&out);
    assert_eq!(rows[0].join(","), "ts,sup_err_w2");
    assert_eq!(rows.len(), 3);
    for row in &rows[1..] {
        let err: f64 = row[1].parse().unwrap();
        assert!(err.is_finite() && err >= 0.0);
    }
    let _ = std::fs::remove_file(&out);
}

#[test]
fn compare_error_within_first_order_bound_on_decoupled_scenario() {
    // With zero capacities the dynamics are two exact linear ramps, so the
    // discrete error must sit far inside the first-order bound
    // 2 * Ts * max|w2'|.
    let text = "\
[params]
j1 = 0.1
j2 = 0.5
ra = 3
rb = 2
ts = 0.02
w1_0 = 10 rad_s
w2_0 = 1 rad_s
t_end = 1

[schedule m1]
mode: hold
0 0.5

[schedule m2]
mode: hold
0 -0.6

[schedule kca]
mode: hold
0 0

[schedule kcb]
mode: hold
0 0
";
    let scenario = powershift::Scenario::parse(text).unwrap();
    let rows = powershift_cli::compare_rows(&scenario, &[0.02]).unwrap();
    let max_accel_w2 = 0.6 / 0.5;
    assert!(rows[0].sup_err_w2 <= 2.0 * 0.02 * max_accel_w2);
}

#[test]
fn single_execution_bench_collapses_quartiles() {
    let text = std::fs::read_to_string(PAPER_LIKE).unwrap();
    let scenario = powershift::Scenario::parse(&text).unwrap();
    let (stats, _) = bench_run(&scenario, 1).unwrap();
    assert_eq!(stats.executions, 1);
    assert_eq!(stats.q1_us, stats.median_us);
    assert_eq!(stats.median_us, stats.q3_us);
}

#[test]
fn bench_is_observation_only() {
    let text = std::fs::read_to_string(PAPER_LIKE).unwrap();
    let scenario = powershift::Scenario::parse(&text).unwrap();
    let direct = run_discrete(&scenario).unwrap();
    let (_, timed) = bench_run(&scenario, 3).unwrap();
    assert_eq!(
        direct, timed,
        "timing must not change the simulation output"
    );
}

#[test]
fn help_exits_zero() {
    let output = Command::new(BIN).arg("--help").output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&output.stdout);
    for sub in ["run", "ref", "compare", "bench"] {
        assert!(stdout.contains(sub), "help must mention '{sub}'");
    }
}
