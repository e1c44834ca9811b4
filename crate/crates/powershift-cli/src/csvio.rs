//! CSV emission with deterministic formatting.
//!
//! Floats are written in scientific notation with 17 significant digits so
//! that identical inputs produce byte-identical files and values round-trip
//! exactly through text.

use crate::stats::TimingStats;
use crate::ConvergenceRow;
use powershift::{CtTraceSample, Scenario, StepRecord};
use std::fmt::Write as _;

pub const TRACE_HEADER: &str = "k,t,w1,w2,delta_a,delta_b,m_ca,m_cb,k_ca,k_cb,lock_a,lock_b";
pub const REF_HEADER: &str =
    "k,t,w1,w2,delta_a,delta_b,m_ca,m_cb,k_ca,k_cb,lock_a,lock_b,exec_frequency";

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn lock(b: bool) -> u8 {
    u8::from(b)
}

pub fn trace_csv(records: &[StepRecord]) -> String {
    let mut out = String::with_capacity(records.len() * 128);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.k,
            fmt(r.t),
            fmt(r.w.w1),
            fmt(r.w.w2),
            fmt(r.d.da),
            fmt(r.d.db),
            fmt(r.mc.mca),
            fmt(r.mc.mcb),
            fmt(r.caps.kca),
            fmt(r.caps.kcb),
            lock(r.locks.lock_a),
            lock(r.locks.lock_b),
        )
        .unwrap();
    }
    out
}

pub fn ref_csv(samples: &[CtTraceSample], scenario: &Scenario) -> String {
    let mut out = String::with_capacity(samples.len() * 140);
    out.push_str(REF_HEADER);
    out.push('\n');
    for (k, s) in samples.iter().enumerate() {
        let d = scenario.params.slip_speeds(s.w);
        let caps = scenario.caps_at(s.t);
        let freq = if k == 0 {
            0.0
        } else {
            1.0 / (s.t - samples[k - 1].t)
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            k,
            fmt(s.t),
            fmt(s.w.w1),
            fmt(s.w.w2),
            fmt(d.da),
            fmt(d.db),
            fmt(s.mc.mca),
            fmt(s.mc.mcb),
            fmt(caps.kca),
            fmt(caps.kcb),
            lock(s.locks.lock_a),
            lock(s.locks.lock_b),
            fmt(freq),
        )
        .unwrap();
    }
    out
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("ts,sup_err_w2\n");
    for row in rows {
        writeln!(out, "{},{}", fmt(row.ts), fmt(row.sup_err_w2)).unwrap();
    }
    out
}

pub fn bench_csv(stats: &TimingStats) -> String {
    let mut out = String::from("execution,mean_step_us\n");
    for (i, us) in stats.mean_step_us.iter().enumerate() {
        writeln!(out, "{},{}", i, fmt(*us)).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits_round_trip() {
        for x in [0.0, 1.0, -2.5, 0.1, 104.71975511965977, 1e-9, -3.7e11] {
            let s = fmt(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "{s}");
        }
    }
}
