//! Per-step timing statistics for the benchmark subcommand.

/// Summary of per-step execution time over repeated runs.
///
/// Each sample is one execution's whole-run wall time divided by its step
/// count, in microseconds. Quartiles use linear interpolation between order
/// statistics; outliers lie beyond 1.5 IQR from the quartiles.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingStats {
    pub mean_step_us: Vec<f64>,
    pub median_us: f64,
    pub q1_us: f64,
    pub q3_us: f64,
    pub outliers_us: Vec<f64>,
    pub executions: usize,
    pub steps_per_execution: usize,
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < n {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[lo]
    }
}

impl TimingStats {
    pub fn from_samples(mean_step_us: Vec<f64>, steps_per_execution: usize) -> Self {
        assert!(!mean_step_us.is_empty(), "need at least one execution");
        let mut sorted = mean_step_us.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let q1 = quantile(&sorted, 0.25);
        let median = quantile(&sorted, 0.5);
        let q3 = quantile(&sorted, 0.75);
        let iqr = q3 - q1;
        let outliers = sorted
            .iter()
            .copied()
            .filter(|&x| x < q1 - 1.5 * iqr || x > q3 + 1.5 * iqr)
            .collect();
        Self {
            executions: mean_step_us.len(),
            mean_step_us,
            median_us: median,
            q1_us: q1,
            q3_us: q3,
            outliers_us: outliers,
            steps_per_execution,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample_collapses_quartiles() {
        let s = TimingStats::from_samples(vec![3.5], 100);
        assert_eq!(s.q1_us, 3.5);
        assert_eq!(s.median_us, 3.5);
        assert_eq!(s.q3_us, 3.5);
        assert!(s.outliers_us.is_empty());
    }

    #[test]
    fn quartile_order_holds() {
        let s = TimingStats::from_samples(vec![5.0, 1.0, 4.0, 2.0, 3.0], 10);
        assert!(s.q1_us <= s.median_us && s.median_us <= s.q3_us);
        assert_eq!(s.median_us, 3.0);
    }

    #[test]
    fn flags_outliers_beyond_iqr_fence() {
        let mut samples = vec![1.0; 19];
        samples.push(100.0);
        let s = TimingStats::from_samples(samples, 10);
        assert_eq!(s.outliers_us, vec![100.0]);
    }
}
