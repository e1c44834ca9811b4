//! Embedded Dormand-Prince 5(4) stepper with PI step-size control.
//!
//! Specialized to two-state systems; enough for the continuous-time
//! powershift reference and its event detection.

/// State vector alias for the 2-dof shaft system.
pub type State2 = [f64; 2];

// Dormand-Prince 5(4) tableau. Seven stages, FSAL: the seventh stage equals
// the derivative at the accepted point.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Fifth-order weights (row 7 of A extended with the zero FSAL weight) and the
// embedded fourth-order weights for the error estimate.
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
// PI controller exponents for a 5(4) pair.
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;

/// An accepted integration step.
#[derive(Debug, Clone, Copy)]
pub struct AcceptedStep {
    pub t0: f64,
    pub t1: f64,
    pub y0: State2,
    pub y1: State2,
    /// Derivative at `t0` (stage 1).
    pub f0: State2,
    /// Derivative at `t1` (FSAL stage, reusable as the next step's `f0`).
    pub f1: State2,
    /// Suggested size for the next step.
    pub h_next: f64,
}

impl AcceptedStep {
    /// Cubic Hermite interpolation of the state inside the step.
    pub fn interpolate(&self, t: f64) -> State2 {
        let h = self.t1 - self.t0;
        let theta = ((t - self.t0) / h).clamp(0.0, 1.0);
        let t2 = theta * theta;
        let t3 = t2 * theta;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + theta;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        [
            h00 * self.y0[0] + h10 * h * self.f0[0] + h01 * self.y1[0] + h11 * h * self.f1[0],
            h00 * self.y0[1] + h10 * h * self.f0[1] + h01 * self.y1[1] + h11 * h * self.f1[1],
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepError {
    /// The controller drove the step size below the floor at time `t`.
    StepSizeUnderflow { t: f64 },
}

/// Adaptive stepper state (error-controller memory).
#[derive(Debug, Clone)]
pub struct Rk45 {
    rel_tol: f64,
    abs_tol: f64,
    max_step: f64,
    min_step: f64,
    err_prev: f64,
}

impl Rk45 {
    pub fn new(rel_tol: f64, abs_tol: f64, max_step: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            max_step,
            min_step: 1e-14,
            err_prev: 1.0,
        }
    }

    pub fn initial_step(&self) -> f64 {
        self.max_step / 100.0
    }

    /// Advance one accepted step from `(t, y)`, not crossing `t_limit`.
    ///
    /// `f0` must be the derivative at `(t, y)`; `h` is the trial size.
    /// Rejected trials shrink the step until the weighted error passes.
    pub fn step(
        &mut self,
        rhs: &mut impl FnMut(f64, State2) -> State2,
        t: f64,
        y: State2,
        f0: State2,
        h: f64,
        t_limit: f64,
    ) -> Result<AcceptedStep, StepError> {
        let mut h = h.min(self.max_step).max(self.min_step);
        loop {
            let clipped = h >= t_limit - t;
            if clipped {
                h = t_limit - t;
            }

            let mut k = [[0.0; 2]; 7];
            k[0] = f0;
            for stage in 1..7 {
                let mut yi = y;
                for (j, kj) in k.iter().enumerate().take(stage) {
                    let a = A[stage][j];
                    if a != 0.0 {
                        yi[0] += h * a * kj[0];
                        yi[1] += h * a * kj[1];
                    }
                }
                k[stage] = rhs(t + C[stage] * h, yi);
            }
            // Stage 7 is evaluated at (t + h, y5): its yi used the 5th-order
            // weights, so k[6] is the FSAL derivative and yi is y1.
            let mut y1 = y;
            for (j, kj) in k.iter().enumerate().take(6) {
                let a = A[6][j];
                y1[0] += h * a * kj[0];
                y1[1] += h * a * kj[1];
            }

            // Weighted RMS error of (5th - 4th) order solutions.
            let mut err_sq = 0.0;
            for i in 0..2 {
                let mut e = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    e += (B5[j] - B4[j]) * kj[i];
                }
                let e = h * e;
                let scale = self.abs_tol + self.rel_tol * y[i].abs().max(y1[i].abs());
                err_sq += (e / scale).powi(2);
            }
            let err = (err_sq / 2.0).sqrt();

            if err <= 1.0 || h <= self.min_step {
                let err_clamped = err.max(1e-10);
                let factor = (SAFETY * err_clamped.powf(-ALPHA) * self.err_prev.powf(BETA))
                    .clamp(MIN_FACTOR, MAX_FACTOR);
                self.err_prev = err_clamped;
                let h_next = (h * factor).min(self.max_step);
                return Ok(AcceptedStep {
                    t0: t,
                    t1: if clipped { t_limit } else { t + h },
                    y0: y,
                    y1,
                    f0,
                    f1: k[6],
                    h_next,
                });
            }

            // Rejected: shrink, never grow.
            let factor = (SAFETY * err.powf(-ALPHA)).clamp(MIN_FACTOR, 1.0);
            h *= factor;
            if h < self.min_step {
                return Err(StepError::StepSizeUnderflow { t });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate(
        rhs: &mut impl FnMut(f64, State2) -> State2,
        y0: State2,
        t_end: f64,
        rel: f64,
        abs: f64,
        max_step: f64,
    ) -> (State2, usize) {
        let mut solver = Rk45::new(rel, abs, max_step);
        let mut t = 0.0;
        let mut y = y0;
        let mut f0 = rhs(t, y);
        let mut h = solver.initial_step();
        let mut n = 0;
        while t < t_end {
            let step = solver.step(rhs, t, y, f0, h, t_end).unwrap();
            t = step.t1;
            y = step.y1;
            f0 = step.f1;
            h = step.h_next;
            n += 1;
        }
        (y, n)
    }

    #[test]
    fn exact_on_constant_rhs() {
        let (y, _) = integrate(&mut |_, _| [2.0, -3.0], [1.0, 1.0], 2.0, 1e-8, 1e-10, 0.1);
        assert!((y[0] - 5.0).abs() < 1e-12);
        assert!((y[1] - -5.0).abs() < 1e-12);
    }

    #[test]
    fn exponential_decay_accuracy() {
        let (y, _) = integrate(
            &mut |_, y| [-y[0], -2.0 * y[1]],
            [1.0, 1.0],
            1.0,
            1e-9,
            1e-12,
            0.5,
        );
        assert!((y[0] - (-1.0f64).exp()).abs() < 1e-8);
        assert!((y[1] - (-2.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn harmonic_oscillator_round_trip() {
        let two_pi = 2.0 * std::f64::consts::PI;
        let (y, _) = integrate(
            &mut |_, y| [y[1], -y[0]],
            [1.0, 0.0],
            two_pi,
            1e-10,
            1e-12,
            0.5,
        );
        assert!((y[0] - 1.0).abs() < 1e-7);
        assert!(y[1].abs() < 1e-7);
    }

    #[test]
    fn respects_max_step() {
        let mut max_h: f64 = 0.0;
        let mut solver = Rk45::new(1e-6, 1e-9, 1e-3);
        let mut rhs = |_t: f64, _y: State2| [1.0, 0.0];
        let mut t = 0.0;
        let mut y = [0.0, 0.0];
        let mut f0 = [1.0, 0.0];
        let mut h = solver.initial_step();
        while t < 0.1 {
            let step = solver.step(&mut rhs, t, y, f0, h, 0.1).unwrap();
            max_h = max_h.max(step.t1 - step.t0);
            t = step.t1;
            y = step.y1;
            f0 = step.f1;
            h = step.h_next;
        }
        assert!(max_h <= 1e-3 + 1e-12);
    }

    #[test]
    fn hermite_interpolation_matches_quadratic() {
        // For rhs linear in t the solution is quadratic and the cubic Hermite
        // interpolant reproduces it exactly.
        let mut rhs = |t: f64, _y: State2| [t, 2.0 * t];
        let mut solver = Rk45::new(1e-8, 1e-10, 1.0);
        let f0 = rhs(0.0, [0.0, 0.0]);
        let step = solver
            .step(&mut rhs, 0.0, [0.0, 0.0], f0, 0.8, 1.0)
            .unwrap();
        let mid = (step.t0 + step.t1) / 2.0;
        let y = step.interpolate(mid);
        assert!((y[0] - mid * mid / 2.0).abs() < 1e-12);
        assert!((y[1] - mid * mid).abs() < 1e-12);
    }

    #[test]
    fn tightening_tolerance_shrinks_error() {
        let rhs = |_t: f64, y: State2| [y[1], -y[0]];
        let run = |rel: f64| {
            let (y, _) = integrate(&mut |t, y| rhs(t, y), [1.0, 0.0], 3.0, rel, rel * 1e-3, 0.5);
            ((y[0] - 3.0f64.cos()).abs()).max((y[1] + 3.0f64.sin()).abs())
        };
        assert!(run(1e-10) < run(1e-4));
    }
}
