//! Small dense 2x2 linear algebra used by the coupling-matrix solves.

use thiserror::Error;

/// Relative determinant threshold below which a matrix is treated as singular.
///
/// The comparison is scale-aware: `|det| <= DET_EPS * norm_inf(a)^2`.
pub const DET_EPS: f64 = 1e-12;

/// Error returned when inverting a (numerically) singular matrix.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("singular 2x2 matrix: |det| = {det_abs:.3e} below threshold {threshold:.3e}")]
pub struct SingularMatrix {
    pub det_abs: f64,
    pub threshold: f64,
}

/// Row-major 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        a11: 1.0,
        a12: 0.0,
        a21: 0.0,
        a22: 1.0,
    };

    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    /// Maximum-absolute-row-sum norm.
    pub fn norm_inf(&self) -> f64 {
        let r1 = self.a11.abs() + self.a12.abs();
        let r2 = self.a21.abs() + self.a22.abs();
        r1.max(r2)
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.a11, self.a21, self.a12, self.a22)
    }

    pub fn mul_vec(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.a11 * v[0] + self.a12 * v[1],
            self.a21 * v[0] + self.a22 * v[1],
        ]
    }

    pub fn mul_mat(&self, b: &Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * b.a11 + self.a12 * b.a21,
            self.a11 * b.a12 + self.a12 * b.a22,
            self.a21 * b.a11 + self.a22 * b.a21,
            self.a21 * b.a12 + self.a22 * b.a22,
        )
    }

    /// Inverse via adjugate/determinant, with a scale-aware singularity guard.
    pub fn inverse(&self) -> Result<Mat2, SingularMatrix> {
        let det = self.det();
        let threshold = DET_EPS * self.norm_inf().powi(2);
        if det.abs() <= threshold {
            return Err(SingularMatrix {
                det_abs: det.abs(),
                threshold,
            });
        }
        Ok(Mat2::new(
            self.a22 / det,
            -self.a12 / det,
            -self.a21 / det,
            self.a11 / det,
        ))
    }
}
