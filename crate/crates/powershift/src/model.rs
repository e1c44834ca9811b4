//! Discrete-time model of a two-speed powershift transmission.
//!
//! Two inertias `J1` (input shaft) and `J2` (output shaft) are coupled by two
//! Coulomb-friction clutches through gear ratios `Ra` and `Rb`:
//!
//! ```text
//! J1 * (w1(k) - w1(k-1)) / Ts = M1(k) - Mca(k) - Mcb(k)
//! J2 * (w2(k) - w2(k-1)) / Ts = M2(k) + Ra*Mca(k) + Rb*Mcb(k)
//! ```
//!
//! The backward-Euler form makes the one-step zero-slip condition linear in
//! the clutch torques, so the exact holding torque for a single engaged gear
//! and for the full-lock condition (both clutches closed) can be solved in
//! closed form. Those solves live here; the per-step lock decision logic is
//! in [`crate::logic`].

use crate::mat2::Mat2;
use thiserror::Error;

/// Exact conversion factor from rev/min to rad/s.
pub const RPM_TO_RAD_PER_SEC: f64 = std::f64::consts::PI / 30.0;

/// Parameter validation errors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamsError {
    #[error("{name} must be strictly positive and finite, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("gear ratios must differ (Ra = Rb = {ratio} makes the coupling matrix singular)")]
    EqualRatios { ratio: f64 },
}

/// Physical parameters of the powershift: inertias, gear ratios, step size.
///
/// Validated at construction; `Ra != Rb` is required so that the coupling
/// matrix `R = [[-1, -1], [Ra, Rb]]` is invertible and full lock implies
/// `w1 = w2 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowershiftParams {
    j1: f64,
    j2: f64,
    ra: f64,
    rb: f64,
    ts: f64,
}

impl PowershiftParams {
    pub fn new(j1: f64, j2: f64, ra: f64, rb: f64, ts: f64) -> Result<Self, ParamsError> {
        for (name, value) in [("J1", j1), ("J2", j2), ("Ra", ra), ("Rb", rb), ("Ts", ts)] {
            if value <= 0.0 || !value.is_finite() {
                return Err(ParamsError::NotPositive { name, value });
            }
        }
        // det R = Ra - Rb; reject the singular case numerically.
        if ra - rb == 0.0 {
            return Err(ParamsError::EqualRatios { ratio: ra });
        }
        Ok(Self { j1, j2, ra, rb, ts })
    }

    /// Construct from gear radii: `Ra = r_a2 / r_a1`, `Rb = r_b2 / r_b1`.
    pub fn from_gear_radii(
        j1: f64,
        j2: f64,
        r_a1: f64,
        r_a2: f64,
        r_b1: f64,
        r_b2: f64,
        ts: f64,
    ) -> Result<Self, ParamsError> {
        for (name, value) in [
            ("r_a1", r_a1),
            ("r_a2", r_a2),
            ("r_b1", r_b1),
            ("r_b2", r_b2),
        ] {
            if value <= 0.0 || !value.is_finite() {
                return Err(ParamsError::NotPositive { name, value });
            }
        }
        Self::new(j1, j2, r_a2 / r_a1, r_b2 / r_b1, ts)
    }

    /// Same parameters with a different step size (for step-size sweeps).
    pub fn with_step_size(&self, ts: f64) -> Result<Self, ParamsError> {
        Self::new(self.j1, self.j2, self.ra, self.rb, ts)
    }

    pub fn j1(&self) -> f64 {
        self.j1
    }
    pub fn j2(&self) -> f64 {
        self.j2
    }
    pub fn ra(&self) -> f64 {
        self.ra
    }
    pub fn rb(&self) -> f64 {
        self.rb
    }
    pub fn ts(&self) -> f64 {
        self.ts
    }

    fn ratio(&self, gear: GearIndex) -> f64 {
        match gear {
            GearIndex::First => self.ra,
            GearIndex::Second => self.rb,
        }
    }

    /// Coupling matrix `R` and the step-scaled Gram matrix `JR = R^T (Ts J^-1) R`.
    ///
    /// `JR` is symmetric positive definite; symmetry is exact by construction
    /// (the off-diagonal entries share one expression).
    pub fn coupling_matrices(&self) -> (Mat2, Mat2) {
        let r = Mat2::new(-1.0, -1.0, self.ra, self.rb);
        let s1 = self.ts / self.j1;
        let s2 = self.ts / self.j2;
        let off = s1 + self.ra * self.rb * s2;
        let jr = Mat2::new(
            s1 + self.ra * self.ra * s2,
            off,
            off,
            s1 + self.rb * self.rb * s2,
        );
        (r, jr)
    }

    /// Slip speeds across the two clutches: `da = w1 - Ra*w2`, `db = w1 - Rb*w2`.
    ///
    /// Componentwise equal to `-R^T w`.
    pub fn slip_speeds(&self, w: ShaftState) -> SlipSpeeds {
        SlipSpeeds {
            da: w.w1 - self.ra * w.w2,
            db: w.w1 - self.rb * w.w2,
        }
    }

    /// One backward-Euler step with the clutch torques already fixed:
    /// `w(k) = w(k-1) + Ts * J^-1 * (M(k) + R * Mc(k))`.
    pub fn step_explicit(
        &self,
        w_prev: ShaftState,
        m: InputTorques,
        mc: ClutchTorques,
    ) -> ShaftState {
        ShaftState {
            w1: w_prev.w1 + self.ts / self.j1 * (m.m1 - mc.mca - mc.mcb),
            w2: w_prev.w2 + self.ts / self.j2 * (m.m2 + self.ra * mc.mca + self.rb * mc.mcb),
        }
    }

    /// Right-hand side of the single-gear engagement condition:
    /// `N_i(k) = -G_i R^T (Ts J^-1 M(k) + w(k-1))`.
    pub fn engagement_rhs(&self, m: InputTorques, w_prev: ShaftState, gear: GearIndex) -> f64 {
        let u1 = self.ts / self.j1 * m.m1 + w_prev.w1;
        let u2 = self.ts / self.j2 * m.m2 + w_prev.w2;
        // -G_i R^T u = u1 - R_i u2
        u1 - self.ratio(gear) * u2
    }

    /// Exact torque that drives the slip of `gear` to zero in one step, given
    /// the other clutch's torque:
    ///
    /// ```text
    /// Mca(k) = (N1(k) - JR12 * Mcb(k)) / JR11     (first gear)
    /// Mcb(k) = (N2(k) - JR21 * Mca(k)) / JR22     (second gear)
    /// ```
    ///
    /// Feeding the result into [`Self::step_explicit`] yields zero slip on that
    /// gear up to roundoff. The divisors are the diagonal entries of `JR`,
    /// strictly positive by positive definiteness.
    pub fn engagement_torque(
        &self,
        m: InputTorques,
        w_prev: ShaftState,
        gear: GearIndex,
        other_torque: f64,
    ) -> f64 {
        let (_, jr) = self.coupling_matrices();
        let n = self.engagement_rhs(m, w_prev, gear);
        match gear {
            GearIndex::First => (n - jr.a12 * other_torque) / jr.a11,
            GearIndex::Second => (n - jr.a21 * other_torque) / jr.a22,
        }
    }

    /// Clutch torques that bring both shafts to rest in one step:
    /// `Mc(k) = -R^-1 (M(k) + (J / Ts) w(k-1))`.
    ///
    /// Feeding the result into [`Self::step_explicit`] yields `w(k) = (0, 0)`.
    pub fn full_lock_torques(&self, m: InputTorques, w_prev: ShaftState) -> ClutchTorques {
        let v1 = m.m1 + self.j1 / self.ts * w_prev.w1;
        let v2 = m.m2 + self.j2 / self.ts * w_prev.w2;
        // R^-1 = 1/(Ra - Rb) * [[Rb, 1], [-Ra, -1]]
        let det = self.ra - self.rb;
        ClutchTorques {
            mca: -(self.rb * v1 + v2) / det,
            mcb: (self.ra * v1 + v2) / det,
        }
    }

    /// Full-lock torques through the Gram-matrix route,
    /// `Mc(k) = -(R^T Js R)^-1 R^T (Js M(k) + w(k-1))`.
    ///
    /// Algebraically identical to [`Self::full_lock_torques`]; kept as an
    /// independent arithmetic path for cross-checking.
    pub fn full_lock_torques_gram(&self, m: InputTorques, w_prev: ShaftState) -> ClutchTorques {
        let (r, jr) = self.coupling_matrices();
        let u = [
            self.ts / self.j1 * m.m1 + w_prev.w1,
            self.ts / self.j2 * m.m2 + w_prev.w2,
        ];
        let rhs = r.transpose().mul_vec(u);
        let jr_inv = jr
            .inverse()
            .expect("JR is positive definite for valid parameters");
        let mc = jr_inv.mul_vec(rhs);
        ClutchTorques {
            mca: -mc[0],
            mcb: -mc[1],
        }
    }
}

/// Angular speed pair `(w1, w2)` in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ShaftState {
    pub w1: f64,
    pub w2: f64,
}

impl ShaftState {
    pub fn new(w1: f64, w2: f64) -> Self {
        Self { w1, w2 }
    }

    /// Construct from speeds given in rev/min.
    pub fn from_rpm(w1_rpm: f64, w2_rpm: f64) -> Self {
        Self {
            w1: w1_rpm * RPM_TO_RAD_PER_SEC,
            w2: w2_rpm * RPM_TO_RAD_PER_SEC,
        }
    }

    pub fn norm_inf(&self) -> f64 {
        self.w1.abs().max(self.w2.abs())
    }
}

/// Input torques `(M1, M2)` in N·m applied to the two inertias.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InputTorques {
    pub m1: f64,
    pub m2: f64,
}

impl InputTorques {
    pub fn new(m1: f64, m2: f64) -> Self {
        Self { m1, m2 }
    }
}

/// Slip speeds `(da, db)` across the two clutches in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SlipSpeeds {
    pub da: f64,
    pub db: f64,
}

impl SlipSpeeds {
    pub fn get(&self, gear: GearIndex) -> f64 {
        match gear {
            GearIndex::First => self.da,
            GearIndex::Second => self.db,
        }
    }
}

/// Friction torque saturation bounds `(Kca, Kcb)` in N·m, non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClutchCapacities {
    pub kca: f64,
    pub kcb: f64,
}

impl ClutchCapacities {
    pub fn new(kca: f64, kcb: f64) -> Self {
        debug_assert!(kca >= 0.0 && kcb >= 0.0, "capacities must be non-negative");
        Self { kca, kcb }
    }
}

/// Applied clutch torques `(Mca, Mcb)` in N·m.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClutchTorques {
    pub mca: f64,
    pub mcb: f64,
}

impl ClutchTorques {
    pub const ZERO: ClutchTorques = ClutchTorques { mca: 0.0, mcb: 0.0 };

    pub fn new(mca: f64, mcb: f64) -> Self {
        Self { mca, mcb }
    }
}

/// Gear selection; realizes the row-selection vectors `G1 = [1 0]`, `G2 = [0 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GearIndex {
    First,
    Second,
}

/// Sign with the convention `sign(0) = 0`.
///
/// A slipping clutch at exactly zero slip transmits zero kinetic torque; the
/// lock branch, not the sign function, handles sticking.
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Kinetic (saturated) friction torques: `Mci = Kci * sign(di)`.
pub fn kinetic_torques(caps: ClutchCapacities, d: SlipSpeeds) -> ClutchTorques {
    ClutchTorques {
        mca: caps.kca * sign(d.da),
        mcb: caps.kcb * sign(d.db),
    }
}
