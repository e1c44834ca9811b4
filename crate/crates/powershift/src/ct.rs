//! Continuous-time counterpart of the discrete powershift model.
//!
//! Integrates `J w' = M(t) + R Mc(t)` with an adaptive Dormand-Prince 5(4)
//! pair. The clutch torques follow the same stick-slip rules as the discrete
//! logic: while slipping, `Mci = Ki(t) * sign(di)`; while locked, the exact
//! holding torque that keeps the slip derivative at zero; full lock uses
//! `Mc = -R^-1 M(t)`. Slip zero crossings and capacity violations are
//! localized by bisection on the dense output and the integration restarts at
//! each event, so this module serves as the validation oracle for the
//! fixed-step model.

use crate::logic::{LockState, SLIP_EPS};
use crate::model::{
    sign, ClutchCapacities, ClutchTorques, GearIndex, InputTorques, PowershiftParams, ShaftState,
};
use crate::rk45::{Rk45, State2, StepError};
use crate::scenario::Scenario;
use thiserror::Error;

/// Adaptive-solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CtSolverConfig {
    /// Relative local-error tolerance.
    pub rel_tol: f64,
    /// Absolute local-error tolerance (rad/s).
    pub abs_tol: f64,
    /// Upper bound on the step size (s).
    pub max_step: f64,
    /// Zero-crossing localization tolerance (s).
    pub event_tol: f64,
}

impl Default for CtSolverConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_tol: 1e-9,
            max_step: 1e-3,
            event_tol: 1e-9,
        }
    }
}

impl CtSolverConfig {
    pub fn validate(&self) -> Result<(), CtError> {
        let fields = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_step", self.max_step),
            ("event_tol", self.event_tol),
        ];
        for (name, v) in fields {
            if v <= 0.0 || !v.is_finite() {
                return Err(CtError::InvalidConfig(format!(
                    "{name} must be strictly positive, got {v}"
                )));
            }
        }
        if self.rel_tol > 1e-3 {
            return Err(CtError::InvalidConfig(format!(
                "rel_tol must be at most 1e-3 for reference use, got {}",
                self.rel_tol
            )));
        }
        Ok(())
    }
}

/// One accepted sample of the continuous-time solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CtTraceSample {
    /// Time (s); samples are strictly increasing but not equally spaced.
    pub t: f64,
    pub w: ShaftState,
    pub mc: ClutchTorques,
    pub locks: LockState,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CtError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("requested horizon {requested} s exceeds the scenario horizon {t_end} s")]
    Domain { requested: f64, t_end: f64 },
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },
    #[error("event iteration failed to advance near t = {t}")]
    EventOverflow { t: f64 },
}

/// Accelerations `J^-1 (M + R Mc)` as a `(w1', w2')` pair.
pub fn ct_rhs(params: &PowershiftParams, m: InputTorques, mc: ClutchTorques) -> (f64, f64) {
    (
        (m.m1 - mc.mca - mc.mcb) / params.j1(),
        (m.m2 + params.ra() * mc.mca + params.rb() * mc.mcb) / params.j2(),
    )
}

/// Entries of the continuous-time Gram matrix `R^T J^-1 R` (no step-size factor).
fn ct_coupling(params: &PowershiftParams) -> (f64, f64, f64) {
    let s1 = 1.0 / params.j1();
    let s2 = 1.0 / params.j2();
    let jr11 = s1 + params.ra() * params.ra() * s2;
    let jr12 = s1 + params.ra() * params.rb() * s2;
    let jr22 = s1 + params.rb() * params.rb() * s2;
    (jr11, jr12, jr22)
}

/// Holding torque that keeps the slip derivative of `gear` at zero, given the
/// other clutch's torque.
pub fn ct_engagement_torque(
    params: &PowershiftParams,
    m: InputTorques,
    gear: GearIndex,
    other_torque: f64,
) -> f64 {
    let (jr11, jr12, jr22) = ct_coupling(params);
    // N_i(t) = -G_i R^T J^-1 M(t)
    let u1 = m.m1 / params.j1();
    let u2 = m.m2 / params.j2();
    match gear {
        GearIndex::First => {
            let n1 = u1 - params.ra() * u2;
            (n1 - jr12 * other_torque) / jr11
        }
        GearIndex::Second => {
            let n2 = u1 - params.rb() * u2;
            (n2 - jr12 * other_torque) / jr22
        }
    }
}

/// Torques holding both slips at zero: `Mc = -R^-1 M(t)`.
pub fn ct_full_lock_torques(params: &PowershiftParams, m: InputTorques) -> ClutchTorques {
    let det = params.ra() - params.rb();
    ClutchTorques {
        mca: -(params.rb() * m.m1 + m.m2) / det,
        mcb: (params.ra() * m.m1 + m.m2) / det,
    }
}

/// Discrete mode of the hybrid continuous-time system.
#[derive(Debug, Clone, Copy, PartialEq)]
struct CtModes {
    lock_a: bool,
    lock_b: bool,
    /// Slip direction of an open clutch: -1, 0, or +1. Zero while locked.
    sig_a: f64,
    sig_b: f64,
}

impl CtModes {
    fn locks(&self) -> LockState {
        LockState::new(self.lock_a, self.lock_b)
    }
}

/// Clutch torques implied by the current modes at time `t` inputs.
fn torques_for(
    params: &PowershiftParams,
    modes: CtModes,
    m: InputTorques,
    caps: ClutchCapacities,
) -> ClutchTorques {
    match (modes.lock_a, modes.lock_b) {
        (true, true) => ct_full_lock_torques(params, m),
        (true, false) => {
            let mcb = caps.kcb * modes.sig_b;
            let mca = ct_engagement_torque(params, m, GearIndex::First, mcb);
            ClutchTorques::new(mca, mcb)
        }
        (false, true) => {
            let mca = caps.kca * modes.sig_a;
            let mcb = ct_engagement_torque(params, m, GearIndex::Second, mca);
            ClutchTorques::new(mca, mcb)
        }
        (false, false) => ClutchTorques::new(caps.kca * modes.sig_a, caps.kcb * modes.sig_b),
    }
}

/// Event functions, one per clutch. For an open clutch the function is the
/// slip speed (events at zero crossings); for a locked clutch it is the
/// capacity margin `K - |holding torque|` (events when it turns negative).
fn event_values(
    params: &PowershiftParams,
    scenario: &Scenario,
    modes: CtModes,
    t: f64,
    w: ShaftState,
) -> [f64; 2] {
    let m = scenario.inputs_at(t);
    let caps = scenario.caps_at(t);
    let mc = torques_for(params, modes, m, caps);
    let d = params.slip_speeds(w);
    [
        if modes.lock_a {
            caps.kca - mc.mca.abs()
        } else {
            d.da
        },
        if modes.lock_b {
            caps.kcb - mc.mcb.abs()
        } else {
            d.db
        },
    ]
}

/// Lock/unlock decision, mirroring the discrete two-phase procedure:
/// full lock first when both clutches are candidates, then single-lock tests
/// in priority order (previously locked clutch first, clutch a otherwise).
///
/// `fired_cross` marks clutches whose slip crossing triggered this decision;
/// `forbid` marks clutches that just violated capacity and must slip.
fn decide_modes(
    params: &PowershiftParams,
    m: InputTorques,
    caps: ClutchCapacities,
    w: ShaftState,
    prev: CtModes,
    fired_cross: [bool; 2],
    forbid: [bool; 2],
) -> CtModes {
    let d = params.slip_speeds(w);
    let eps = SLIP_EPS * w.norm_inf().max(1.0);

    let base_sig_a = if d.da.abs() > eps {
        sign(d.da)
    } else {
        prev.sig_a
    };
    let base_sig_b = if d.db.abs() > eps {
        sign(d.db)
    } else {
        prev.sig_b
    };

    let cand_a =
        !forbid[0] && caps.kca > 0.0 && (prev.lock_a || fired_cross[0] || d.da.abs() <= eps);
    let cand_b =
        !forbid[1] && caps.kcb > 0.0 && (prev.lock_b || fired_cross[1] || d.db.abs() <= eps);

    if cand_a && cand_b {
        let full = ct_full_lock_torques(params, m);
        if full.mca.abs() <= caps.kca && full.mcb.abs() <= caps.kcb {
            return CtModes {
                lock_a: true,
                lock_b: true,
                sig_a: 0.0,
                sig_b: 0.0,
            };
        }
    }

    let order = if prev.lock_b && !prev.lock_a {
        [GearIndex::Second, GearIndex::First]
    } else {
        [GearIndex::First, GearIndex::Second]
    };

    let mut lock_a = false;
    let mut lock_b = false;
    let mut sig_a = base_sig_a;
    let mut sig_b = base_sig_b;
    for gear in order {
        if lock_a || lock_b {
            break;
        }
        match gear {
            GearIndex::First if cand_a => {
                let hold = ct_engagement_torque(params, m, GearIndex::First, caps.kcb * base_sig_b);
                if hold.abs() <= caps.kca {
                    lock_a = true;
                    sig_a = 0.0;
                } else {
                    sig_a = sign(hold);
                }
            }
            GearIndex::Second if cand_b => {
                let hold =
                    ct_engagement_torque(params, m, GearIndex::Second, caps.kca * base_sig_a);
                if hold.abs() <= caps.kcb {
                    lock_b = true;
                    sig_b = 0.0;
                } else {
                    sig_b = sign(hold);
                }
            }
            _ => {}
        }
    }

    // A candidate skipped because the other clutch locked first slips toward
    // its residual torque demand (the full-lock component).
    if lock_a && cand_b && !lock_b {
        let s = sign(ct_full_lock_torques(params, m).mcb);
        if s != 0.0 {
            sig_b = s;
        }
    }
    if lock_b && cand_a && !lock_a {
        let s = sign(ct_full_lock_torques(params, m).mca);
        if s != 0.0 {
            sig_a = s;
        }
    }

    CtModes {
        lock_a,
        lock_b,
        sig_a,
        sig_b,
    }
}

/// Pull the state exactly onto the locked constraints.
///
/// Applies the minimal friction impulse that zeroes the locked slip; with
/// both clutches locked and distinct ratios this forces `w = (0, 0)`. The
/// corrections are at the scale of the event localization residue and keep
/// locked slips from accumulating integrator drift.
fn project_locked(params: &PowershiftParams, modes: CtModes, w: ShaftState) -> ShaftState {
    if modes.lock_a && modes.lock_b {
        return ShaftState::new(0.0, 0.0);
    }
    let (jr11, _, jr22) = ct_coupling(params);
    let d = params.slip_speeds(w);
    if modes.lock_a {
        let p = d.da / jr11;
        return ShaftState::new(w.w1 - p / params.j1(), w.w2 + params.ra() * p / params.j2());
    }
    if modes.lock_b {
        let p = d.db / jr22;
        return ShaftState::new(w.w1 - p / params.j1(), w.w2 + params.rb() * p / params.j2());
    }
    w
}

fn has_crossing(g0: f64, g1: f64) -> bool {
    (g0 > 0.0 && g1 <= 0.0) || (g0 < 0.0 && g1 >= 0.0)
}

/// Simulate the continuous-time model over `[0, t_end]`.
///
/// Returns the accepted solver samples (strictly increasing, non-uniform
/// spacing) including one sample at each localized event.
pub fn simulate_ct(
    params: &PowershiftParams,
    scenario: &Scenario,
    w0: ShaftState,
    t_end: f64,
    cfg: &CtSolverConfig,
) -> Result<Vec<CtTraceSample>, CtError> {
    cfg.validate()?;
    if t_end <= 0.0 || !t_end.is_finite() || t_end > scenario.t_end + 1e-9 * scenario.t_end.max(1.0)
    {
        return Err(CtError::Domain {
            requested: t_end,
            t_end: scenario.t_end,
        });
    }

    const MAX_EVENTS: usize = 200_000;

    let mut solver = Rk45::new(cfg.rel_tol, cfg.abs_tol, cfg.max_step);
    let mut t = 0.0;
    let mut w = w0;

    // Initial mode decision from the initial slips.
    let d0 = params.slip_speeds(w);
    let mut modes = {
        let prev = CtModes {
            lock_a: false,
            lock_b: false,
            sig_a: sign(d0.da),
            sig_b: sign(d0.db),
        };
        decide_modes(
            params,
            scenario.inputs_at(0.0),
            scenario.caps_at(0.0),
            w,
            prev,
            [false, false],
            [false, false],
        )
    };
    w = project_locked(params, modes, w);

    let sample_at = |t: f64, w: ShaftState, modes: CtModes| -> CtTraceSample {
        let mc = torques_for(params, modes, scenario.inputs_at(t), scenario.caps_at(t));
        CtTraceSample {
            t,
            w,
            mc,
            locks: modes.locks(),
        }
    };

    let mut samples = Vec::new();
    samples.push(sample_at(t, w, modes));

    let accel = |modes: CtModes, tt: f64| -> State2 {
        let m = scenario.inputs_at(tt);
        let caps = scenario.caps_at(tt);
        let mc = torques_for(params, modes, m, caps);
        let (a1, a2) = ct_rhs(params, m, mc);
        [a1, a2]
    };

    let arm_threshold = |modes: CtModes, w: ShaftState, i: usize| -> f64 {
        let locked = if i == 0 { modes.lock_a } else { modes.lock_b };
        if locked {
            // Torque margin scale (N·m).
            1e-9
        } else {
            // Slip scale (rad/s).
            10.0 * SLIP_EPS * w.norm_inf().max(1.0)
        }
    };

    let mut g_prev = event_values(params, scenario, modes, t, w);
    let mut armed = [
        g_prev[0].abs() > arm_threshold(modes, w, 0),
        g_prev[1].abs() > arm_threshold(modes, w, 1),
    ];

    let mut f0 = accel(modes, t);
    let mut h = solver.initial_step();
    let mut n_events = 0usize;

    while t < t_end {
        let modes_now = modes;
        let mut rhs = |tt: f64, _y: State2| accel(modes_now, tt);
        let step = solver
            .step(&mut rhs, t, [w.w1, w.w2], f0, h, t_end)
            .map_err(|StepError::StepSizeUnderflow { t }| CtError::StepSizeUnderflow { t })?;

        let w1_state = ShaftState::new(step.y1[0], step.y1[1]);
        let g_end = event_values(params, scenario, modes, step.t1, w1_state);

        // Earliest fired event, localized by bisection on the dense output.
        let mut fired: Option<(usize, f64)> = None;
        for i in 0..2 {
            let locked = if i == 0 { modes.lock_a } else { modes.lock_b };
            let trigger = if locked {
                g_prev[i] >= 0.0 && g_end[i] < 0.0
            } else {
                armed[i] && has_crossing(g_prev[i], g_end[i])
            };
            if trigger {
                let gi = |tt: f64| {
                    let y = step.interpolate(tt);
                    event_values(params, scenario, modes, tt, ShaftState::new(y[0], y[1]))[i]
                };
                let mut lo = step.t0;
                let mut hi = step.t1;
                let mut glo = g_prev[i];
                while hi - lo > cfg.event_tol {
                    let mid = 0.5 * (lo + hi);
                    let gm = gi(mid);
                    if has_crossing(glo, gm) {
                        hi = mid;
                    } else {
                        lo = mid;
                        glo = gm;
                    }
                }
                if fired.is_none_or(|(_, te)| hi < te) {
                    fired = Some((i, hi));
                }
            }
        }

        match fired {
            None => {
                t = step.t1;
                w = project_locked(params, modes, w1_state);
                f0 = step.f1;
                h = step.h_next;
                // Re-sync open-clutch slip directions and re-arm detectors.
                let d = params.slip_speeds(w);
                for (i, di) in [d.da, d.db].into_iter().enumerate() {
                    let locked = if i == 0 { modes.lock_a } else { modes.lock_b };
                    if !locked && di.abs() > arm_threshold(modes, w, i) {
                        let s = sign(di);
                        if i == 0 {
                            modes.sig_a = s;
                        } else {
                            modes.sig_b = s;
                        }
                    }
                }
                g_prev = event_values(params, scenario, modes, t, w);
                for i in 0..2 {
                    if !armed[i] && g_prev[i].abs() > arm_threshold(modes, w, i) {
                        armed[i] = true;
                    }
                }
                samples.push(sample_at(t, w, modes));
            }
            Some((which, t_e)) => {
                n_events += 1;
                if n_events > MAX_EVENTS {
                    return Err(CtError::EventOverflow { t: t_e });
                }
                let y_e = step.interpolate(t_e);
                let w_e = ShaftState::new(y_e[0], y_e[1]);
                let m_e = scenario.inputs_at(t_e);
                let caps_e = scenario.caps_at(t_e);

                let mut prev = modes;
                let mut fired_cross = [false, false];
                let mut forbid = [false, false];
                let which_locked = if which == 0 {
                    modes.lock_a
                } else {
                    modes.lock_b
                };
                if which_locked {
                    // Capacity violation: the clutch breaks away in the
                    // direction of the torque it could no longer hold.
                    let mc_e = torques_for(params, modes, m_e, caps_e);
                    if which == 0 {
                        prev.lock_a = false;
                        prev.sig_a = sign(mc_e.mca);
                    } else {
                        prev.lock_b = false;
                        prev.sig_b = sign(mc_e.mcb);
                    }
                    forbid[which] = true;
                } else {
                    fired_cross[which] = true;
                }

                modes = decide_modes(params, m_e, caps_e, w_e, prev, fired_cross, forbid);
                t = t_e;
                w = project_locked(params, modes, w_e);
                f0 = accel(modes, t);
                h = solver.initial_step();
                g_prev = event_values(params, scenario, modes, t, w);
                for i in 0..2 {
                    armed[i] = g_prev[i].abs() > arm_threshold(modes, w, i);
                }
                samples.push(sample_at(t, w, modes));
            }
        }
    }

    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{Interpolation, Schedule};

    fn paper_params() -> PowershiftParams {
        PowershiftParams::new(0.1, 0.5, 3.0, 2.0, 0.02).unwrap()
    }

    fn scenario_with(
        m1: Schedule,
        m2: Schedule,
        kca: Schedule,
        kcb: Schedule,
        t_end: f64,
        w0: ShaftState,
    ) -> Scenario {
        Scenario {
            params: paper_params(),
            w0,
            t_end,
            m1,
            m2,
            kca,
            kcb,
        }
    }

    #[test]
    fn rhs_examples() {
        let p = paper_params();
        assert_eq!(
            ct_rhs(&p, InputTorques::default(), ClutchTorques::ZERO),
            (0.0, 0.0)
        );
        let (a1, _) = ct_rhs(&p, InputTorques::new(1.0, 0.0), ClutchTorques::ZERO);
        assert_eq!(a1, 10.0);
        let (a1, a2) = ct_rhs(&p, InputTorques::default(), ClutchTorques::new(1.0, 0.0));
        assert_eq!(a1, -10.0);
        assert_eq!(a2, 6.0);
    }

    #[test]
    fn engagement_torque_matches_hand_value() {
        let p = paper_params();
        assert_eq!(
            ct_engagement_torque(&p, InputTorques::default(), GearIndex::First, 0.0),
            0.0
        );
        // R^T J^-1 R = [[28, 22], [22, 18]], N1 = 50.
        let mca = ct_engagement_torque(&p, InputTorques::new(5.0, 0.0), GearIndex::First, 0.0);
        assert!((mca - 50.0 / 28.0).abs() < 1e-12);

        // Holding torque keeps the first-gear slip derivative at zero.
        let (a1, a2) = ct_rhs(
            &p,
            InputTorques::new(5.0, 0.0),
            ClutchTorques::new(mca, 0.0),
        );
        assert!((a1 - 3.0 * a2).abs() < 1e-12);
    }

    #[test]
    fn full_lock_matches_hand_value() {
        let p = paper_params();
        let mc = ct_full_lock_torques(&p, InputTorques::new(10.0, 0.0));
        assert!((mc.mca - -20.0).abs() < 1e-12);
        assert!((mc.mcb - 30.0).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(CtSolverConfig::default().validate().is_ok());
        let bad = CtSolverConfig {
            rel_tol: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let loose = CtSolverConfig {
            rel_tol: 1e-2,
            ..Default::default()
        };
        assert!(loose.validate().is_err());
    }

    #[test]
    fn decoupled_constant_torque_ramps() {
        let w0 = ShaftState::new(1.0, -2.0);
        let scn = scenario_with(
            Schedule::constant(0.5),
            Schedule::constant(-1.0),
            Schedule::constant(0.0),
            Schedule::constant(0.0),
            2.0,
            w0,
        );
        let cfg = CtSolverConfig::default();
        let samples = simulate_ct(&scn.params, &scn, w0, 2.0, &cfg).unwrap();
        let last = samples.last().unwrap();
        assert!((last.t - 2.0).abs() < 1e-12);
        assert!((last.w.w1 - (1.0 + 2.0 * 0.5 / 0.1)).abs() < 1e-9);
        assert!((last.w.w2 - (-2.0 - 2.0 * 1.0 / 0.5)).abs() < 1e-9);
        assert!(samples.iter().all(|s| !s.locks.lock_a && !s.locks.lock_b));
    }

    #[test]
    fn samples_strictly_increasing_and_within_max_step() {
        let w0 = ShaftState::new(20.0, 1.0);
        let scn = scenario_with(
            Schedule::constant(1.0),
            Schedule::constant(-1.0),
            Schedule::new(vec![(0.0, 0.0), (0.2, 15.0)], Interpolation::Linear).unwrap(),
            Schedule::constant(0.0),
            1.0,
            w0,
        );
        let cfg = CtSolverConfig::default();
        let samples = simulate_ct(&scn.params, &scn, w0, 1.0, &cfg).unwrap();
        for pair in samples.windows(2) {
            let dt = pair[1].t - pair[0].t;
            assert!(dt > 0.0);
            assert!(dt <= cfg.max_step + 1e-12);
        }
    }

    #[test]
    fn clutch_a_locks_and_holds() {
        // Clutch a capacity ramps up while gear-1 slip decays; after the
        // crossing the clutch must be locked with zero slip.
        let w0 = ShaftState::new(20.0, 2.0);
        let scn = scenario_with(
            Schedule::constant(1.0),
            Schedule::constant(-1.0),
            Schedule::new(vec![(0.0, 0.0), (0.2, 15.0)], Interpolation::Linear).unwrap(),
            Schedule::constant(0.0),
            1.5,
            w0,
        );
        let cfg = CtSolverConfig::default();
        let samples = simulate_ct(&scn.params, &scn, w0, 1.5, &cfg).unwrap();
        let last = samples.last().unwrap();
        assert!(last.locks.lock_a, "clutch a should be locked at the end");
        // Locked slip stays at zero on every accepted sample, and every
        // sampled torque respects the capacity envelope.
        for s in &samples {
            let d = scn.params.slip_speeds(s.w);
            if s.locks.lock_a {
                assert!(d.da.abs() <= 10.0 * cfg.abs_tol, "t={}: da={}", s.t, d.da);
            }
            let caps = scn.caps_at(s.t);
            assert!(s.mc.mca.abs() <= caps.kca + 1e-6);
            assert!(s.mc.mcb.abs() <= caps.kcb + 1e-6);
        }
    }

    #[test]
    fn solver_self_convergence() {
        // Tightening the tolerances tenfold must not grow the terminal-state
        // self-difference by more than tenfold.
        let w0 = ShaftState::new(20.0, 2.0);
        let scn = scenario_with(
            Schedule::constant(1.0),
            Schedule::constant(-1.0),
            Schedule::new(vec![(0.0, 0.0), (0.2, 15.0)], Interpolation::Linear).unwrap(),
            Schedule::constant(0.0),
            0.5,
            w0,
        );
        let run = |rel: f64| {
            let cfg = CtSolverConfig {
                rel_tol: rel,
                abs_tol: rel * 1e-3,
                ..Default::default()
            };
            simulate_ct(&scn.params, &scn, w0, 0.5, &cfg)
                .unwrap()
                .last()
                .unwrap()
                .w
        };
        let coarse = run(1e-4);
        let mid = run(1e-5);
        let fine = run(1e-6);
        let d1 = (coarse.w1 - mid.w1).abs().max((coarse.w2 - mid.w2).abs());
        let d2 = (mid.w1 - fine.w1).abs().max((mid.w2 - fine.w2).abs());
        assert!(d2 <= 10.0 * d1 + 1e-12, "d1={d1:.3e}, d2={d2:.3e}");
    }

    #[test]
    fn capacity_drop_unlocks() {
        // Lock first, then pull the capacity to zero: the clutch must unlock
        // and slip resume.
        let w0 = ShaftState::new(20.0, 2.0);
        let scn = scenario_with(
            Schedule::constant(1.0),
            Schedule::constant(-1.0),
            Schedule::new(
                vec![(0.0, 0.0), (0.2, 15.0), (0.8, 15.0), (0.9, 0.0)],
                Interpolation::Linear,
            )
            .unwrap(),
            Schedule::constant(0.0),
            1.5,
            w0,
        );
        let cfg = CtSolverConfig::default();
        let samples = simulate_ct(&scn.params, &scn, w0, 1.5, &cfg).unwrap();
        let locked_mid = samples
            .iter()
            .any(|s| s.t > 0.5 && s.t < 0.8 && s.locks.lock_a);
        assert!(locked_mid, "should lock in the plateau");
        let last = samples.last().unwrap();
        assert!(!last.locks.lock_a, "zero capacity cannot stay locked");
    }

    #[test]
    fn rejects_bad_domain() {
        let w0 = ShaftState::default();
        let scn = scenario_with(
            Schedule::constant(0.0),
            Schedule::constant(0.0),
            Schedule::constant(0.0),
            Schedule::constant(0.0),
            1.0,
            w0,
        );
        let cfg = CtSolverConfig::default();
        assert!(matches!(
            simulate_ct(&scn.params, &scn, w0, 2.0, &cfg),
            Err(CtError::Domain { .. })
        ));
    }
}
