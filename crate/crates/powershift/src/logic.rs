//! Per-step clutch state decision and the fixed-step simulation loop.
//!
//! Each step runs two phases. Phase one decides which clutches lock: a
//! tentative torque-free-ish step detects slip zero crossings, a full-lock
//! test runs when both clutches are candidates, and single-lock tests run in
//! priority order otherwise. Phase two assembles the applied torque vector
//! from the decided states: locked clutches get their exact holding torque,
//! slipping clutches get the saturated kinetic torque.

use crate::model::{
    sign, ClutchCapacities, ClutchTorques, GearIndex, InputTorques, PowershiftParams, ShaftState,
    SlipSpeeds,
};
use crate::scenario::Scenario;
use thiserror::Error;

/// Zero-crossing tolerance on slip speeds (rad/s).
///
/// Distinguishes true crossings from roundoff at machine scale; slip
/// magnitudes at or below this are treated as zero by the decision logic.
pub const SLIP_EPS: f64 = 1e-9;

/// Engaged/slipping flags for the two clutches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LockState {
    pub lock_a: bool,
    pub lock_b: bool,
}

impl LockState {
    pub const OPEN: LockState = LockState {
        lock_a: false,
        lock_b: false,
    };

    pub fn new(lock_a: bool, lock_b: bool) -> Self {
        Self { lock_a, lock_b }
    }

    pub fn full(&self) -> bool {
        self.lock_a && self.lock_b
    }
}

/// One row of a discrete simulation trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub k: usize,
    /// Time `k * Ts` (s).
    pub t: f64,
    /// Post-step shaft speeds `w(k)`.
    pub w: ShaftState,
    /// Slip speeds of `w(k)`.
    pub d: SlipSpeeds,
    /// Applied clutch torques for this step.
    pub mc: ClutchTorques,
    /// Capacities sampled at `t`.
    pub caps: ClutchCapacities,
    /// Input torques sampled at `t`.
    pub m: InputTorques,
    pub locks: LockState,
}

/// Errors from the simulation drivers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error("requested span {requested} s exceeds the scenario horizon {t_end} s")]
    Domain { requested: f64, t_end: f64 },
}

/// Sign with a dead band: zero for `|x| <= SLIP_EPS`.
fn sign_eps(x: f64) -> f64 {
    if x.abs() <= SLIP_EPS {
        0.0
    } else {
        sign(x)
    }
}

/// Slip sign used for a clutch that keeps slipping this step.
///
/// Frozen at the sign of the previous slip; a clutch starting the step at
/// zero slip (a breakaway) takes the direction the tentative step says slip
/// resumes in.
fn frozen_slip_sign(d_prev: f64, d_tent: f64) -> f64 {
    if d_prev.abs() > SLIP_EPS {
        sign(d_prev)
    } else {
        sign_eps(d_tent)
    }
}

/// Decide both clutch states for one step and compute the torque vector.
///
/// Returns torques that respect the capacities; for every locked clutch,
/// stepping with the returned torques zeroes that clutch's slip. The
/// procedure is deterministic.
pub fn decide_and_actuate(
    params: &PowershiftParams,
    w_prev: ShaftState,
    m: InputTorques,
    caps: ClutchCapacities,
    prev_locks: LockState,
) -> (ClutchTorques, LockState) {
    let d_prev = params.slip_speeds(w_prev);

    // Tentative step under saturated kinetic torques, used only for crossing
    // detection. The dead-banded sign keeps a clutch sitting at zero slip
    // from injecting a roundoff-signed torque here.
    let mc_tent = ClutchTorques::new(
        caps.kca * sign_eps(d_prev.da),
        caps.kcb * sign_eps(d_prev.db),
    );
    let d_tent = params.slip_speeds(params.step_explicit(w_prev, m, mc_tent));

    let cand_a = prev_locks.lock_a || d_prev.da * d_tent.da < 0.0 || d_tent.da.abs() <= SLIP_EPS;
    let cand_b = prev_locks.lock_b || d_prev.db * d_tent.db < 0.0 || d_tent.db.abs() <= SLIP_EPS;

    // Phase 1a: full lock, tested first when both clutches are candidates.
    // A clutch can only lock against strictly positive capacity.
    if cand_a && cand_b && caps.kca > 0.0 && caps.kcb > 0.0 {
        let full = params.full_lock_torques(m, w_prev);
        if full.mca.abs() <= caps.kca && full.mcb.abs() <= caps.kcb {
            return (full, LockState::new(true, true));
        }
    }

    let sign_a = frozen_slip_sign(d_prev.da, d_tent.da);
    let sign_b = frozen_slip_sign(d_prev.db, d_tent.db);

    // Phase 1b: single-lock tests. Previously locked clutch first; clutch a
    // first when neither or both were locked. At most one can be accepted
    // (both locking is the full-lock case, already rejected above).
    let order = if prev_locks.lock_b && !prev_locks.lock_a {
        [GearIndex::Second, GearIndex::First]
    } else {
        [GearIndex::First, GearIndex::Second]
    };

    let mut locks = LockState::OPEN;
    let mut hold_a = 0.0;
    let mut hold_b = 0.0;
    for gear in order {
        match gear {
            GearIndex::First if cand_a && caps.kca > 0.0 => {
                let other = caps.kcb * sign_b;
                let hold = params.engagement_torque(m, w_prev, GearIndex::First, other);
                if hold.abs() <= caps.kca {
                    locks.lock_a = true;
                    hold_a = hold;
                    break;
                }
            }
            GearIndex::Second if cand_b && caps.kcb > 0.0 => {
                let other = caps.kca * sign_a;
                let hold = params.engagement_torque(m, w_prev, GearIndex::Second, other);
                if hold.abs() <= caps.kcb {
                    locks.lock_b = true;
                    hold_b = hold;
                    break;
                }
            }
            _ => {}
        }
    }

    // Phase 2: torque vector from the decided states.
    let mca = if locks.lock_a {
        hold_a
    } else {
        caps.kca * sign_a
    };
    let mcb = if locks.lock_b {
        hold_b
    } else {
        caps.kcb * sign_b
    };
    (ClutchTorques::new(mca, mcb), locks)
}

/// Run the fixed-step simulation for `n_steps` steps from `w0`.
///
/// Inputs are sampled at `t = k * Ts` for step `k`; the returned trace has
/// `n_steps + 1` records, the first being the initial condition. Identical
/// inputs give bit-identical traces.
///
/// `params` is taken separately from `scenario.params` so that step-size
/// sweeps can rerun one scenario under different `Ts`.
pub fn simulate_discrete(
    params: &PowershiftParams,
    scenario: &Scenario,
    w0: ShaftState,
    n_steps: usize,
) -> Result<Vec<StepRecord>, SimulationError> {
    let ts = params.ts();
    let span = n_steps as f64 * ts;
    if span > scenario.t_end + 1e-9 * scenario.t_end.max(1.0) {
        return Err(SimulationError::Domain {
            requested: span,
            t_end: scenario.t_end,
        });
    }

    let mut records = Vec::with_capacity(n_steps + 1);
    records.push(StepRecord {
        k: 0,
        t: 0.0,
        w: w0,
        d: params.slip_speeds(w0),
        mc: ClutchTorques::ZERO,
        caps: scenario.caps_at(0.0),
        m: scenario.inputs_at(0.0),
        locks: LockState::OPEN,
    });

    let mut w = w0;
    let mut locks = LockState::OPEN;
    for k in 1..=n_steps {
        let t = k as f64 * ts;
        let m = scenario.inputs_at(t);
        let caps = scenario.caps_at(t);
        let (mc, new_locks) = decide_and_actuate(params, w, m, caps, locks);
        let w_next = params.step_explicit(w, m, mc);
        records.push(StepRecord {
            k,
            t,
            w: w_next,
            d: params.slip_speeds(w_next),
            mc,
            caps,
            m,
            locks: new_locks,
        });
        w = w_next;
        locks = new_locks;
    }
    Ok(records)
}
