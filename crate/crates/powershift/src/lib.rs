//! Deterministic simulator for a two-speed powershift transmission.
//!
//! The gearbox couples an input inertia and an output inertia through two
//! Coulomb-friction clutches with distinct gear ratios. A backward-Euler
//! discretization makes the one-step zero-slip conditions linear in the
//! clutch torques, so single-gear engagement and the full-lock condition
//! (both clutches closed, both shafts at rest) are solved exactly each step
//! instead of being regularized or iterated. That keeps every step O(1) and
//! the whole simulation fit for fixed-rate real-time execution.
//!
//! Crate layout:
//!
//! - [`model`]: parameters, kinematics, the backward-Euler step, and the
//!   exact engagement / full-lock torque solves.
//! - [`logic`]: the per-step lock decision procedure and the fixed-step
//!   simulation driver.
//! - [`ct`]: continuous-time counterpart integrated with an adaptive
//!   Dormand-Prince 5(4) method and slip zero-crossing event detection;
//!   the validation reference for the discrete model.
//! - [`scenario`]: schedules for input torques and clutch capacities, plus
//!   the scenario text format.
//! - [`mat2`], [`rk45`]: small numeric support modules.

pub mod ct;
pub mod logic;
pub mod mat2;
pub mod model;
pub mod rk45;
pub mod scenario;

pub use ct::{simulate_ct, CtError, CtSolverConfig, CtTraceSample};
pub use logic::{decide_and_actuate, simulate_discrete, LockState, SimulationError, StepRecord};
pub use model::{
    kinetic_torques, ClutchCapacities, ClutchTorques, GearIndex, InputTorques, ParamsError,
    PowershiftParams, ShaftState, SlipSpeeds, RPM_TO_RAD_PER_SEC,
};
pub use scenario::{Interpolation, Scenario, ScenarioError, Schedule};
