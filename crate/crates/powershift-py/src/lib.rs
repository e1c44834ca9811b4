//! Python bindings for the powershift simulator.
//!
//! Exposes the model parameters, the exact torque solves, and both
//! simulation drivers so analysis and plotting can stay in Python:
//!
//! ```python
//! from powershift_py import Params, Scenario
//! scn = Scenario.from_file("scenarios/paper_like.scn")
//! trace = scn.simulate()
//! locked = [(r.t, r.lock_a, r.lock_b) for r in trace]
//! ```

use powershift::{
    simulate_ct, simulate_discrete, CtSolverConfig, GearIndex, InputTorques, PowershiftParams,
    Scenario as CoreScenario, ShaftState, RPM_TO_RAD_PER_SEC,
};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

/// Row-major 2x2 matrix as nested tuples.
type Mat2Rows = ((f64, f64), (f64, f64));

fn gear_from_int(gear: u8) -> PyResult<GearIndex> {
    match gear {
        1 => Ok(GearIndex::First),
        2 => Ok(GearIndex::Second),
        other => Err(PyValueError::new_err(format!(
            "gear must be 1 or 2, got {other}"
        ))),
    }
}

/// Convert a speed in rev/min to rad/s.
#[pyfunction]
fn rpm_to_rad_s(rpm: f64) -> f64 {
    rpm * RPM_TO_RAD_PER_SEC
}

/// Model parameters: inertias `j1`, `j2` (kg·m²), gear ratios `ra`, `rb`,
/// and the fixed step size `ts` (s).
#[pyclass(name = "Params", skip_from_py_object)]
#[derive(Clone)]
struct ParamsPy {
    inner: PowershiftParams,
}

#[pymethods]
impl ParamsPy {
    #[new]
    fn new(j1: f64, j2: f64, ra: f64, rb: f64, ts: f64) -> PyResult<Self> {
        PowershiftParams::new(j1, j2, ra, rb, ts)
            .map(|inner| Self { inner })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn j1(&self) -> f64 {
        self.inner.j1()
    }
    #[getter]
    fn j2(&self) -> f64 {
        self.inner.j2()
    }
    #[getter]
    fn ra(&self) -> f64 {
        self.inner.ra()
    }
    #[getter]
    fn rb(&self) -> f64 {
        self.inner.rb()
    }
    #[getter]
    fn ts(&self) -> f64 {
        self.inner.ts()
    }

    /// Slip speeds `(da, db)` for shaft speeds `(w1, w2)` in rad/s.
    fn slip_speeds(&self, w1: f64, w2: f64) -> (f64, f64) {
        let d = self.inner.slip_speeds(ShaftState::new(w1, w2));
        (d.da, d.db)
    }

    /// One fixed step with given input and clutch torques; returns `(w1, w2)`.
    fn step(&self, w1: f64, w2: f64, m1: f64, m2: f64, mca: f64, mcb: f64) -> (f64, f64) {
        let w = self.inner.step_explicit(
            ShaftState::new(w1, w2),
            InputTorques::new(m1, m2),
            powershift::ClutchTorques::new(mca, mcb),
        );
        (w.w1, w.w2)
    }

    /// Exact torque that zeroes the slip of `gear` (1 or 2) in one step,
    /// given the other clutch's torque.
    fn engagement_torque(
        &self,
        m1: f64,
        m2: f64,
        w1_prev: f64,
        w2_prev: f64,
        gear: u8,
        other_torque: f64,
    ) -> PyResult<f64> {
        Ok(self.inner.engagement_torque(
            InputTorques::new(m1, m2),
            ShaftState::new(w1_prev, w2_prev),
            gear_from_int(gear)?,
            other_torque,
        ))
    }

    /// Torques `(mca, mcb)` that bring both shafts to rest in one step.
    fn full_lock_torques(&self, m1: f64, m2: f64, w1_prev: f64, w2_prev: f64) -> (f64, f64) {
        let mc = self
            .inner
            .full_lock_torques(InputTorques::new(m1, m2), ShaftState::new(w1_prev, w2_prev));
        (mc.mca, mc.mcb)
    }

    /// Coupling matrices as nested tuples `(R, JR)`, row major.
    fn coupling_matrices(&self) -> (Mat2Rows, Mat2Rows) {
        let (r, jr) = self.inner.coupling_matrices();
        (
            ((r.a11, r.a12), (r.a21, r.a22)),
            ((jr.a11, jr.a12), (jr.a21, jr.a22)),
        )
    }

    fn __repr__(&self) -> String {
        format!(
            "Params(j1={}, j2={}, ra={}, rb={}, ts={})",
            self.inner.j1(),
            self.inner.j2(),
            self.inner.ra(),
            self.inner.rb(),
            self.inner.ts()
        )
    }
}

/// One row of a fixed-step simulation trace.
#[pyclass(name = "StepRecord", skip_from_py_object)]
#[derive(Clone)]
struct StepRecordPy {
    #[pyo3(get)]
    k: usize,
    #[pyo3(get)]
    t: f64,
    #[pyo3(get)]
    w1: f64,
    #[pyo3(get)]
    w2: f64,
    #[pyo3(get)]
    delta_a: f64,
    #[pyo3(get)]
    delta_b: f64,
    #[pyo3(get)]
    m_ca: f64,
    #[pyo3(get)]
    m_cb: f64,
    #[pyo3(get)]
    k_ca: f64,
    #[pyo3(get)]
    k_cb: f64,
    #[pyo3(get)]
    lock_a: bool,
    #[pyo3(get)]
    lock_b: bool,
}

#[pymethods]
impl StepRecordPy {
    fn __repr__(&self) -> String {
        format!(
            "StepRecord(k={}, t={:.4}, w1={:.4}, w2={:.4}, lock_a={}, lock_b={})",
            self.k, self.t, self.w1, self.w2, self.lock_a, self.lock_b
        )
    }
}

/// One accepted sample of the adaptive continuous-time reference.
#[pyclass(name = "CtSample", skip_from_py_object)]
#[derive(Clone)]
struct CtSamplePy {
    #[pyo3(get)]
    t: f64,
    #[pyo3(get)]
    w1: f64,
    #[pyo3(get)]
    w2: f64,
    #[pyo3(get)]
    m_ca: f64,
    #[pyo3(get)]
    m_cb: f64,
    #[pyo3(get)]
    lock_a: bool,
    #[pyo3(get)]
    lock_b: bool,
}

#[pymethods]
impl CtSamplePy {
    fn __repr__(&self) -> String {
        format!(
            "CtSample(t={:.6}, w1={:.4}, w2={:.4}, lock_a={}, lock_b={})",
            self.t, self.w1, self.w2, self.lock_a, self.lock_b
        )
    }
}

/// A parsed scenario: parameters, initial speeds, horizon, and the input
/// torque / clutch capacity schedules.
#[pyclass(name = "Scenario", skip_from_py_object)]
#[derive(Clone)]
struct ScenarioPy {
    inner: CoreScenario,
}

#[pymethods]
impl ScenarioPy {
    /// Parse scenario text.
    #[staticmethod]
    fn from_str(text: &str) -> PyResult<Self> {
        CoreScenario::parse(text)
            .map(|inner| Self { inner })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// Read and parse a scenario file.
    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
        Self::from_str(&text)
    }

    #[getter]
    fn params(&self) -> ParamsPy {
        ParamsPy {
            inner: self.inner.params,
        }
    }

    #[getter]
    fn t_end(&self) -> f64 {
        self.inner.t_end
    }

    /// Initial shaft speeds `(w1, w2)` in rad/s.
    #[getter]
    fn w0(&self) -> (f64, f64) {
        (self.inner.w0.w1, self.inner.w0.w2)
    }

    /// Canonical text form; parsing it back gives an identical scenario.
    fn to_canonical_str(&self) -> String {
        self.inner.to_canonical_string()
    }

    /// Input torques `(m1, m2)` sampled at time `t`.
    fn inputs_at(&self, t: f64) -> (f64, f64) {
        let m = self.inner.inputs_at(t);
        (m.m1, m.m2)
    }

    /// Clutch capacities `(kca, kcb)` sampled at time `t`.
    fn caps_at(&self, t: f64) -> (f64, f64) {
        let c = self.inner.caps_at(t);
        (c.kca, c.kcb)
    }

    /// Run the fixed-step simulation over the whole horizon.
    fn simulate(&self) -> PyResult<Vec<StepRecordPy>> {
        let records = simulate_discrete(
            &self.inner.params,
            &self.inner,
            self.inner.w0,
            self.inner.n_steps(),
        )
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(records
            .iter()
            .map(|r| StepRecordPy {
                k: r.k,
                t: r.t,
                w1: r.w.w1,
                w2: r.w.w2,
                delta_a: r.d.da,
                delta_b: r.d.db,
                m_ca: r.mc.mca,
                m_cb: r.mc.mcb,
                k_ca: r.caps.kca,
                k_cb: r.caps.kcb,
                lock_a: r.locks.lock_a,
                lock_b: r.locks.lock_b,
            })
            .collect())
    }

    /// Integrate the adaptive continuous-time reference over the horizon.
    #[pyo3(signature = (rel_tol=1e-6, abs_tol=1e-9, max_step=1e-3, event_tol=1e-9))]
    fn simulate_ct(
        &self,
        rel_tol: f64,
        abs_tol: f64,
        max_step: f64,
        event_tol: f64,
    ) -> PyResult<Vec<CtSamplePy>> {
        let cfg = CtSolverConfig {
            rel_tol,
            abs_tol,
            max_step,
            event_tol,
        };
        let samples = simulate_ct(
            &self.inner.params,
            &self.inner,
            self.inner.w0,
            self.inner.t_end,
            &cfg,
        )
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(samples
            .iter()
            .map(|s| CtSamplePy {
                t: s.t,
                w1: s.w.w1,
                w2: s.w.w2,
                m_ca: s.mc.mca,
                m_cb: s.mc.mcb,
                lock_a: s.locks.lock_a,
                lock_b: s.locks.lock_b,
            })
            .collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(t_end={}, ts={}, w0=({:.4}, {:.4}))",
            self.inner.t_end,
            self.inner.params.ts(),
            self.inner.w0.w1,
            self.inner.w0.w2
        )
    }
}

#[pymodule]
fn powershift_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<ParamsPy>()?;
    m.add_class::<ScenarioPy>()?;
    m.add_class::<StepRecordPy>()?;
    m.add_class::<CtSamplePy>()?;
    m.add_function(wrap_pyfunction!(rpm_to_rad_s, m)?)?;
    Ok(())
}
