//! Time-varying input schedules and the scenario file format.
//!
//! A scenario bundles the model parameters, the initial shaft speeds, and
//! four schedules: input torques `m1`, `m2` and clutch capacities `kca`,
//! `kcb`. The text format is line oriented:
//!
//! ```text
//! [params]
//! j1 = 0.1
//! j2 = 0.5
//! ra = 3
//! rb = 2
//! ts = 0.02
//! w1_0 = 1000 rpm
//! w2_0 = 100 rpm
//! t_end = 5.5
//!
//! [schedule m1]
//! mode: linear
//! 0 1
//! 3.2 1
//! 3.5 0
//! ```
//!
//! Speeds carry a unit suffix (`rpm` or `rad_s`). Every `[schedule <name>]`
//! block starts with a `mode: linear|hold` line followed by one `t value`
//! pair per line. `#` starts a comment line. Unknown keys, unknown sections,
//! duplicates, and missing entries are errors.

use crate::model::{
    ClutchCapacities, InputTorques, ParamsError, PowershiftParams, ShaftState, RPM_TO_RAD_PER_SEC,
};
use std::fmt::Write as _;
use thiserror::Error;

/// Breakpoint interpolation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    /// Linear interpolation between breakpoints.
    Linear,
    /// Previous-value hold; right-continuous at breakpoints.
    Hold,
}

impl Interpolation {
    fn as_str(&self) -> &'static str {
        match self {
            Interpolation::Linear => "linear",
            Interpolation::Hold => "hold",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("schedule needs at least one breakpoint")]
    Empty,
    #[error("breakpoint times must be strictly increasing (t = {t} at index {index})")]
    NonMonotonic { index: usize, t: f64 },
    #[error("breakpoint values must be finite (index {index})")]
    NonFinite { index: usize },
}

/// Piecewise schedule over time with constant extrapolation outside the span.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    breakpoints: Vec<(f64, f64)>,
    interpolation: Interpolation,
}

impl Schedule {
    pub fn new(
        breakpoints: Vec<(f64, f64)>,
        interpolation: Interpolation,
    ) -> Result<Self, ScheduleError> {
        if breakpoints.is_empty() {
            return Err(ScheduleError::Empty);
        }
        for (i, &(t, v)) in breakpoints.iter().enumerate() {
            if !t.is_finite() || !v.is_finite() {
                return Err(ScheduleError::NonFinite { index: i });
            }
            if i > 0 && t <= breakpoints[i - 1].0 {
                return Err(ScheduleError::NonMonotonic { index: i, t });
            }
        }
        Ok(Self {
            breakpoints,
            interpolation,
        })
    }

    /// Constant schedule, handy for tests and synthetic scenarios.
    pub fn constant(value: f64) -> Self {
        Self::new(vec![(0.0, value)], Interpolation::Hold).unwrap()
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    /// Value at time `t`: interpolated between bracketing breakpoints,
    /// first/last value outside the breakpoint span.
    pub fn sample(&self, t: f64) -> f64 {
        let pts = &self.breakpoints;
        if t <= pts[0].0 {
            return pts[0].1;
        }
        let last = pts[pts.len() - 1];
        if t >= last.0 {
            return last.1;
        }
        // Index of the first breakpoint strictly past t; t is inside the span.
        let hi = pts.partition_point(|&(bt, _)| bt <= t);
        let (t0, v0) = pts[hi - 1];
        let (t1, v1) = pts[hi];
        match self.interpolation {
            Interpolation::Hold => v0,
            Interpolation::Linear => v0 + (v1 - v0) * ((t - t0) / (t1 - t0)),
        }
    }

    fn min_value(&self) -> f64 {
        self.breakpoints
            .iter()
            .map(|&(_, v)| v)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Scenario parse/validation errors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("{0}")]
    Validation(String),
}

impl ScenarioError {
    fn syntax(line: usize, msg: impl Into<String>) -> Self {
        ScenarioError::Syntax {
            line,
            msg: msg.into(),
        }
    }
}

impl From<ParamsError> for ScenarioError {
    fn from(e: ParamsError) -> Self {
        ScenarioError::Validation(e.to_string())
    }
}

/// A fully validated simulation scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: PowershiftParams,
    /// Initial shaft speeds, rad/s.
    pub w0: ShaftState,
    /// Horizon of the scenario (s).
    pub t_end: f64,
    pub m1: Schedule,
    pub m2: Schedule,
    pub kca: Schedule,
    pub kcb: Schedule,
}

impl Scenario {
    /// Input torques sampled at `t`.
    pub fn inputs_at(&self, t: f64) -> InputTorques {
        InputTorques::new(self.m1.sample(t), self.m2.sample(t))
    }

    /// Clutch capacities sampled at `t`.
    pub fn caps_at(&self, t: f64) -> ClutchCapacities {
        ClutchCapacities::new(self.kca.sample(t), self.kcb.sample(t))
    }

    /// Number of whole steps of `ts` that fit in the horizon.
    pub fn n_steps_for(&self, ts: f64) -> usize {
        let q = self.t_end / ts;
        // Forgive roundoff when the horizon is an exact multiple of ts.
        if (q - q.round()).abs() <= 1e-9 * q.abs().max(1.0) {
            q.round() as usize
        } else {
            q.floor() as usize
        }
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps_for(self.params.ts())
    }

    /// Parse the scenario text format. See the module docs for the grammar.
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let mut parser = Parser::default();
        for (idx, raw) in text.lines().enumerate() {
            parser.line(idx + 1, raw)?;
        }
        parser.finish(text.lines().count())
    }

    /// Canonical text form; parsing it back yields an identical scenario.
    ///
    /// Speeds are always emitted in rad/s.
    pub fn to_canonical_string(&self) -> String {
        let mut out = String::new();
        let p = &self.params;
        writeln!(out, "[params]").unwrap();
        writeln!(out, "j1 = {}", p.j1()).unwrap();
        writeln!(out, "j2 = {}", p.j2()).unwrap();
        writeln!(out, "ra = {}", p.ra()).unwrap();
        writeln!(out, "rb = {}", p.rb()).unwrap();
        writeln!(out, "ts = {}", p.ts()).unwrap();
        writeln!(out, "w1_0 = {} rad_s", self.w0.w1).unwrap();
        writeln!(out, "w2_0 = {} rad_s", self.w0.w2).unwrap();
        writeln!(out, "t_end = {}", self.t_end).unwrap();
        for (name, sched) in [
            ("m1", &self.m1),
            ("m2", &self.m2),
            ("kca", &self.kca),
            ("kcb", &self.kcb),
        ] {
            writeln!(out).unwrap();
            writeln!(out, "[schedule {name}]").unwrap();
            writeln!(out, "mode: {}", sched.interpolation().as_str()).unwrap();
            for &(t, v) in sched.breakpoints() {
                writeln!(out, "{t} {v}").unwrap();
            }
        }
        out
    }
}

const PARAM_KEYS: [&str; 8] = ["j1", "j2", "ra", "rb", "ts", "w1_0", "w2_0", "t_end"];
const SCHEDULE_NAMES: [&str; 4] = ["m1", "m2", "kca", "kcb"];

#[derive(Default)]
enum Section {
    #[default]
    None,
    Params,
    Schedule(usize),
}

#[derive(Default)]
struct ScheduleDraft {
    mode: Option<Interpolation>,
    points: Vec<(f64, f64)>,
    seen: bool,
}

#[derive(Default)]
struct Parser {
    section: Section,
    params: [Option<f64>; 8],
    speed_unit_rpm: [bool; 2],
    schedules: [ScheduleDraft; 4],
    saw_any: bool,
}

impl Parser {
    fn line(&mut self, lineno: usize, raw: &str) -> Result<(), ScenarioError> {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            return Ok(());
        }
        self.saw_any = true;

        if let Some(header) = line.strip_prefix('[') {
            let header = header
                .strip_suffix(']')
                .ok_or_else(|| ScenarioError::syntax(lineno, "unterminated section header"))?
                .trim();
            if header == "params" {
                self.section = Section::Params;
                return Ok(());
            }
            if let Some(name) = header.strip_prefix("schedule ") {
                let name = name.trim();
                let slot = SCHEDULE_NAMES
                    .iter()
                    .position(|&s| s == name)
                    .ok_or_else(|| {
                        ScenarioError::syntax(lineno, format!("unknown schedule '{name}'"))
                    })?;
                if self.schedules[slot].seen {
                    return Err(ScenarioError::syntax(
                        lineno,
                        format!("duplicate schedule '{name}'"),
                    ));
                }
                self.schedules[slot].seen = true;
                self.section = Section::Schedule(slot);
                return Ok(());
            }
            return Err(ScenarioError::syntax(
                lineno,
                format!("unknown section '[{header}]'"),
            ));
        }

        match self.section {
            Section::None => Err(ScenarioError::syntax(
                lineno,
                "content before any section header",
            )),
            Section::Params => self.params_line(lineno, line),
            Section::Schedule(slot) => self.schedule_line(lineno, slot, line),
        }
    }

    fn params_line(&mut self, lineno: usize, line: &str) -> Result<(), ScenarioError> {
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ScenarioError::syntax(lineno, "expected 'key = value'"))?;
        let key = key.trim();
        let value = value.trim();
        let slot = PARAM_KEYS
            .iter()
            .position(|&k| k == key)
            .ok_or_else(|| ScenarioError::syntax(lineno, format!("unknown key '{key}'")))?;
        if self.params[slot].is_some() {
            return Err(ScenarioError::syntax(
                lineno,
                format!("duplicate key '{key}'"),
            ));
        }

        let number = if key == "w1_0" || key == "w2_0" {
            let (num, unit) = value.split_once(char::is_whitespace).ok_or_else(|| {
                ScenarioError::syntax(lineno, format!("'{key}' needs a unit suffix: rpm or rad_s"))
            })?;
            let rpm = match unit.trim() {
                "rpm" => true,
                "rad_s" => false,
                other => {
                    return Err(ScenarioError::syntax(
                        lineno,
                        format!("unknown speed unit '{other}' (expected rpm or rad_s)"),
                    ))
                }
            };
            self.speed_unit_rpm[slot - 5] = rpm;
            num.trim()
        } else {
            value
        };

        let parsed: f64 = number.parse().map_err(|_| {
            ScenarioError::syntax(lineno, format!("invalid number '{number}' for '{key}'"))
        })?;
        if !parsed.is_finite() {
            return Err(ScenarioError::syntax(
                lineno,
                format!("'{key}' must be finite"),
            ));
        }
        self.params[slot] = Some(parsed);
        Ok(())
    }

    fn schedule_line(
        &mut self,
        lineno: usize,
        slot: usize,
        line: &str,
    ) -> Result<(), ScenarioError> {
        let draft = &mut self.schedules[slot];
        if let Some(mode) = line.strip_prefix("mode:") {
            if draft.mode.is_some() {
                return Err(ScenarioError::syntax(lineno, "duplicate mode line"));
            }
            draft.mode = Some(match mode.trim() {
                "linear" => Interpolation::Linear,
                "hold" => Interpolation::Hold,
                other => {
                    return Err(ScenarioError::syntax(
                        lineno,
                        format!("unknown mode '{other}' (expected linear or hold)"),
                    ))
                }
            });
            return Ok(());
        }
        if draft.mode.is_none() {
            return Err(ScenarioError::syntax(
                lineno,
                "schedule must start with a 'mode: linear|hold' line",
            ));
        }
        let mut it = line.split_whitespace();
        let (t, v) = match (it.next(), it.next(), it.next()) {
            (Some(t), Some(v), None) => (t, v),
            _ => {
                return Err(ScenarioError::syntax(
                    lineno,
                    "expected exactly two numbers: 't value'",
                ))
            }
        };
        let t: f64 = t
            .parse()
            .map_err(|_| ScenarioError::syntax(lineno, format!("invalid time '{t}'")))?;
        let v: f64 = v
            .parse()
            .map_err(|_| ScenarioError::syntax(lineno, format!("invalid value '{v}'")))?;
        draft.points.push((t, v));
        Ok(())
    }

    fn finish(self, last_line: usize) -> Result<Scenario, ScenarioError> {
        if !self.saw_any {
            return Err(ScenarioError::syntax(
                last_line.max(1),
                "empty scenario: no sections found",
            ));
        }
        let mut values = [0.0; 8];
        for (i, v) in self.params.iter().enumerate() {
            values[i] = v.ok_or_else(|| {
                ScenarioError::Validation(format!("missing key '{}' in [params]", PARAM_KEYS[i]))
            })?;
        }
        let [j1, j2, ra, rb, ts, mut w1, mut w2, t_end] = values;
        if self.speed_unit_rpm[0] {
            w1 *= RPM_TO_RAD_PER_SEC;
        }
        if self.speed_unit_rpm[1] {
            w2 *= RPM_TO_RAD_PER_SEC;
        }
        let params = PowershiftParams::new(j1, j2, ra, rb, ts)?;
        if t_end <= 0.0 {
            return Err(ScenarioError::Validation(format!(
                "t_end must be strictly positive, got {t_end}"
            )));
        }

        let mut built: Vec<Schedule> = Vec::with_capacity(4);
        for (i, draft) in self.schedules.into_iter().enumerate() {
            let name = SCHEDULE_NAMES[i];
            if !draft.seen {
                return Err(ScenarioError::Validation(format!(
                    "missing [schedule {name}] block"
                )));
            }
            let sched = Schedule::new(draft.points, draft.mode.unwrap())
                .map_err(|e| ScenarioError::Validation(format!("schedule '{name}': {e}")))?;
            if (name == "kca" || name == "kcb") && sched.min_value() < 0.0 {
                return Err(ScenarioError::Validation(format!(
                    "schedule '{name}': capacity must be non-negative"
                )));
            }
            built.push(sched);
        }
        let kcb = built.pop().unwrap();
        let kca = built.pop().unwrap();
        let m2 = built.pop().unwrap();
        let m1 = built.pop().unwrap();

        Ok(Scenario {
            params,
            w0: ShaftState::new(w1, w2),
            t_end,
            m1,
            m2,
            kca,
            kcb,
        })
    }
}
