//! Deterministic fixed-step integration with trace recording.
//!
//! Inputs that have no meaning between samples (noise, control) are latched
//! once per step through [`Dynamics::hold`] at the left endpoint and stay
//! constant through the RK4 stages. Analytic signals are evaluated at the
//! stage times by the system itself.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Euler,
    Rk4,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Euler => "Euler",
            Method::Rk4 => "RK4",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "Euler" | "euler" => Some(Method::Euler),
            "RK4" | "rk4" | "Rk4" => Some(Method::Rk4),
            _ => None,
        }
    }
}

/// Integration method and step size in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepScheme {
    pub method: Method,
    pub dt: f64,
}

impl StepScheme {
    pub const DEFAULT_DT: f64 = 1e-3;

    pub fn rk4(dt: f64) -> Self {
        StepScheme { method: Method::Rk4, dt }
    }

    pub fn euler(dt: f64) -> Self {
        StepScheme { method: Method::Euler, dt }
    }

    pub fn validate(&self) -> Result<(), OdeError> {
        if self.dt > 0.0 && self.dt.is_finite() {
            Ok(())
        } else {
            Err(OdeError::InvalidStep(self.dt))
        }
    }
}

impl Default for StepScheme {
    fn default() -> Self {
        Self::rk4(Self::DEFAULT_DT)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OdeError {
    InvalidStep(f64),
    InvalidHorizon {
        t0: f64,
        t_end: f64,
    },
    DimensionMismatch {
        expected: usize,
        got: usize,
    },
    /// A state component became NaN or infinite. `partial` holds the trace
    /// recorded up to the last finite grid point when available.
    Diverged {
        t: f64,
        state: Vec<f64>,
        partial: Option<Box<StateTrace>>,
    },
}

impl fmt::Display for OdeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidStep(dt) => write!(f, "step size {dt} must be positive and finite"),
            Self::InvalidHorizon { t0, t_end } => write!(f, "horizon end {t_end} must exceed start {t0}"),
            Self::DimensionMismatch { expected, got } => {
                write!(f, "state has {got} components, system expects {expected}")
            }
            Self::Diverged { t, state, .. } => {
                write!(f, "integration diverged at t={t}: state {state:?}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for OdeError {}

/// A continuous-time system `x' = f(t, x)` with per-step held inputs.
pub trait Dynamics {
    fn dim(&self) -> usize;

    /// Latches zero-order-held inputs at the left endpoint of a step.
    fn hold(&mut self, _t: f64, _state: &[f64]) {}

    fn derivative(&self, t: f64, state: &[f64], out: &mut [f64]);
}

/// Wraps a closure as a [`Dynamics`] with no held inputs.
#[derive(Debug, Clone)]
pub struct FnDynamics<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(f64, &[f64], &mut [f64])> FnDynamics<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnDynamics { dim, f }
    }
}

impl<F: Fn(f64, &[f64], &mut [f64])> Dynamics for FnDynamics<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn derivative(&self, t: f64, state: &[f64], out: &mut [f64]) {
        (self.f)(t, state, out)
    }
}

/// Reusable stage buffers for one state dimension.
#[derive(Debug, Clone)]
pub struct Stepper {
    scheme: StepScheme,
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Stepper {
    pub fn new(scheme: StepScheme, dim: usize) -> Self {
        Stepper {
            scheme,
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }

    pub fn scheme(&self) -> StepScheme {
        self.scheme
    }

    /// Advances `x` from `t` to `t + dt` in place. On a non-finite result `x`
    /// is left untouched and the offending state is returned.
    #[allow(clippy::needless_range_loop)]
    pub fn advance<F>(&mut self, mut f: F, t: f64, x: &mut [f64]) -> Result<(), OdeError>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let dt = self.scheme.dt;
        let n = x.len();
        match self.scheme.method {
            Method::Euler => {
                f(t, x, &mut self.k1);
                for i in 0..n {
                    self.tmp[i] = x[i] + dt * self.k1[i];
                }
            }
            Method::Rk4 => {
                let h = 0.5 * dt;
                f(t, x, &mut self.k1);
                for i in 0..n {
                    self.tmp[i] = x[i] + h * self.k1[i];
                }
                f(t + h, &self.tmp, &mut self.k2);
                for i in 0..n {
                    self.tmp[i] = x[i] + h * self.k2[i];
                }
                f(t + h, &self.tmp, &mut self.k3);
                for i in 0..n {
                    self.tmp[i] = x[i] + dt * self.k3[i];
                }
                f(t + dt, &self.tmp, &mut self.k4);
                let w = dt / 6.0;
                for i in 0..n {
                    self.tmp[i] = x[i] + w * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
                }
            }
        }
        if self.tmp.iter().all(|v| v.is_finite()) {
            x.copy_from_slice(&self.tmp);
            Ok(())
        } else {
            Err(OdeError::Diverged { t: t + dt, state: self.tmp.clone(), partial: None })
        }
    }
}

/// One step of `scheme` for `x' = rhs(t, x)`.
pub fn step<F>(scheme: StepScheme, rhs: F, t: f64, state: &[f64]) -> Result<Vec<f64>, OdeError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    scheme.validate()?;
    let mut x = state.to_vec();
    Stepper::new(scheme, x.len()).advance(rhs, t, &mut x)?;
    Ok(x)
}

/// Number of steps on the uniform grid covering `[t0, t_end]`.
///
/// A horizon that is not an integer multiple of `dt` (beyond rounding) is
/// truncated to the last grid point inside it.
pub fn grid_steps(t0: f64, t_end: f64, dt: f64) -> usize {
    let q = (t_end - t0) / dt;
    let r = math::round(q);
    if (q - r).abs() <= 1e-9 * r.max(1.0) {
        r as usize
    } else {
        math::floor(q) as usize
    }
}

/// Mutable view of one trace row handed to a [`Sampler`].
#[derive(Debug)]
pub struct RowMut<'a> {
    pub state: &'a mut [f64],
    pub reference: &'a mut [f64],
    pub input: &'a mut f64,
    pub extras: &'a mut [f64],
}

/// Extracts the recorded channels from the full system state at grid times.
pub trait Sampler {
    /// Width of the recorded state (and reference) vectors.
    fn width(&self) -> usize;

    /// Names of auxiliary channels, in column order.
    fn extra_names(&self) -> Vec<String> {
        Vec::new()
    }

    fn sample(&self, t: f64, state: &[f64], row: RowMut<'_>);
}

/// Records the full state with NaN references and input.
#[derive(Debug, Clone, Copy)]
pub struct StateOnly(pub usize);

impl Sampler for StateOnly {
    fn width(&self) -> usize {
        self.0
    }

    fn sample(&self, _t: f64, state: &[f64], row: RowMut<'_>) {
        row.state.copy_from_slice(state);
        row.reference.fill(f64::NAN);
        *row.input = f64::NAN;
    }
}

/// Time-indexed record of a simulation on a uniform grid.
///
/// Per-row vectors are stored flat (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct StateTrace {
    pub t0: f64,
    pub dt: f64,
    pub width: usize,
    pub times: Vec<f64>,
    pub states: Vec<f64>,
    pub refs: Vec<f64>,
    pub inputs: Vec<f64>,
    pub extra_names: Vec<String>,
    pub extras: Vec<f64>,
}

impl StateTrace {
    pub fn with_capacity(t0: f64, dt: f64, width: usize, extra_names: Vec<String>, rows: usize) -> Self {
        let ne = extra_names.len();
        StateTrace {
            t0,
            dt,
            width,
            times: Vec::with_capacity(rows),
            states: Vec::with_capacity(rows * width),
            refs: Vec::with_capacity(rows * width),
            inputs: Vec::with_capacity(rows),
            extra_names,
            extras: Vec::with_capacity(rows * ne),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn extra_count(&self) -> usize {
        self.extra_names.len()
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.width..(k + 1) * self.width]
    }

    pub fn reference(&self, k: usize) -> &[f64] {
        &self.refs[k * self.width..(k + 1) * self.width]
    }

    pub fn extras_row(&self, k: usize) -> &[f64] {
        let ne = self.extra_count();
        &self.extras[k * ne..(k + 1) * ne]
    }

    /// State channel `i` (0-based) over time.
    pub fn state_column(&self, i: usize) -> Vec<f64> {
        self.states.iter().skip(i).step_by(self.width).copied().collect()
    }

    pub fn ref_column(&self, i: usize) -> Vec<f64> {
        self.refs.iter().skip(i).step_by(self.width).copied().collect()
    }

    /// `x_i - ref_i` over time.
    pub fn error_column(&self, i: usize) -> Vec<f64> {
        (0..self.len()).map(|k| self.states[k * self.width + i] - self.refs[k * self.width + i]).collect()
    }

    pub fn extra_index(&self, name: &str) -> Option<usize> {
        self.extra_names.iter().position(|n| n == name)
    }

    pub fn extra_column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.extra_index(name)?;
        let ne = self.extra_count();
        Some(self.extras.iter().skip(j).step_by(ne).copied().collect())
    }

    /// Appends an auxiliary channel computed after the run.
    ///
    /// Panics if `values` does not have one entry per row.
    pub fn push_extra(&mut self, name: String, values: &[f64]) {
        assert_eq!(values.len(), self.len(), "extra channel length must match trace");
        let ne = self.extra_count();
        let mut merged = Vec::with_capacity(self.len() * (ne + 1));
        for (k, v) in values.iter().enumerate() {
            merged.extend_from_slice(&self.extras[k * ne..(k + 1) * ne]);
            merged.push(*v);
        }
        self.extras = merged;
        self.extra_names.push(name);
    }

    /// Keeps every `m`-th row (always including the first).
    pub fn decimate(&self, m: usize) -> StateTrace {
        let m = m.max(1);
        let ne = self.extra_count();
        let rows: Vec<usize> = (0..self.len()).step_by(m).collect();
        let mut out =
            StateTrace::with_capacity(self.t0, self.dt * m as f64, self.width, self.extra_names.clone(), rows.len());
        for k in rows {
            out.times.push(self.times[k]);
            out.states.extend_from_slice(self.state(k));
            out.refs.extend_from_slice(self.reference(k));
            out.inputs.push(self.inputs[k]);
            out.extras.extend_from_slice(&self.extras[k * ne..(k + 1) * ne]);
        }
        out
    }

    fn push_row<S: Sampler + ?Sized>(&mut self, sampler: &S, t: f64, state: &[f64]) {
        let w = self.width;
        let ne = self.extra_count();
        let base_s = self.states.len();
        self.states.resize(base_s + w, 0.0);
        let base_r = self.refs.len();
        self.refs.resize(base_r + w, 0.0);
        let base_e = self.extras.len();
        self.extras.resize(base_e + ne, 0.0);
        let mut input = 0.0;
        sampler.sample(
            t,
            state,
            RowMut {
                state: &mut self.states[base_s..],
                reference: &mut self.refs[base_r..],
                input: &mut input,
                extras: &mut self.extras[base_e..],
            },
        );
        self.times.push(t);
        self.inputs.push(input);
    }
}

/// Integrates `system` over `[t0, t_end]` on the grid `t0 + k dt` and
/// records every grid point through `sampler`.
pub fn simulate<D, S>(
    scheme: StepScheme,
    system: &mut D,
    t0: f64,
    t_end: f64,
    x0: &[f64],
    sampler: &S,
) -> Result<StateTrace, OdeError>
where
    D: Dynamics + ?Sized,
    S: Sampler + ?Sized,
{
    scheme.validate()?;
    if !(t_end > t0) {
        return Err(OdeError::InvalidHorizon { t0, t_end });
    }
    if x0.len() != system.dim() {
        return Err(OdeError::DimensionMismatch { expected: system.dim(), got: x0.len() });
    }
    let dt = scheme.dt;
    let steps = grid_steps(t0, t_end, dt);
    let mut trace = StateTrace::with_capacity(t0, dt, sampler.width(), sampler.extra_names(), steps + 1);
    let mut stepper = Stepper::new(scheme, x0.len());
    let mut x = x0.to_vec();

    system.hold(t0, &x);
    trace.push_row(sampler, t0, &x);
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        if k > 0 {
            system.hold(t, &x);
        }
        let sys = &*system;
        if let Err(OdeError::Diverged { t, state, .. }) =
            stepper.advance(|tt, xx, out| sys.derivative(tt, xx, out), t, &mut x)
        {
            return Err(OdeError::Diverged { t, state, partial: Some(Box::new(trace)) });
        }
        let t_next = t0 + (k + 1) as f64 * dt;
        trace.push_row(sampler, t_next, &x);
    }
    Ok(trace)
}
