//! Scenario runners: signal tracking, PID closed loop, drift study and
//! epsilon sweep.
//!
//! Everything here is a pure computation over a [`ScenarioSpec`]; file IO and
//! parallel execution live in the companion crate.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::analysis::{self, AnalysisError, ChannelMetrics, RunMetrics};
use crate::math;
use crate::observer::{Diagnostic, ObserverConfig, ObserverSpec};
use crate::ode::{self, Dynamics, OdeError, RowMut, Sampler, StateTrace, StepScheme};
use crate::signals::{Channel, NoiseError, NoiseSpec, SignalError, SignalSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioTag {
    SignalTracking,
    PidClosedLoop,
    DriftStudy,
    EpsilonSweep,
}

impl ScenarioTag {
    pub const ALL: [ScenarioTag; 4] = [Self::SignalTracking, Self::PidClosedLoop, Self::DriftStudy, Self::EpsilonSweep];

    pub fn name(self) -> &'static str {
        match self {
            Self::SignalTracking => "SignalTracking",
            Self::PidClosedLoop => "PidClosedLoop",
            Self::DriftStudy => "DriftStudy",
            Self::EpsilonSweep => "EpsilonSweep",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == s)
    }
}

impl fmt::Display for ScenarioTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Double-integrator plant state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantState {
    pub z1: f64,
    pub z2: f64,
}

/// `u = kp e2 + ki e1 + kd e3 + zd''`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

impl PidGains {
    /// Characteristic polynomial of the ideal tracking error
    /// `w''' = ki w + kp w' + kd w''`, descending powers.
    pub fn error_poly(&self) -> [f64; 4] {
        [1.0, -self.kd, -self.kp, -self.ki]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub tag: ScenarioTag,
    pub observer: ObserverSpec,
    /// Measured signal; the reference trajectory `z_d` for the closed loop.
    pub signal: SignalSpec,
    pub noise: Option<NoiseSpec>,
    pub scheme: StepScheme,
    pub horizon: f64,
    pub settle_time: f64,
    pub pid: Option<PidGains>,
    pub plant_initial: Option<PlantState>,
    /// Strictly decreasing values in `(0, 1)`.
    pub sweep: Vec<f64>,
}

/// A problem with a scenario document.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioIssue {
    Observer(Diagnostic),
    Noise(NoiseError),
    Signal(SignalError),
    Scheme(OdeError),
    HorizonNotAfterSettle {
        horizon: f64,
        settle_time: f64,
    },
    NegativeSettle(f64),
    MissingPid,
    MissingPlant,
    NonFinitePlant,
    NonFinitePid,
    /// The closed loop reads integral, value and derivative estimates.
    PidNeedsDerivIntegral {
        n: usize,
        p: usize,
    },
    EmptySweep,
    SweepOutOfRange(f64),
    SweepNotDecreasing {
        index: usize,
    },
    SweepWithNoise,
}

impl fmt::Display for ScenarioIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Observer(d) => write!(f, "observer: {d}"),
            Self::Noise(e) => write!(f, "noise: {e}"),
            Self::Signal(e) => write!(f, "signal: {e}"),
            Self::Scheme(e) => write!(f, "scheme: {e}"),
            Self::HorizonNotAfterSettle { horizon, settle_time } => {
                write!(f, "horizon {horizon} must exceed settle_time {settle_time}")
            }
            Self::NegativeSettle(s) => write!(f, "settle_time {s} must be >= 0"),
            Self::MissingPid => f.write_str("PidClosedLoop needs pid gains"),
            Self::MissingPlant => f.write_str("PidClosedLoop needs a plant initial state"),
            Self::NonFinitePlant => f.write_str("plant initial state is not finite"),
            Self::NonFinitePid => f.write_str("pid gains are not finite"),
            Self::PidNeedsDerivIntegral { n, p } => {
                write!(f, "PidClosedLoop needs the (n,p)=(3,2) observer, got ({n},{p})")
            }
            Self::EmptySweep => f.write_str("EpsilonSweep needs at least one epsilon"),
            Self::SweepOutOfRange(e) => write!(f, "sweep epsilon {e} outside (0, 1)"),
            Self::SweepNotDecreasing { index } => {
                write!(f, "sweep list not strictly decreasing at index {index}")
            }
            Self::SweepWithNoise => f.write_str("EpsilonSweep runs noise-free; remove the noise section"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioError {
    Invalid(Vec<ScenarioIssue>),
    Ode(OdeError),
    Analysis(AnalysisError),
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Invalid(issues) => {
                write!(f, "invalid scenario ({} issue(s))", issues.len())?;
                for i in issues {
                    write!(f, "\n  - {i}")?;
                }
                Ok(())
            }
            Self::Ode(e) => write!(f, "{e}"),
            Self::Analysis(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ScenarioError {}

impl From<OdeError> for ScenarioError {
    fn from(e: OdeError) -> Self {
        ScenarioError::Ode(e)
    }
}

impl From<AnalysisError> for ScenarioError {
    fn from(e: AnalysisError) -> Self {
        ScenarioError::Analysis(e)
    }
}

impl ScenarioSpec {
    /// Every problem with the document. Sweeps skip observer validation,
    /// since each member is validated at its own epsilon.
    pub fn issues(&self) -> Vec<ScenarioIssue> {
        let mut out = Vec::new();
        if self.tag != ScenarioTag::EpsilonSweep {
            if let Err(diags) = self.observer.validate() {
                out.extend(diags.into_iter().map(ScenarioIssue::Observer));
            }
        }
        if let Some(noise) = &self.noise {
            if let Err(e) = noise.validate() {
                out.push(ScenarioIssue::Noise(e));
            }
        }
        if let Err(e) = self.scheme.validate() {
            out.push(ScenarioIssue::Scheme(e));
        }
        if !(self.settle_time >= 0.0) {
            out.push(ScenarioIssue::NegativeSettle(self.settle_time));
        }
        if !(self.horizon > self.settle_time) || !self.horizon.is_finite() {
            out.push(ScenarioIssue::HorizonNotAfterSettle { horizon: self.horizon, settle_time: self.settle_time });
        }
        let mut needed: Vec<Channel> =
            crate::observer::channel_roles(self.observer.n.max(2), self.observer.p.clamp(2, self.observer.n.max(2)));
        match self.tag {
            ScenarioTag::PidClosedLoop => {
                if (self.observer.n, self.observer.p) != (3, 2) {
                    out.push(ScenarioIssue::PidNeedsDerivIntegral { n: self.observer.n, p: self.observer.p });
                }
                match self.pid {
                    None => out.push(ScenarioIssue::MissingPid),
                    Some(g) if !(g.kp.is_finite() && g.ki.is_finite() && g.kd.is_finite()) => {
                        out.push(ScenarioIssue::NonFinitePid)
                    }
                    _ => {}
                }
                match self.plant_initial {
                    None => out.push(ScenarioIssue::MissingPlant),
                    Some(z) if !(z.z1.is_finite() && z.z2.is_finite()) => out.push(ScenarioIssue::NonFinitePlant),
                    _ => {}
                }
                needed = vec![Channel::Integral, Channel::Value, Channel::Derivative, Channel::SecondDerivative];
            }
            ScenarioTag::EpsilonSweep => {
                if self.sweep.is_empty() {
                    out.push(ScenarioIssue::EmptySweep);
                }
                for &e in &self.sweep {
                    if !(e > 0.0 && e < 1.0) {
                        out.push(ScenarioIssue::SweepOutOfRange(e));
                    }
                }
                for i in 1..self.sweep.len() {
                    if !(self.sweep[i] < self.sweep[i - 1]) {
                        out.push(ScenarioIssue::SweepNotDecreasing { index: i });
                    }
                }
                if self.noise.is_some() {
                    out.push(ScenarioIssue::SweepWithNoise);
                }
            }
            _ => {}
        }
        needed.dedup();
        for ch in needed {
            if let Err(e) = self.signal.supports(ch) {
                out.push(ScenarioIssue::Signal(e));
                break;
            }
        }
        out
    }

    fn checked(&self) -> Result<(), ScenarioError> {
        let issues = self.issues();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(ScenarioError::Invalid(issues))
        }
    }

    fn config(&self) -> Result<ObserverConfig, ScenarioError> {
        self.observer
            .validate()
            .map_err(|d| ScenarioError::Invalid(d.into_iter().map(ScenarioIssue::Observer).collect()))
    }
}

/// Trace, windowed metrics and non-fatal warnings of one simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    pub trace: StateTrace,
    pub metrics: RunMetrics,
    pub warnings: Vec<String>,
}

fn step_warning(cfg: &ObserverConfig, scheme: StepScheme) -> Option<String> {
    let limit = cfg.suggested_max_dt();
    (scheme.dt > limit).then(|| {
        format!("dt={} exceeds the suggested eps^(n+1)/10 = {limit:.3e}; RK4 may be inaccurate or unstable", scheme.dt)
    })
}

/// Observer driven by `signal + noise`, noise held per step.
struct TrackingSystem<'a> {
    cfg: &'a ObserverConfig,
    signal: &'a SignalSpec,
    noise: Option<&'a NoiseSpec>,
    held: f64,
}

impl Dynamics for TrackingSystem<'_> {
    fn dim(&self) -> usize {
        self.cfg.order()
    }

    fn hold(&mut self, t: f64, _state: &[f64]) {
        self.held = self.noise.map_or(0.0, |n| n.sample(t));
    }

    #[inline]
    fn derivative(&self, t: f64, state: &[f64], out: &mut [f64]) {
        self.cfg.rhs(state, self.signal.value(t) + self.held, out);
    }
}

struct TrackingSampler<'a> {
    channels: Vec<Channel>,
    signal: &'a SignalSpec,
    noise: Option<&'a NoiseSpec>,
}

impl Sampler for TrackingSampler<'_> {
    fn width(&self) -> usize {
        self.channels.len()
    }

    fn sample(&self, t: f64, state: &[f64], row: RowMut<'_>) {
        row.state.copy_from_slice(state);
        for (r, ch) in row.reference.iter_mut().zip(&self.channels) {
            *r = self.signal.eval_unchecked(t, *ch);
        }
        *row.input = self.signal.value(t) + self.noise.map_or(0.0, |n| n.sample(t));
    }
}

fn tracking_trace(spec: &ScenarioSpec, cfg: &ObserverConfig) -> Result<StateTrace, ScenarioError> {
    let noise = spec.noise.as_ref();
    let mut sys = TrackingSystem { cfg, signal: &spec.signal, noise, held: 0.0 };
    let sampler = TrackingSampler { channels: cfg.channels(), signal: &spec.signal, noise };
    Ok(ode::simulate(spec.scheme, &mut sys, 0.0, spec.horizon, cfg.initial_state(), &sampler)?)
}

/// Observer alone, fed the signal plus optional noise.
pub fn run_signal_tracking(spec: &ScenarioSpec) -> Result<ScenarioRun, ScenarioError> {
    spec.checked()?;
    let cfg = spec.config()?;
    let trace = tracking_trace(spec, &cfg)?;
    let metrics = analysis::compute_metrics(&trace, spec.settle_time)?;
    Ok(ScenarioRun { trace, metrics, warnings: step_warning(&cfg, spec.scheme).into_iter().collect() })
}

/// Observer and classical baselines integrating the same noisy input.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftReport {
    pub run: ScenarioRun,
    /// 0-based state index of the observer's integral channel.
    pub integral_state: usize,
    pub observer_slope: f64,
    pub trapezoid_slope: f64,
    pub simpson_slope: f64,
    /// Long-run mean of the configured noise (0 when noise-free).
    pub noise_mean: f64,
}

impl DriftReport {
    /// `|trapezoid slope| / |observer slope|`.
    pub fn separation(&self) -> f64 {
        self.trapezoid_slope.abs() / self.observer_slope.abs()
    }

    pub fn report_lines(&self) -> Vec<String> {
        vec![
            format!("drift.integral_state = x{}", self.integral_state + 1),
            format!("drift.observer_slope = {:.17e}", self.observer_slope),
            format!("drift.trapezoid_slope = {:.17e}", self.trapezoid_slope),
            format!("drift.simpson_slope = {:.17e}", self.simpson_slope),
            format!("drift.noise_mean = {:.17e}", self.noise_mean),
            format!("drift.separation = {:.17e}", self.separation()),
        ]
    }
}

pub const TRAPEZOID_COLUMN: &str = "baseline_trapezoid";
pub const SIMPSON_COLUMN: &str = "baseline_simpson";

/// Appends a baseline column and its error metrics against `truth`.
fn add_baseline(
    run: &mut ScenarioRun,
    column: &str,
    metric: &str,
    values: Vec<f64>,
    truth: &[f64],
    settle_time: f64,
) -> Result<ChannelMetrics, AnalysisError> {
    let err: Vec<f64> = values.iter().zip(truth).map(|(v, r)| v - r).collect();
    let m = analysis::channel_metrics(metric, &run.trace.times, &err, settle_time)?;
    run.trace.push_extra(String::from(column), &values);
    run.metrics.channels.push(m.clone());
    Ok(m)
}

pub fn run_drift_study(spec: &ScenarioSpec) -> Result<DriftReport, ScenarioError> {
    spec.checked()?;
    let cfg = spec.config()?;
    let mut run = ScenarioRun {
        trace: tracking_trace(spec, &cfg)?,
        metrics: RunMetrics { settle_time: 0.0, samples: 0, channels: Vec::new(), diverged: false },
        warnings: step_warning(&cfg, spec.scheme).into_iter().collect(),
    };
    run.metrics = analysis::compute_metrics(&run.trace, spec.settle_time)?;
    let integral_state =
        cfg.channels().iter().position(|c| *c == Channel::Integral).expect("every variant estimates an integral");
    let truth = run.trace.ref_column(integral_state);
    let trap = analysis::cumulative_trapezoid(&run.trace.times, &run.trace.inputs)?;
    let simp = analysis::cumulative_simpson(&run.trace.times, &run.trace.inputs)?;
    let t = add_baseline(&mut run, TRAPEZOID_COLUMN, "trapezoid", trap, &truth, spec.settle_time)?;
    let s = add_baseline(&mut run, SIMPSON_COLUMN, "simpson", simp, &truth, spec.settle_time)?;
    Ok(DriftReport {
        integral_state,
        observer_slope: run.metrics.channels[integral_state].drift_slope,
        trapezoid_slope: t.drift_slope,
        simpson_slope: s.drift_slope,
        noise_mean: spec.noise.as_ref().map_or(0.0, NoiseSpec::mean),
        run,
    })
}

/// Plant `z1' = z2, z2' = u`, a running `w = int z1` for the truth, and the
/// observer on `y = z1 + noise`. State layout `[z1, z2, w, x1, x2, x3]`.
#[derive(Clone)]
struct ClosedLoop<'a> {
    cfg: &'a ObserverConfig,
    reference: &'a SignalSpec,
    noise: Option<&'a NoiseSpec>,
    gains: PidGains,
    held_noise: f64,
    held_u: f64,
}

impl ClosedLoop<'_> {
    fn control(&self, t: f64, x: &[f64]) -> f64 {
        let r = self.reference;
        let e1 = x[0] - r.eval_unchecked(t, Channel::Integral);
        let e2 = x[1] - r.value(t);
        let e3 = x[2] - r.eval_unchecked(t, Channel::Derivative);
        self.gains.kp * e2 + self.gains.ki * e1 + self.gains.kd * e3 + r.eval_unchecked(t, Channel::SecondDerivative)
    }
}

const PLANT_DIM: usize = 3;

impl Dynamics for ClosedLoop<'_> {
    fn dim(&self) -> usize {
        PLANT_DIM + self.cfg.order()
    }

    fn hold(&mut self, t: f64, state: &[f64]) {
        self.held_noise = self.noise.map_or(0.0, |n| n.sample(t));
        self.held_u = self.control(t, &state[PLANT_DIM..]);
    }

    fn derivative(&self, _t: f64, state: &[f64], out: &mut [f64]) {
        out[0] = state[1];
        out[1] = self.held_u;
        out[2] = state[0];
        self.cfg.rhs(&state[PLANT_DIM..], state[0] + self.held_noise, &mut out[PLANT_DIM..]);
    }
}

struct ClosedLoopSampler<'a> {
    sys: &'a ClosedLoop<'a>,
}

pub const CLOSED_LOOP_EXTRAS: [&str; 5] = ["u", "z1", "z2", "z_d", "z_d_dot"];

impl Sampler for ClosedLoopSampler<'_> {
    fn width(&self) -> usize {
        self.sys.cfg.order()
    }

    fn extra_names(&self) -> Vec<String> {
        CLOSED_LOOP_EXTRAS.iter().map(|s| String::from(*s)).collect()
    }

    fn sample(&self, t: f64, state: &[f64], row: RowMut<'_>) {
        let (z1, z2, w) = (state[0], state[1], state[2]);
        let x = &state[PLANT_DIM..];
        row.state.copy_from_slice(x);
        row.reference.copy_from_slice(&[w, z1, z2]);
        *row.input = z1 + self.sys.noise.map_or(0.0, |n| n.sample(t));
        let r = self.sys.reference;
        row.extras.copy_from_slice(&[
            self.sys.control(t, x),
            z1,
            z2,
            r.value(t),
            r.eval_unchecked(t, Channel::Derivative),
        ]);
    }
}

/// Plant, observer and controller co-simulated; `u` held per step.
///
/// Observer errors are reported as `e1..e3` (estimate minus plant truth).
/// Tracking errors `z1 - z_d`, `z2 - z_d'` and the control magnitude are
/// reported as `z1_track`, `z2_track` and `u`, and the trapezoid integral of
/// `y` as `trapezoid` against `int z1`.
pub fn run_pid_closed_loop(spec: &ScenarioSpec) -> Result<ScenarioRun, ScenarioError> {
    spec.checked()?;
    let cfg = spec.config()?;
    let gains = spec.pid.expect("checked");
    let z0 = spec.plant_initial.expect("checked");
    let mut sys = ClosedLoop {
        cfg: &cfg,
        reference: &spec.signal,
        noise: spec.noise.as_ref(),
        gains,
        held_noise: 0.0,
        held_u: 0.0,
    };
    let mut x0 = vec![z0.z1, z0.z2, 0.0];
    x0.extend_from_slice(cfg.initial_state());
    // The sampler recomputes u from the state, never reading held values.
    let probe = sys.clone();
    let trace = ode::simulate(spec.scheme, &mut sys, 0.0, spec.horizon, &x0, &ClosedLoopSampler { sys: &probe })?;
    let metrics = analysis::compute_metrics(&trace, spec.settle_time)?;
    let mut run = ScenarioRun { trace, metrics, warnings: step_warning(&cfg, spec.scheme).into_iter().collect() };

    let col = |name: &str| run.trace.extra_column(name).expect("closed-loop column");
    let (z1, z2, zd, zd_dot, u) = (col("z1"), col("z2"), col("z_d"), col("z_d_dot"), col("u"));
    let track1: Vec<f64> = z1.iter().zip(&zd).map(|(a, b)| a - b).collect();
    let track2: Vec<f64> = z2.iter().zip(&zd_dot).map(|(a, b)| a - b).collect();
    let times = &run.trace.times;
    let mut extra = vec![
        analysis::channel_metrics("z1_track", times, &track1, spec.settle_time)?,
        analysis::channel_metrics("z2_track", times, &track2, spec.settle_time)?,
        analysis::channel_metrics("u", times, &u, spec.settle_time)?,
    ];
    run.metrics.channels.append(&mut extra);

    let truth = run.trace.ref_column(0);
    let trap = analysis::cumulative_trapezoid(&run.trace.times, &run.trace.inputs)?;
    add_baseline(&mut run, TRAPEZOID_COLUMN, "trapezoid", trap, &truth, spec.settle_time)?;
    Ok(run)
}

/// One sweep member: the observer at `epsilon`, step refined when needed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepMember {
    pub epsilon: f64,
    /// Integration step actually used.
    pub dt: f64,
    /// The stored trace keeps every `stride`-th step, i.e. the base grid.
    pub stride: usize,
    pub outcome: Result<ScenarioRun, ScenarioError>,
}

/// Spec and stride for one sweep member.
///
/// The step is the base `dt` divided by the smallest integer that brings it
/// under the observer's suggested limit, so every member shares the base
/// output grid.
pub fn sweep_member_spec(spec: &ScenarioSpec, epsilon: f64) -> (ScenarioSpec, usize) {
    let mut member = spec.clone();
    member.tag = ScenarioTag::SignalTracking;
    member.observer.epsilon = epsilon;
    let n = spec.observer.n as f64;
    let limit = math::powf(epsilon, n + 1.0) / 10.0;
    let stride = if spec.scheme.dt > limit { (spec.scheme.dt / limit) as usize + 1 } else { 1 };
    member.scheme.dt = spec.scheme.dt / stride as f64;
    (member, stride)
}

pub fn run_sweep_member(spec: &ScenarioSpec, epsilon: f64) -> SweepMember {
    let (member, stride) = sweep_member_spec(spec, epsilon);
    let outcome = run_signal_tracking(&member).map(|mut run| {
        if stride > 1 {
            run.trace = run.trace.decimate(stride);
        }
        run
    });
    SweepMember { epsilon, dt: member.scheme.dt, stride, outcome }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub members: Vec<SweepMember>,
}

impl SweepReport {
    /// Settled sup error of `channel` per member; `None` for failed members.
    pub fn sup_errors(&self, channel: &str) -> Vec<Option<f64>> {
        self.members
            .iter()
            .map(|m| m.outcome.as_ref().ok().and_then(|r| r.metrics.channel(channel)).map(|c| c.sup_error))
            .collect()
    }

    /// Whether the sup error of `channel` strictly decreases along the sweep.
    /// False if any member failed.
    pub fn monotone_decrease(&self, channel: &str) -> bool {
        let errs = self.sup_errors(channel);
        errs.iter().all(Option::is_some) && errs.windows(2).all(|w| w[1].unwrap() < w[0].unwrap())
    }

    /// First-member sup error over last-member sup error.
    pub fn reduction(&self, channel: &str) -> Option<f64> {
        let errs = self.sup_errors(channel);
        Some((*errs.first()?)? / (*errs.last()?)?)
    }

    pub fn channel_names(&self) -> Vec<String> {
        self.members
            .iter()
            .find_map(|m| m.outcome.as_ref().ok())
            .map(|r| r.metrics.channels.iter().map(|c| c.name.clone()).collect())
            .unwrap_or_default()
    }

    pub fn report_lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, m) in self.members.iter().enumerate() {
            out.push(format!("sweep.{i}.epsilon = {:.17e}", m.epsilon));
            out.push(format!("sweep.{i}.dt = {:.17e}", m.dt));
            match &m.outcome {
                Ok(run) => {
                    for c in &run.metrics.channels {
                        out.push(format!("sweep.{i}.{}.sup_error = {:.17e}", c.name, c.sup_error));
                    }
                }
                Err(e) => out.push(format!("sweep.{i}.error = {}", one_line(&format!("{e}")))),
            }
        }
        for name in self.channel_names() {
            out.push(format!("sweep.{name}.monotone_decrease = {}", self.monotone_decrease(&name)));
            if let Some(r) = self.reduction(&name) {
                out.push(format!("sweep.{name}.reduction = {r:.17e}"));
            }
        }
        out
    }
}

fn one_line(s: &str) -> String {
    s.split('\n').map(str::trim).collect::<Vec<_>>().join("; ")
}

/// Runs every member in order. A member that fails validation or diverges
/// is recorded and the sweep continues.
pub fn run_epsilon_sweep(spec: &ScenarioSpec) -> Result<SweepReport, ScenarioError> {
    spec.checked()?;
    Ok(SweepReport { members: spec.sweep.iter().map(|&e| run_sweep_member(spec, e)).collect() })
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioOutcome {
    Tracking(ScenarioRun),
    ClosedLoop(ScenarioRun),
    Drift(DriftReport),
    Sweep(SweepReport),
}

impl ScenarioOutcome {
    /// Key-value report lines.
    pub fn report_lines(&self) -> Vec<String> {
        match self {
            Self::Tracking(r) | Self::ClosedLoop(r) => r.metrics.report_lines(),
            Self::Drift(d) => {
                let mut l = d.run.metrics.report_lines();
                l.extend(d.report_lines());
                l
            }
            Self::Sweep(s) => s.report_lines(),
        }
    }
}

/// Dispatches on the spec's tag.
pub fn run(spec: &ScenarioSpec) -> Result<ScenarioOutcome, ScenarioError> {
    Ok(match spec.tag {
        ScenarioTag::SignalTracking => ScenarioOutcome::Tracking(run_signal_tracking(spec)?),
        ScenarioTag::PidClosedLoop => ScenarioOutcome::ClosedLoop(run_pid_closed_loop(spec)?),
        ScenarioTag::DriftStudy => ScenarioOutcome::Drift(run_drift_study(spec)?),
        ScenarioTag::EpsilonSweep => ScenarioOutcome::Sweep(run_epsilon_sweep(spec)?),
    })
}

/// Reference setups of the two published experiments and derived studies.
pub mod presets {
    use super::*;

    pub const DEFAULT_SEED: u64 = 20_240_501;

    /// `n = 3, p = 2`, `eps = 1/2`, `k = (0.1, 2, 1)`, `alpha_3 = 0.8`,
    /// tracking `cos t` from `x(0) = (0, 1, 0)` for 100 s.
    pub fn signal_tracking() -> ScenarioSpec {
        ScenarioSpec {
            tag: ScenarioTag::SignalTracking,
            observer: ObserverSpec {
                n: 3,
                p: 2,
                gains: vec![0.1, 2.0, 1.0],
                epsilon: 0.5,
                alpha_n: 0.8,
                initial_state: vec![0.0, 1.0, 0.0],
                variant: None,
            },
            signal: SignalSpec::cos(),
            noise: None,
            scheme: StepScheme::rk4(1e-3),
            horizon: 100.0,
            settle_time: 20.0,
            pid: None,
            plant_initial: None,
            sweep: Vec::new(),
        }
    }

    /// Signal tracking under pulsed Gaussian noise for `horizon` seconds.
    pub fn drift_study(horizon: f64, seed: u64) -> ScenarioSpec {
        ScenarioSpec {
            tag: ScenarioTag::DriftStudy,
            noise: Some(NoiseSpec::pulsed_gaussian(seed)),
            horizon,
            ..signal_tracking()
        }
    }

    /// `eps = 1/3`, `alpha_3 = 0.9`, `K = (-2, -1, -1)`, `z(0) = (0.5, -0.5)`,
    /// `x(0) = (0, 0.5, -0.5)`, `z_d = cos t`, noisy, 60 s.
    pub fn pid_closed_loop(seed: u64) -> ScenarioSpec {
        let base = signal_tracking();
        ScenarioSpec {
            tag: ScenarioTag::PidClosedLoop,
            observer: ObserverSpec {
                epsilon: 1.0 / 3.0,
                alpha_n: 0.9,
                initial_state: vec![0.0, 0.5, -0.5],
                ..base.observer.clone()
            },
            noise: Some(NoiseSpec::pulsed_gaussian(seed)),
            horizon: 60.0,
            settle_time: 30.0,
            pid: Some(PidGains { kp: -2.0, ki: -1.0, kd: -1.0 }),
            plant_initial: Some(PlantState { z1: 0.5, z2: -0.5 }),
            ..base
        }
    }

    pub fn epsilon_sweep(eps: &[f64]) -> ScenarioSpec {
        ScenarioSpec { tag: ScenarioTag::EpsilonSweep, sweep: eps.to_vec(), ..signal_tracking() }
    }
}
