//! Classical quadrature baselines and windowed error metrics.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::ode::StateTrace;

#[derive(Debug, Clone, PartialEq)]
pub enum AnalysisError {
    LengthMismatch {
        times: usize,
        values: usize,
    },
    /// `times[index] <= times[index - 1]`.
    Unsorted {
        index: usize,
    },
    /// Simpson needs a uniform grid.
    NonUniform {
        index: usize,
    },
    EmptyWindow {
        settle_time: f64,
        end: f64,
    },
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::LengthMismatch { times, values } => {
                write!(f, "{times} sample times but {values} values")
            }
            Self::Unsorted { index } => write!(f, "sample times not strictly increasing at index {index}"),
            Self::NonUniform { index } => write!(f, "sample spacing not uniform at index {index}"),
            Self::EmptyWindow { settle_time, end } => {
                write!(f, "no samples at or after settle time {settle_time} (trace ends at {end})")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for AnalysisError {}

fn check_sorted(times: &[f64], values: &[f64]) -> Result<(), AnalysisError> {
    if times.len() != values.len() {
        return Err(AnalysisError::LengthMismatch { times: times.len(), values: values.len() });
    }
    match times.windows(2).position(|w| !(w[1] > w[0])) {
        Some(i) => Err(AnalysisError::Unsorted { index: i + 1 }),
        None => Ok(()),
    }
}

/// Running trapezoid integral; the first entry is 0.
pub fn cumulative_trapezoid(times: &[f64], values: &[f64]) -> Result<Vec<f64>, AnalysisError> {
    check_sorted(times, values)?;
    let mut out = Vec::with_capacity(times.len());
    if times.is_empty() {
        return Ok(out);
    }
    let mut acc = 0.0;
    out.push(acc);
    for k in 1..times.len() {
        acc += 0.5 * (times[k] - times[k - 1]) * (values[k] + values[k - 1]);
        out.push(acc);
    }
    Ok(out)
}

/// Running composite Simpson integral on a uniform grid.
///
/// Even-indexed nodes carry the pure Simpson sum; an odd node adds a
/// trapezoid panel on its trailing interval.
pub fn cumulative_simpson(times: &[f64], values: &[f64]) -> Result<Vec<f64>, AnalysisError> {
    check_sorted(times, values)?;
    let mut out = Vec::with_capacity(times.len());
    if times.is_empty() {
        return Ok(out);
    }
    if times.len() > 2 {
        let h0 = times[1] - times[0];
        for k in 2..times.len() {
            if ((times[k] - times[k - 1]) - h0).abs() > 1e-6 * h0 {
                return Err(AnalysisError::NonUniform { index: k });
            }
        }
    }
    let mut even = 0.0;
    out.push(0.0);
    for k in 1..times.len() {
        if k % 2 == 0 {
            let h = 0.5 * (times[k] - times[k - 2]);
            even += h / 3.0 * (values[k - 2] + 4.0 * values[k - 1] + values[k]);
            out.push(even);
        } else {
            out.push(even + 0.5 * (times[k] - times[k - 1]) * (values[k] + values[k - 1]));
        }
    }
    Ok(out)
}

/// Least-squares line `e ~ intercept + slope * t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS of the residuals.
    pub residual_rms: f64,
}

pub fn fit_line(times: &[f64], values: &[f64]) -> LineFit {
    let n = times.len() as f64;
    let t_mean = times.iter().sum::<f64>() / n;
    let v_mean = values.iter().sum::<f64>() / n;
    let (mut stt, mut stv) = (0.0, 0.0);
    for (t, v) in times.iter().zip(values) {
        let dt = t - t_mean;
        stt += dt * dt;
        stv += dt * (v - v_mean);
    }
    let slope = if stt > 0.0 { stv / stt } else { 0.0 };
    let intercept = v_mean - slope * t_mean;
    let ss: f64 = times
        .iter()
        .zip(values)
        .map(|(t, v)| {
            let r = v - (intercept + slope * t);
            r * r
        })
        .sum();
    LineFit { slope, intercept, residual_rms: math::sqrt(ss / n) }
}

/// Error statistics of one channel over the analysis window.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMetrics {
    pub name: String,
    pub sup_error: f64,
    pub rmse: f64,
    /// Channel units per second.
    pub drift_slope: f64,
    pub fit_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    /// Start of the analysis window, seconds.
    pub settle_time: f64,
    pub samples: usize,
    pub channels: Vec<ChannelMetrics>,
    pub diverged: bool,
}

impl RunMetrics {
    pub fn channel(&self, name: &str) -> Option<&ChannelMetrics> {
        self.channels.iter().find(|c| c.name == name)
    }

    /// Flat `key = value` lines, one metric per line.
    pub fn report_lines(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(2 + 4 * self.channels.len());
        out.push(format!("settle_time = {:.17e}", self.settle_time));
        out.push(format!("window_samples = {}", self.samples));
        out.push(format!("diverged = {}", self.diverged));
        for c in &self.channels {
            out.push(format!("{}.sup_error = {:.17e}", c.name, c.sup_error));
            out.push(format!("{}.rmse = {:.17e}", c.name, c.rmse));
            out.push(format!("{}.drift_slope = {:.17e}", c.name, c.drift_slope));
            out.push(format!("{}.fit_residual = {:.17e}", c.name, c.fit_residual));
        }
        out
    }
}

/// Index of the first sample at or after `settle_time`.
pub fn window_start(times: &[f64], settle_time: f64) -> Result<usize, AnalysisError> {
    let end = times.last().copied().unwrap_or(f64::NAN);
    match times.iter().position(|t| *t >= settle_time) {
        Some(i) if settle_time < end => Ok(i),
        _ => Err(AnalysisError::EmptyWindow { settle_time, end }),
    }
}

/// Metrics of an error series over `t >= settle_time`.
pub fn channel_metrics(
    name: &str,
    times: &[f64],
    errors: &[f64],
    settle_time: f64,
) -> Result<ChannelMetrics, AnalysisError> {
    if times.len() != errors.len() {
        return Err(AnalysisError::LengthMismatch { times: times.len(), values: errors.len() });
    }
    let start = window_start(times, settle_time)?;
    let (t, e) = (&times[start..], &errors[start..]);
    let sup_error = e.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rmse = math::sqrt(e.iter().map(|v| v * v).sum::<f64>() / e.len() as f64);
    let fit = fit_line(t, e);
    Ok(ChannelMetrics {
        name: String::from(name),
        sup_error,
        rmse,
        drift_slope: fit.slope,
        fit_residual: fit.residual_rms,
    })
}

/// Windowed metrics of every state error channel `e_i = x_i - ref_i`,
/// named `e1..en`.
pub fn compute_metrics(trace: &StateTrace, settle_time: f64) -> Result<RunMetrics, AnalysisError> {
    let start = window_start(&trace.times, settle_time)?;
    let mut channels = Vec::with_capacity(trace.width);
    for i in 0..trace.width {
        let name = format!("e{}", i + 1);
        channels.push(channel_metrics(&name, &trace.times, &trace.error_column(i), settle_time)?);
    }
    Ok(RunMetrics {
        settle_time,
        samples: trace.len() - start,
        channels,
        diverged: trace.states.iter().any(|v| !v.is_finite()),
    })
}
