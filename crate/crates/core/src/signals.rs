//! Analytic reference signals and the seeded non-white disturbance.

use alloc::vec::Vec;
use core::fmt;

use crate::math;

/// Which derivative/integral of a signal to evaluate. Integrals use a zero
/// lower limit at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    DoubleIntegral,
    Integral,
    Value,
    Derivative,
    SecondDerivative,
}

impl Channel {
    pub fn label(self) -> &'static str {
        match self {
            Channel::DoubleIntegral => "double_integral",
            Channel::Integral => "integral",
            Channel::Value => "value",
            Channel::Derivative => "derivative",
            Channel::SecondDerivative => "second_derivative",
        }
    }

    /// Order relative to the value: integrals negative, derivatives positive.
    fn order(self) -> i32 {
        match self {
            Channel::DoubleIntegral => -2,
            Channel::Integral => -1,
            Channel::Value => 0,
            Channel::Derivative => 1,
            Channel::SecondDerivative => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SignalError {
    NegativeTime(f64),
    /// The channel has no closed form for this signal.
    ChannelUnavailable {
        channel: Channel,
        reason: &'static str,
    },
}

impl fmt::Display for SignalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NegativeTime(t) => write!(f, "signal evaluated at negative time {t}"),
            Self::ChannelUnavailable { channel, reason } => {
                write!(f, "channel {} unavailable: {reason}", channel.label())
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SignalError {}

/// A reference signal with closed-form integrals and derivatives.
#[derive(Debug, Clone, PartialEq)]
pub enum SignalSpec {
    /// `amplitude * cos(omega t)`
    Cosine {
        omega: f64,
        amplitude: f64,
    },
    Constant(f64),
    /// Ascending coefficients: `c0 + c1 t + c2 t^2 + ...`
    Polynomial(Vec<f64>),
    Sum(Vec<SignalSpec>),
}

impl SignalSpec {
    pub fn cos() -> Self {
        SignalSpec::Cosine { omega: 1.0, amplitude: 1.0 }
    }

    pub fn zero() -> Self {
        SignalSpec::Constant(0.0)
    }

    /// Checks that `channel` has a closed form for every component.
    pub fn supports(&self, channel: Channel) -> Result<(), SignalError> {
        match self {
            SignalSpec::Cosine { omega, .. } if *omega == 0.0 && channel.order() < 0 => {
                Err(SignalError::ChannelUnavailable {
                    channel,
                    reason: "cosine with omega = 0 has no bounded integral form; use Constant",
                })
            }
            SignalSpec::Sum(parts) => parts.iter().try_for_each(|s| s.supports(channel)),
            _ => Ok(()),
        }
    }

    /// Exact evaluation of `channel` at `t >= 0`.
    pub fn eval(&self, t: f64, channel: Channel) -> Result<f64, SignalError> {
        if t < 0.0 {
            return Err(SignalError::NegativeTime(t));
        }
        self.supports(channel)?;
        Ok(self.eval_unchecked(t, channel))
    }

    /// Value at `t`, always available.
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        self.eval_unchecked(t, Channel::Value)
    }

    pub(crate) fn eval_unchecked(&self, t: f64, channel: Channel) -> f64 {
        match self {
            SignalSpec::Cosine { omega, amplitude } => {
                let w = *omega;
                let (s, c) = (math::sin(w * t), math::cos(w * t));
                amplitude
                    * match channel {
                        Channel::DoubleIntegral => (1.0 - c) / (w * w),
                        Channel::Integral => s / w,
                        Channel::Value => c,
                        Channel::Derivative => -w * s,
                        Channel::SecondDerivative => -w * w * c,
                    }
            }
            SignalSpec::Constant(c) => match channel {
                Channel::DoubleIntegral => 0.5 * c * t * t,
                Channel::Integral => c * t,
                Channel::Value => *c,
                Channel::Derivative | Channel::SecondDerivative => 0.0,
            },
            SignalSpec::Polynomial(coeffs) => eval_poly_channel(coeffs, t, channel.order()),
            SignalSpec::Sum(parts) => parts.iter().map(|s| s.eval_unchecked(t, channel)).sum(),
        }
    }
}

/// Evaluates the `order`-th derivative (negative: repeated zero-based
/// integral) of an ascending-coefficient polynomial.
fn eval_poly_channel(coeffs: &[f64], t: f64, order: i32) -> f64 {
    let mut acc = 0.0;
    // Sum of differentiated or integrated monomials.
    for (j, &c) in coeffs.iter().enumerate().rev() {
        let (factor, power) = if order >= 0 {
            let o = order as usize;
            if j < o {
                continue;
            }
            let f: f64 = (j - o + 1..=j).map(|m| m as f64).product();
            (f, j - o)
        } else {
            let o = (-order) as usize;
            let f: f64 = (j + 1..=j + o).map(|m| m as f64).product();
            (1.0 / f, j + o)
        };
        acc += c * factor * powi(t, power);
    }
    acc
}

fn powi(t: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |a, _| a * t)
}

/// Identifies the pseudo-random construction used by [`NoiseSpec`]; recorded
/// in trace metadata.
pub const NOISE_GENERATOR: &str = "splitmix64(seed, sample_index) counter hash + Box-Muller (cos branch)";

/// Seeded disturbance: zero-order-held Gaussian samples plus a periodic pulse train.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub gaussian_variance: f64,
    pub gaussian_mean: f64,
    pub pulse_amplitude: f64,
    /// Seconds.
    pub pulse_period: f64,
    /// Fraction of the period during which the pulse is high.
    pub pulse_width_fraction: f64,
    /// Seconds.
    pub pulse_phase: f64,
    /// Gaussian sample rate in Hz.
    pub sample_rate: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NoiseError {
    NegativeVariance(f64),
    NonPositivePeriod(f64),
    WidthOutOfRange(f64),
    NonPositiveRate(f64),
    NonFinite(&'static str),
}

impl fmt::Display for NoiseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NegativeVariance(v) => write!(f, "gaussian_variance {v} must be >= 0"),
            Self::NonPositivePeriod(p) => write!(f, "pulse_period {p} must be > 0"),
            Self::WidthOutOfRange(w) => write!(f, "pulse_width_fraction {w} outside (0, 1]"),
            Self::NonPositiveRate(r) => write!(f, "sample_rate {r} must be > 0"),
            Self::NonFinite(field) => write!(f, "{field} is not finite"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for NoiseError {}

impl NoiseSpec {
    /// Gaussian (mean 0, variance 0.01) plus 0.5-amplitude pulses of 1% width
    /// every second, sampled at 1 kHz.
    pub fn pulsed_gaussian(seed: u64) -> Self {
        NoiseSpec {
            gaussian_variance: 0.01,
            gaussian_mean: 0.0,
            pulse_amplitude: 0.5,
            pulse_period: 1.0,
            pulse_width_fraction: 0.01,
            pulse_phase: 0.0,
            sample_rate: 1000.0,
            seed,
        }
    }

    pub fn silent() -> Self {
        NoiseSpec { gaussian_variance: 0.0, pulse_amplitude: 0.0, ..Self::pulsed_gaussian(0) }
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        for (name, v) in [
            ("gaussian_variance", self.gaussian_variance),
            ("gaussian_mean", self.gaussian_mean),
            ("pulse_amplitude", self.pulse_amplitude),
            ("pulse_phase", self.pulse_phase),
        ] {
            if !v.is_finite() {
                return Err(NoiseError::NonFinite(name));
            }
        }
        if self.gaussian_variance < 0.0 {
            return Err(NoiseError::NegativeVariance(self.gaussian_variance));
        }
        if !(self.pulse_period > 0.0 && self.pulse_period.is_finite()) {
            return Err(NoiseError::NonPositivePeriod(self.pulse_period));
        }
        if !(self.pulse_width_fraction > 0.0 && self.pulse_width_fraction <= 1.0) {
            return Err(NoiseError::WidthOutOfRange(self.pulse_width_fraction));
        }
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(NoiseError::NonPositiveRate(self.sample_rate));
        }
        Ok(())
    }

    /// Long-run mean `gaussian_mean + pulse_amplitude * pulse_width_fraction`.
    pub fn mean(&self) -> f64 {
        self.gaussian_mean + self.pulse_amplitude * self.pulse_width_fraction
    }

    /// Disturbance at time `t`: the held Gaussian sample plus the pulse level.
    pub fn sample(&self, t: f64) -> f64 {
        self.gaussian(self.sample_index(t)) + self.pulse(t)
    }

    /// Index of the Gaussian sample held at `t`.
    pub fn sample_index(&self, t: f64) -> u64 {
        let x = snap_floor(t * self.sample_rate);
        if x <= 0.0 {
            0
        } else {
            x as u64
        }
    }

    /// Gaussian sample number `index`; a pure function of `(seed, index)`.
    pub fn gaussian(&self, index: u64) -> f64 {
        if self.gaussian_variance == 0.0 {
            return self.gaussian_mean;
        }
        self.gaussian_mean + math::sqrt(self.gaussian_variance) * standard_normal(self.seed, index)
    }

    /// Pulse level: `pulse_amplitude` during the first `width_fraction` of
    /// each period (after `pulse_phase`), else 0.
    pub fn pulse(&self, t: f64) -> f64 {
        if self.pulse_amplitude == 0.0 {
            return 0.0;
        }
        let q = (t - self.pulse_phase) / self.pulse_period;
        let frac = q - snap_floor(q);
        if frac < self.pulse_width_fraction - SNAP_TOL {
            self.pulse_amplitude
        } else {
            0.0
        }
    }
}

const SNAP_TOL: f64 = 1e-9;

/// `floor(x)`, treating values within rounding distance below an integer as
/// that integer, so grid times like `k * 1e-3` land in sample `k`.
fn snap_floor(x: f64) -> f64 {
    let r = math::round(x);
    let tol = SNAP_TOL * if x.abs() > 1.0 { x.abs() } else { 1.0 };
    if (x - r).abs() <= tol {
        r
    } else {
        math::floor(x)
    }
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn counter_hash(seed: u64, counter: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ counter.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Uniform in `(0, 1]` with 53 random bits.
#[inline]
fn unit_open_closed(bits: u64) -> f64 {
    ((bits >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn standard_normal(seed: u64, index: u64) -> f64 {
    let u1 = unit_open_closed(counter_hash(seed, index.wrapping_mul(2)));
    let u2 = unit_open_closed(counter_hash(seed, index.wrapping_mul(2).wrapping_add(1)));
    math::sqrt(-2.0 * math::ln(u1)) * math::cos(2.0 * core::f64::consts::PI * u2)
}

/// Convenience for building sums in code.
impl core::ops::Add for SignalSpec {
    type Output = SignalSpec;

    fn add(self, rhs: SignalSpec) -> SignalSpec {
        let mut parts = match self {
            SignalSpec::Sum(p) => p,
            other => alloc::vec![other],
        };
        match rhs {
            SignalSpec::Sum(p) => parts.extend(p),
            other => parts.push(other),
        }
        SignalSpec::Sum(parts)
    }
}
