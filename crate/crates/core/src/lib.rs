//! Nonlinear continuous integral-derivative observer.
//!
//! A single noisy measurement `a(t)` drives an `n`-th order chain of
//! integrators whose states converge synchronously to the multiple integrals,
//! the value, and the derivatives of the signal. The measurement enters at
//! slot `p`; states below `p` estimate integrals, states above estimate
//! derivatives.
//!
//! The crate is `no_std` (with `alloc`) and contains only computation:
//!
//! - [`stability`]: the power-sign nonlinearity, exponent chains, Routh tables
//!   and the feasible `(n, p)` set.
//! - [`observer`]: configuration, validation and the observer right-hand side.
//! - [`ode`]: deterministic fixed-step Euler/RK4 integration with trace recording.
//! - [`signals`]: analytic reference signals and the seeded non-white disturbance.
//! - [`analysis`]: trapezoid/Simpson baselines and windowed run metrics.
//! - [`scenario`]: signal tracking, PID closed loop, drift study and epsilon sweep.
//!
//! File formats, plotting and the command line live in the `idobs` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![warn(missing_debug_implementations)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analysis;
mod math;
pub mod observer;
pub mod ode;
pub mod scenario;
pub mod signals;
pub mod stability;

pub use analysis::{ChannelMetrics, RunMetrics};
pub use observer::{Diagnostic, ObserverConfig, ObserverSpec, VariantTag};
pub use ode::{Dynamics, StateTrace, StepScheme};
pub use signals::{Channel, NoiseSpec, SignalSpec};
pub use stability::{ExponentChain, RouthTable, Verdict};
