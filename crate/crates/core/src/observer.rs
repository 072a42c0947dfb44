//! Observer configuration, validation and the right-hand side of the
//! integral-derivative observer
//!
//! ```text
//! x_i'             = x_{i+1},                               i < n
//! eps^(n+1) x_n'   = - sum_{i != p} k_i [eps^i x_i]^alpha_i - k_p [x_p - a(t)]^alpha_p
//! ```
//!
//! where `[y]^alpha = |y|^alpha sign(y)`.
//!
//! The alternative form that scales the measurement error by `eps^p` is not
//! provided: its error feedback is too weak to converge in reasonable time.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::signals::Channel;
use crate::stability::{self, ExponentChain, Verdict};

/// The four observer structures admitted by the feasibility set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VariantTag {
    /// `n = 2, p = 2`: 1-fold integral and value.
    FoldIntegral,
    /// `n = 3, p = 2`: integral, value, first derivative.
    DerivIntegral,
    /// `n = 3, p = 3`: double integral, integral, value.
    DoubleIntegral,
    /// `n = 4, p = 3`: double integral, integral, value, first derivative.
    DerivDoubleIntegral,
}

impl VariantTag {
    pub const ALL: [VariantTag; 4] =
        [Self::FoldIntegral, Self::DerivIntegral, Self::DoubleIntegral, Self::DerivDoubleIntegral];

    /// `(n, p)` fixed by the variant.
    pub fn shape(self) -> (usize, usize) {
        match self {
            Self::FoldIntegral => (2, 2),
            Self::DerivIntegral => (3, 2),
            Self::DoubleIntegral => (3, 3),
            Self::DerivDoubleIntegral => (4, 3),
        }
    }

    pub fn from_shape(n: usize, p: usize) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.shape() == (n, p))
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::FoldIntegral => "FoldIntegral",
            Self::DerivIntegral => "DerivIntegral",
            Self::DoubleIntegral => "DoubleIntegral",
            Self::DerivDoubleIntegral => "DerivDoubleIntegral",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == s)
    }

    /// Signal channel each state tracks, index 0 for `x_1`.
    pub fn channels(self) -> Vec<Channel> {
        let (n, p) = self.shape();
        channel_roles(n, p)
    }
}

impl fmt::Display for VariantTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Channel roles for a given `(n, p)`: integrals below `p`, the value at
/// `p`, derivatives above. Only orders reachable in the feasible set are
/// representable; anything deeper saturates at the outermost channel.
pub fn channel_roles(n: usize, p: usize) -> Vec<Channel> {
    (1..=n)
        .map(|i| {
            if i + 2 <= p {
                Channel::DoubleIntegral
            } else if i + 1 == p {
                Channel::Integral
            } else if i == p {
                Channel::Value
            } else {
                Channel::Derivative
            }
        })
        .collect()
}

/// A violated configuration condition.
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    OrderTooSmall {
        n: usize,
    },
    SlotOutOfRange {
        n: usize,
        p: usize,
    },
    /// `(n, p)` outside the feasible set.
    Infeasible {
        n: usize,
        p: usize,
    },
    VariantMismatch {
        variant: VariantTag,
        n: usize,
        p: usize,
    },
    GainCount {
        expected: usize,
        got: usize,
    },
    NonPositiveGain {
        index: usize,
        value: f64,
    },
    EpsilonOutOfRange(f64),
    AlphaOutOfRange(f64),
    InitialStateLength {
        expected: usize,
        got: usize,
    },
    NonFiniteInitialState {
        index: usize,
    },
    /// A gain inequality `lhs > rhs` that does not hold.
    GainInequality {
        condition: &'static str,
        lhs: f64,
        rhs: f64,
    },
    NotHurwitz {
        verdict: Verdict,
        poly: Vec<f64>,
    },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::OrderTooSmall { n } => write!(f, "order n={n} must be at least 2"),
            Self::SlotOutOfRange { n, p } => write!(f, "measurement slot p={p} outside 2..={n}"),
            Self::Infeasible { n, p } => write!(
                f,
                "infeasible (n,p)=({n},{p}): the scaled polynomial cannot be Hurwitz for all \
                 eps in (0,1); allowed (2,2), (3,2), (3,3), (4,3)"
            ),
            Self::VariantMismatch { variant, n, p } => {
                let (vn, vp) = variant.shape();
                write!(f, "variant {variant} requires (n,p)=({vn},{vp}), got ({n},{p})")
            }
            Self::GainCount { expected, got } => {
                write!(f, "expected {expected} gains, got {got}")
            }
            Self::NonPositiveGain { index, value } => {
                write!(f, "gain k{index}={value} must be strictly positive")
            }
            Self::EpsilonOutOfRange(e) => write!(f, "epsilon={e} outside (0, 1)"),
            Self::AlphaOutOfRange(a) => write!(f, "alpha_n={a} outside (0, 1]"),
            Self::InitialStateLength { expected, got } => {
                write!(f, "initial_state has {got} entries, expected {expected}")
            }
            Self::NonFiniteInitialState { index } => {
                write!(f, "initial_state[{index}] is not finite")
            }
            Self::GainInequality { condition, lhs, rhs } => {
                write!(f, "gain inequality {condition} violated: {lhs} <= {rhs}")
            }
            Self::NotHurwitz { verdict, poly } => {
                write!(f, "characteristic polynomial {poly:?} is {verdict}, not Hurwitz")
            }
        }
    }
}

/// Unvalidated observer parameters. `gains[i]` is `k_{i+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverSpec {
    pub n: usize,
    pub p: usize,
    pub gains: Vec<f64>,
    pub epsilon: f64,
    pub alpha_n: f64,
    pub initial_state: Vec<f64>,
    pub variant: Option<VariantTag>,
}

impl ObserverSpec {
    pub fn validate(&self) -> Result<ObserverConfig, Vec<Diagnostic>> {
        validate(self)
    }
}

/// A validated observer. Immutable; cheap to share between simulations.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverConfig {
    spec: ObserverSpec,
    variant: VariantTag,
    chain: ExponentChain,
    /// `eps^i` for `i = 1..=n` (index 0 is `eps^1`).
    eps_pow: Vec<f64>,
    /// `eps^-(n+1)`
    inv_lead: f64,
    char_poly: Vec<f64>,
}

/// Validates every condition and reports all violations at once.
pub fn validate(spec: &ObserverSpec) -> Result<ObserverConfig, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let (n, p) = (spec.n, spec.p);

    let shape_ok = if n < 2 {
        diags.push(Diagnostic::OrderTooSmall { n });
        false
    } else if p < 2 || p > n {
        diags.push(Diagnostic::SlotOutOfRange { n, p });
        false
    } else {
        true
    };
    let feasible = shape_ok && stability::feasible_shape(n, p).unwrap_or(false);
    if shape_ok && !feasible {
        diags.push(Diagnostic::Infeasible { n, p });
    }
    if let Some(variant) = spec.variant {
        if variant.shape() != (n, p) {
            diags.push(Diagnostic::VariantMismatch { variant, n, p });
        }
    }

    let gains_ok = if spec.gains.len() != n {
        diags.push(Diagnostic::GainCount { expected: n, got: spec.gains.len() });
        false
    } else {
        let mut ok = true;
        for (i, &k) in spec.gains.iter().enumerate() {
            if !(k > 0.0 && k.is_finite()) {
                diags.push(Diagnostic::NonPositiveGain { index: i + 1, value: k });
                ok = false;
            }
        }
        ok
    };

    let eps_ok = spec.epsilon > 0.0 && spec.epsilon < 1.0;
    if !eps_ok {
        diags.push(Diagnostic::EpsilonOutOfRange(spec.epsilon));
    }
    let alpha_ok = spec.alpha_n > 0.0 && spec.alpha_n <= 1.0;
    if !alpha_ok {
        diags.push(Diagnostic::AlphaOutOfRange(spec.alpha_n));
    }

    if spec.initial_state.len() != n {
        diags.push(Diagnostic::InitialStateLength { expected: n, got: spec.initial_state.len() });
    }
    for (i, v) in spec.initial_state.iter().enumerate() {
        if !v.is_finite() {
            diags.push(Diagnostic::NonFiniteInitialState { index: i });
        }
    }

    let mut built = None;
    if shape_ok && gains_ok && eps_ok && alpha_ok {
        // chain construction only fails on invalid (n, alpha_n), excluded above
        let chain = ExponentChain::new(n, spec.alpha_n).expect("validated exponent chain inputs");
        if feasible {
            diags.extend(gain_inequality_violations(n, p, &spec.gains, spec.epsilon, &chain));
        }
        let poly = stability::scaled_char_poly(p, &spec.gains, spec.epsilon, &chain);
        match stability::routh_hurwitz(&poly) {
            Ok(t) if t.verdict == Verdict::Hurwitz => {}
            Ok(t) => diags.push(Diagnostic::NotHurwitz { verdict: t.verdict, poly: poly.clone() }),
            Err(_) => diags.push(Diagnostic::NotHurwitz { verdict: Verdict::Singular, poly: poly.clone() }),
        }
        built = Some((chain, poly));
    }

    if !diags.is_empty() {
        return Err(diags);
    }
    let (chain, char_poly) = built.expect("all checks passed");
    let eps = spec.epsilon;
    let eps_pow = (1..=n).map(|i| math::powf(eps, i as f64)).collect();
    let variant = VariantTag::from_shape(n, p).expect("feasible shapes have a variant");
    Ok(ObserverConfig {
        spec: spec.clone(),
        variant,
        chain,
        eps_pow,
        inv_lead: math::powf(eps, -((n + 1) as f64)),
        char_poly,
    })
}

/// Gain inequalities for a feasible `(n, p)` that fail. `gains[i]` is `k_{i+1}`.
pub fn gain_inequality_violations(
    n: usize,
    p: usize,
    gains: &[f64],
    epsilon: f64,
    chain: &ExponentChain,
) -> Vec<Diagnostic> {
    let k = |i: usize| gains[i - 1];
    let mut out = Vec::new();
    let mut check = |condition: &'static str, lhs: f64, rhs: f64| {
        if !(lhs > rhs) {
            out.push(Diagnostic::GainInequality { condition, lhs, rhs });
        }
    };
    match (n, p) {
        (3, 2) => {
            let s = math::powf(epsilon, 2.0 * chain.alpha(2));
            check("k2 > eps^(2 alpha2) k1/k3", k(2), s * k(1) / k(3));
        }
        (3, 3) => {
            let s = math::powf(epsilon, 3.0 * chain.alpha(3));
            check("k2 > eps^(3 alpha3) k1/k3", k(2), s * k(1) / k(3));
        }
        (4, 3) => {
            let s = math::powf(epsilon, 3.0 * chain.alpha(3));
            check("k3 > eps^(3 alpha3) k2/k4", k(3), s * k(2) / k(4));
            check(
                "k2 > eps^(3 alpha3) (k4^2 k1 + k2^2)/(k4 k3)",
                k(2),
                s * (k(4) * k(4) * k(1) + k(2) * k(2)) / (k(4) * k(3)),
            );
        }
        _ => {}
    }
    out
}

/// Builds and validates one of the four named observers.
pub fn make_variant(
    tag: VariantTag,
    gains: Vec<f64>,
    epsilon: f64,
    alpha_n: f64,
    initial_state: Vec<f64>,
) -> Result<ObserverConfig, Vec<Diagnostic>> {
    let (n, p) = tag.shape();
    validate(&ObserverSpec { n, p, gains, epsilon, alpha_n, initial_state, variant: Some(tag) })
}

impl ObserverConfig {
    pub fn spec(&self) -> &ObserverSpec {
        &self.spec
    }

    pub fn order(&self) -> usize {
        self.spec.n
    }

    pub fn slot(&self) -> usize {
        self.spec.p
    }

    pub fn gains(&self) -> &[f64] {
        &self.spec.gains
    }

    pub fn epsilon(&self) -> f64 {
        self.spec.epsilon
    }

    pub fn alpha_n(&self) -> f64 {
        self.spec.alpha_n
    }

    pub fn chain(&self) -> &ExponentChain {
        &self.chain
    }

    pub fn initial_state(&self) -> &[f64] {
        &self.spec.initial_state
    }

    pub fn variant(&self) -> VariantTag {
        self.variant
    }

    /// Signal channel tracked by each state.
    pub fn channels(&self) -> Vec<Channel> {
        self.variant.channels()
    }

    /// Human-readable channel labels, e.g. `["int a", "a", "da/dt"]`.
    pub fn channel_labels(&self) -> Vec<String> {
        self.channels().iter().map(|c| String::from(c.label())).collect()
    }

    /// Scaled characteristic polynomial (descending powers); Hurwitz by
    /// construction.
    pub fn char_poly(&self) -> &[f64] {
        &self.char_poly
    }

    /// Heuristic upper bound `eps^(n+1) / 10` for a stable RK4 step.
    pub fn suggested_max_dt(&self) -> f64 {
        1.0 / (10.0 * self.inv_lead)
    }

    /// Writes the observer vector field at `state` driven by `measurement`.
    #[inline]
    pub fn rhs(&self, state: &[f64], measurement: f64, out: &mut [f64]) {
        let n = self.spec.n;
        let p = self.spec.p;
        out[..n - 1].copy_from_slice(&state[1..n]);
        let mut acc = 0.0;
        for i in 1..=n {
            let k = self.spec.gains[i - 1];
            let alpha = self.chain.alpha(i);
            let arg = if i == p { state[i - 1] - measurement } else { self.eps_pow[i - 1] * state[i - 1] };
            acc -= k * stability::signed_pow(arg, alpha);
        }
        out[n - 1] = self.inv_lead * acc;
    }

    /// Allocating form of [`ObserverConfig::rhs`].
    pub fn observer_rhs(&self, state: &[f64], measurement: f64) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.spec.n];
        self.rhs(state, measurement, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn tracking_observer() -> ObserverSpec {
        ObserverSpec {
            n: 3,
            p: 2,
            gains: vec![0.1, 2.0, 1.0],
            epsilon: 0.5,
            alpha_n: 0.8,
            initial_state: vec![0.0, 1.0, 0.0],
            variant: None,
        }
    }

    #[test]
    fn experiment_one_parameters_validate() {
        let cfg = tracking_observer().validate().unwrap();
        assert_eq!(cfg.variant(), VariantTag::DerivIntegral);
        assert_eq!(cfg.channels(), vec![Channel::Integral, Channel::Value, Channel::Derivative]);
        assert!((cfg.suggested_max_dt() - 0.5f64.powi(4) / 10.0).abs() < 1e-15);
    }

    #[test]
    fn inequality_threshold_for_deriv_integral() {
        let chain = ExponentChain::new(3, 0.8).unwrap();
        assert!((chain.alpha(2) - 2.0 / 3.0).abs() < 1e-15);
        assert!(gain_inequality_violations(3, 2, &[0.1, 2.0, 1.0], 0.5, &chain).is_empty());
        // threshold eps^(4/3) * 0.1 / 1
        let v = gain_inequality_violations(3, 2, &[0.1, 0.03, 1.0], 0.5, &chain);
        match &v[..] {
            [Diagnostic::GainInequality { rhs, .. }] => assert!((rhs - 0.03968502629920499).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn order_five_is_infeasible() {
        let spec = ObserverSpec {
            n: 5,
            p: 3,
            gains: vec![1.0; 5],
            epsilon: 0.5,
            alpha_n: 0.8,
            initial_state: vec![0.0; 5],
            variant: None,
        };
        let diags = spec.validate().unwrap_err();
        assert!(diags.contains(&Diagnostic::Infeasible { n: 5, p: 3 }));
        assert!(diags.iter().any(|d| alloc::format!("{d}").contains("infeasible (n,p)")));
    }

    #[test]
    fn all_violations_reported() {
        let spec = ObserverSpec {
            n: 3,
            p: 2,
            gains: vec![0.1, -2.0, 0.0],
            epsilon: 1.5,
            alpha_n: 0.0,
            initial_state: vec![0.0, f64::NAN],
            variant: Some(VariantTag::DoubleIntegral),
        };
        let diags = spec.validate().unwrap_err();
        assert!(diags.contains(&Diagnostic::NonPositiveGain { index: 2, value: -2.0 }));
        assert!(diags.contains(&Diagnostic::NonPositiveGain { index: 3, value: 0.0 }));
        assert!(diags.contains(&Diagnostic::EpsilonOutOfRange(1.5)));
        assert!(diags.contains(&Diagnostic::AlphaOutOfRange(0.0)));
        assert!(diags.contains(&Diagnostic::InitialStateLength { expected: 3, got: 2 }));
        assert!(diags.contains(&Diagnostic::NonFiniteInitialState { index: 1 }));
        assert!(diags.contains(&Diagnostic::VariantMismatch { variant: VariantTag::DoubleIntegral, n: 3, p: 2 }));
        assert_eq!(diags.len(), 7);
    }

    #[test]
    fn gain_inequality_and_hurwitz_both_reported() {
        let mut spec = tracking_observer();
        spec.gains = vec![5.0, 0.01, 0.1];
        let diags = spec.validate().unwrap_err();
        assert!(diags.iter().any(|d| matches!(d, Diagnostic::GainInequality { .. })));
        assert!(diags.iter().any(|d| matches!(d, Diagnostic::NotHurwitz { verdict: Verdict::NotHurwitz, .. })));
    }

    #[test]
    fn variants() {
        let c = make_variant(VariantTag::DoubleIntegral, vec![0.1, 2.0, 1.0], 0.5, 0.8, vec![0.0; 3]).unwrap();
        assert_eq!(c.channels(), vec![Channel::DoubleIntegral, Channel::Integral, Channel::Value]);
        // threshold 0.5^2.4 * 0.1
        let v = gain_inequality_violations(3, 3, &[0.1, 0.018, 1.0], 0.5, c.chain());
        match &v[..] {
            [Diagnostic::GainInequality { rhs, .. }] => assert!((rhs - 0.01894645708137998).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }

        let c = make_variant(VariantTag::FoldIntegral, vec![1.0, 1.0], 0.5, 1.0, vec![0.0; 2]).unwrap();
        assert_eq!(c.chain().as_slice(), &[1.0, 1.0]);

        let c =
            make_variant(VariantTag::DerivDoubleIntegral, vec![0.1, 1.0, 2.0, 1.0], 0.5, 0.8, vec![0.0; 4]).unwrap();
        assert_eq!(c.channels(), vec![Channel::DoubleIntegral, Channel::Integral, Channel::Value, Channel::Derivative]);
    }

    #[test]
    fn rhs_zero_error_point() {
        let cfg = tracking_observer().validate().unwrap();
        assert_eq!(cfg.observer_rhs(&[0.0, 1.0, 0.0], 1.0), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn rhs_fold_integral_value() {
        let cfg = make_variant(VariantTag::FoldIntegral, vec![1.0, 1.0], 0.5, 0.8, vec![0.0; 2]).unwrap();
        let d = cfg.observer_rhs(&[1.0, 2.0], 0.0);
        // 8 * (-(0.5)^(2/3) - 2^0.8), each power via exp/ln independently
        let expected = 8.0 * (-((2.0 / 3.0) * 0.5f64.ln()).exp() - (0.8 * 2.0f64.ln()).exp());
        assert_eq!(d[0], 2.0);
        assert!((d[1] - expected).abs() < 1e-12);
        assert!((d[1] + 18.96849321231748).abs() < 1e-12);
    }

    #[test]
    fn rhs_odd_symmetry() {
        let cfg = tracking_observer().validate().unwrap();
        let x = [0.3, -1.2, 2.5];
        let a = 0.7;
        let pos = cfg.observer_rhs(&x, a);
        let neg = cfg.observer_rhs(&[-0.3, 1.2, -2.5], -a);
        for (p, n) in pos.iter().zip(&neg) {
            assert_eq!(*p, -*n);
        }
    }

    #[test]
    fn unit_epsilon_reduces_to_unscaled_chain() {
        // eps = 1 is outside the validated range; patch a valid config.
        let mut cfg = tracking_observer().validate().unwrap();
        cfg.spec.epsilon = 1.0;
        cfg.eps_pow = vec![1.0; 3];
        cfg.inv_lead = 1.0;
        let x = [0.4, 1.3, -0.9];
        let d = cfg.observer_rhs(&x, x[1]);
        let c = cfg.chain().clone();
        let expected = -0.1 * signed(0.4, c.alpha(1)) - 1.0 * signed(-0.9, c.alpha(3));
        assert_eq!(&d[..2], &[1.3, -0.9]);
        assert!((d[2] - expected).abs() < 1e-15);
    }

    fn signed(x: f64, a: f64) -> f64 {
        x.signum() * (a * x.abs().ln()).exp()
    }
}
