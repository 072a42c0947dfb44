use nalgebra::DMatrix;
use proptest::prelude::*;

use idobs_core::observer::{make_variant, ObserverConfig, VariantTag};
use idobs_core::ode::{simulate, FnDynamics, StateOnly, StepScheme};

fn config(tag: VariantTag, eps: f64, alpha: f64) -> ObserverConfig {
    let gains = match tag {
        VariantTag::FoldIntegral => vec![0.1, 2.0],
        VariantTag::DerivIntegral | VariantTag::DoubleIntegral => vec![0.1, 2.0, 1.0],
        VariantTag::DerivDoubleIntegral => vec![0.1, 2.0, 3.0, 1.0],
    };
    let n = gains.len();
    make_variant(tag, gains, eps, alpha, vec![0.0; n]).unwrap()
}

fn tag_strategy() -> impl Strategy<Value = VariantTag> {
    prop::sample::select(VariantTag::ALL.to_vec())
}

proptest! {
    #[test]
    fn rhs_is_odd(
        tag in tag_strategy(),
        eps in 0.05f64..0.95,
        alpha in 0.3f64..=1.0,
        x in prop::collection::vec(-10.0f64..10.0, 4),
        a in -10.0f64..10.0,
    ) {
        let cfg = config(tag, eps, alpha);
        let x = &x[..cfg.order()];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let f = cfg.observer_rhs(x, a);
        let g = cfg.observer_rhs(&neg, -a);
        for (p, q) in f.iter().zip(&g) {
            prop_assert_eq!(*p, -*q);
        }
    }

    /// Each term is Hölder, so a perturbation of size d moves the last
    /// component by at most eps^-(n+1) sum k_i 2^(1-a_i) (s_i d)^a_i.
    #[test]
    fn rhs_is_holder_continuous(
        tag in tag_strategy(),
        eps in 0.1f64..0.9,
        alpha in 0.3f64..=1.0,
        x in prop::collection::vec(-5.0f64..5.0, 4),
        a in -5.0f64..5.0,
        d in 1e-12f64..1e-3,
    ) {
        let cfg = config(tag, eps, alpha);
        let n = cfg.order();
        let x = &x[..n];
        let shifted: Vec<f64> = x.iter().map(|v| v + d).collect();
        let f = cfg.observer_rhs(x, a);
        let g = cfg.observer_rhs(&shifted, a);
        let mut bound = 0.0;
        for i in 1..=n {
            let ai = cfg.chain().alpha(i);
            let scale = if i == cfg.slot() { 1.0 } else { eps.powi(i as i32) };
            bound += cfg.gains()[i - 1] * 2f64.powf(1.0 - ai) * (scale * d).powf(ai);
        }
        bound *= eps.powi(-(n as i32 + 1));
        prop_assert!((f[n - 1] - g[n - 1]).abs() <= bound * (1.0 + 1e-9) + 1e-12);
        for i in 0..n - 1 {
            prop_assert!((f[i] - g[i]).abs() <= d * (1.0 + 1e-9));
        }
    }
}

/// With every exponent 1 and a zero input the observer is linear, and its
/// slowest decay rate is the dominant root of the scaled polynomial over eps.
#[test]
fn linear_case_decays_at_dominant_root() {
    let eps = 0.5;
    let cfg = make_variant(VariantTag::DerivIntegral, vec![0.1, 2.0, 1.0], eps, 1.0, vec![1.0, 0.0, 0.0]).unwrap();
    let poly = cfg.char_poly().to_vec();
    let n = poly.len() - 1;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        m[(0, j)] = -poly[j + 1];
    }
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    let dominant = m.complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let expected = dominant / eps;

    let mut sys = FnDynamics::new(3, |_t, x: &[f64], out: &mut [f64]| cfg.rhs(x, 0.0, out));
    let tr = simulate(StepScheme::rk4(1e-3), &mut sys, 0.0, 300.0, cfg.initial_state(), &StateOnly(3)).unwrap();
    let (k0, k1) = (100_000, 300_000);
    let rate = (tr.states[k1 * 3].abs().ln() - tr.states[k0 * 3].abs().ln()) / (tr.times[k1] - tr.times[k0]);
    assert!((rate - expected).abs() < 1e-3 * expected.abs(), "rate {rate} vs {expected}");
}
