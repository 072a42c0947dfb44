use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use idobs_core::stability::{
    alpha_chain, feasible_shape, power_sign, routh_hurwitz, scaled_char_poly, ExponentChain, Verdict,
};

/// Right half-plane test through the companion-matrix eigenvalues. `None`
/// when a root sits too close to the imaginary axis to call.
fn eigen_verdict(coeffs: &[f64]) -> Option<bool> {
    let n = coeffs.len() - 1;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        m[(0, j)] = -coeffs[j + 1] / coeffs[0];
    }
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    let eig = m.complex_eigenvalues();
    if eig.iter().any(|z| z.re.abs() < 1e-9) {
        return None;
    }
    Some(eig.iter().all(|z| z.re < 0.0))
}

#[test]
fn routh_agrees_with_eigenvalues() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    while checked < 300 {
        let deg = rng.gen_range(2..=6);
        let mut c: Vec<f64> = (0..=deg).map(|_| rng.gen_range(-5.0..5.0)).collect();
        c[0] = c[0].abs().max(1e-3);
        let Some(stable) = eigen_verdict(&c) else { continue };
        let v = routh_hurwitz(&c).unwrap().verdict;
        assert_eq!(v == Verdict::Hurwitz, stable, "{c:?} -> {v}");
        checked += 1;
    }
}

#[test]
fn stable_products_are_hurwitz() {
    // (s + 1)(s + 2)(s^2 + s + 3)
    let c = [1.0, 4.0, 8.0, 11.0, 6.0];
    assert_eq!(routh_hurwitz(&c).unwrap().verdict, Verdict::Hurwitz);
    // (s - 0.5)(s + 1)^2
    assert_eq!(routh_hurwitz(&[1.0, 1.5, 0.0, -0.5]).unwrap().verdict, Verdict::NotHurwitz);
}

/// Gains satisfying the feasibility inequalities for every eps in (0, 1).
fn admissible_gains(n: usize, p: usize) -> Vec<f64> {
    match (n, p) {
        (2, 2) => vec![0.1, 2.0],
        (3, 2) | (3, 3) => vec![0.1, 2.0, 1.0],
        (4, 3) => vec![0.1, 2.0, 3.0, 1.0],
        _ => unreachable!(),
    }
}

#[test]
fn feasible_shapes_hurwitz_on_eps_grid() {
    for (n, p) in [(2, 2), (3, 2), (3, 3), (4, 3)] {
        let chain = alpha_chain(n, 0.8).unwrap();
        for eps in [0.9, 0.5, 0.1, 0.01] {
            let poly = scaled_char_poly(p, &admissible_gains(n, p), eps, &chain);
            assert_eq!(routh_hurwitz(&poly).unwrap().verdict, Verdict::Hurwitz, "({n},{p}) eps={eps}");
        }
    }
}

#[test]
fn order_five_fails_somewhere_on_grid() {
    let chain = alpha_chain(5, 0.8).unwrap();
    for p in 2..=5 {
        let bad = [0.9, 0.5, 0.1, 0.01].iter().any(|&eps| {
            let poly = scaled_char_poly(p, &[1.0; 5], eps, &chain);
            routh_hurwitz(&poly).unwrap().verdict != Verdict::Hurwitz
        });
        assert!(bad, "p={p}");
        assert!(!feasible_shape(5, p).unwrap());
    }
}

proptest! {
    #[test]
    fn chain_forms_agree(n in 2usize..=8, a in 0.01f64..=1.0) {
        let closed = ExponentChain::closed_form(n, a).unwrap();
        let rec = ExponentChain::recursive(n, a).unwrap();
        for (c, r) in closed.iter().zip(&rec) {
            prop_assert!((c - r).abs() <= 1e-12 * c.abs());
        }
    }

    #[test]
    fn chain_increases_towards_alpha_n(n in 2usize..=8, a in 0.01f64..1.0) {
        let c = alpha_chain(n, a).unwrap();
        prop_assert_eq!(c.alpha(n), a);
        for w in c.as_slice().windows(2) {
            prop_assert!(0.0 < w[0] && w[0] < w[1] && w[1] <= 1.0);
        }
    }

    #[test]
    fn power_sign_is_holder(x in -1e3f64..1e3, y in -1e3f64..1e3, a in 0.01f64..=1.0) {
        let lhs = (power_sign(x, a).unwrap() - power_sign(y, a).unwrap()).abs();
        let rhs = 2f64.powf(1.0 - a) * (x - y).abs().powf(a);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn power_sign_odd_and_monotone(x in -50.0f64..50.0, d in 1e-6f64..10.0, a in 0.05f64..=1.0) {
        prop_assert_eq!(power_sign(-x, a).unwrap(), -power_sign(x, a).unwrap());
        prop_assert!(power_sign(x + d, a).unwrap() > power_sign(x, a).unwrap());
    }

    #[test]
    fn feasible_shapes_hurwitz_for_random_eps(eps in 0.001f64..0.999, a in 0.5f64..=1.0) {
        for (n, p) in [(2, 2), (3, 2), (3, 3), (4, 3)] {
            let chain = alpha_chain(n, a).unwrap();
            let poly = scaled_char_poly(p, &admissible_gains(n, p), eps, &chain);
            prop_assert_eq!(routh_hurwitz(&poly).unwrap().verdict, Verdict::Hurwitz);
        }
    }
}
