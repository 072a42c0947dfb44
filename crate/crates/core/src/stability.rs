//! Scalar nonlinearities, exponent chains and polynomial stability.

use alloc::vec::Vec;
use core::fmt;

use crate::math;

/// Errors from the stability primitives.
#[derive(Debug, Clone, PartialEq)]
pub enum StabilityError {
    /// An exponent outside `(0, 1]`.
    ExponentOutOfRange(f64),
    /// System order below the supported minimum.
    OrderTooSmall { n: usize, min: usize },
    /// Measurement slot outside `2..=n`.
    SlotOutOfRange { n: usize, p: usize },
    /// Routh input with no coefficients beyond the leading one.
    DegreeTooSmall,
    /// Leading coefficient must be strictly positive.
    NonPositiveLeading(f64),
    /// NaN or infinite coefficient.
    NonFiniteCoefficient(usize),
    /// The closed form and the recursion disagree, or the recursion hit a
    /// non-positive denominator. Unreachable for valid inputs.
    ChainMismatch { index: usize, closed: f64, recursive: f64 },
}

impl fmt::Display for StabilityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ExponentOutOfRange(a) => write!(f, "exponent {a} outside (0, 1]"),
            Self::OrderTooSmall { n, min } => write!(f, "order n={n} below minimum {min}"),
            Self::SlotOutOfRange { n, p } => {
                write!(f, "measurement slot p={p} outside 2..={n}")
            }
            Self::DegreeTooSmall => write!(f, "polynomial degree must be at least 1"),
            Self::NonPositiveLeading(c) => write!(f, "leading coefficient {c} is not positive"),
            Self::NonFiniteCoefficient(i) => write!(f, "coefficient {i} is not finite"),
            Self::ChainMismatch { index, closed, recursive } => {
                write!(f, "exponent chain mismatch at alpha_{index}: closed form {closed}, recursion {recursive}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for StabilityError {}

fn check_exponent(alpha: f64) -> Result<(), StabilityError> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(StabilityError::ExponentOutOfRange(alpha))
    }
}

/// `|x|^alpha * sign(x)`, with `alpha` validated to lie in `(0, 1]`.
pub fn power_sign(x: f64, alpha: f64) -> Result<f64, StabilityError> {
    check_exponent(alpha)?;
    Ok(signed_pow(x, alpha))
}

/// Unchecked `|x|^alpha * sign(x)`; exactly zero at `x == 0`.
///
/// Used on the observer hot path where the exponent was validated once.
#[inline]
pub fn signed_pow(x: f64, alpha: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if x > 0.0 {
        math::powf(x, alpha)
    } else {
        -math::powf(-x, alpha)
    }
}

/// Relative tolerance between the closed-form chain and the recursion.
pub const CHAIN_AGREEMENT_TOL: f64 = 1e-12;

/// Exponents `alpha_1..alpha_n` of a finite-time stable integrator chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentChain {
    alphas: Vec<f64>,
}

impl ExponentChain {
    /// Builds the chain from the terminal exponent `alpha_n`.
    ///
    /// Values come from `alpha_i = alpha_n / ((n-i+1) - (n-i) alpha_n)` and
    /// are cross-checked against the backward recursion
    /// `alpha_{i-1} = alpha_i alpha_{i+1} / (2 alpha_{i+1} - alpha_i)`,
    /// `alpha_{n+1} = 1`.
    pub fn new(n: usize, alpha_n: f64) -> Result<Self, StabilityError> {
        let closed = Self::closed_form(n, alpha_n)?;
        let recursive = Self::recursive(n, alpha_n)?;
        for (i, (c, r)) in closed.iter().zip(&recursive).enumerate() {
            if (c - r).abs() > CHAIN_AGREEMENT_TOL * c.abs() {
                return Err(StabilityError::ChainMismatch { index: i + 1, closed: *c, recursive: *r });
            }
        }
        Ok(Self { alphas: closed })
    }

    /// Closed-form exponents, index 0 holding `alpha_1`.
    pub fn closed_form(n: usize, alpha_n: f64) -> Result<Vec<f64>, StabilityError> {
        Self::check_inputs(n, alpha_n)?;
        Ok((1..=n)
            .map(|i| {
                let m = (n - i) as f64;
                alpha_n / ((m + 1.0) - m * alpha_n)
            })
            .collect())
    }

    /// Exponents obtained by iterating the backward recursion from `alpha_n`.
    pub fn recursive(n: usize, alpha_n: f64) -> Result<Vec<f64>, StabilityError> {
        Self::check_inputs(n, alpha_n)?;
        // ext[i] = alpha_i for i in 1..=n+1
        let mut ext = alloc::vec![0.0; n + 2];
        ext[n + 1] = 1.0;
        ext[n] = alpha_n;
        for i in (2..=n).rev() {
            let denom = 2.0 * ext[i + 1] - ext[i];
            if denom <= 0.0 {
                return Err(StabilityError::ChainMismatch { index: i - 1, closed: f64::NAN, recursive: denom });
            }
            ext[i - 1] = ext[i] * ext[i + 1] / denom;
        }
        Ok(ext[1..=n].to_vec())
    }

    fn check_inputs(n: usize, alpha_n: f64) -> Result<(), StabilityError> {
        if n < 2 {
            return Err(StabilityError::OrderTooSmall { n, min: 2 });
        }
        check_exponent(alpha_n)
    }

    pub fn order(&self) -> usize {
        self.alphas.len()
    }

    /// `alpha_i` for `i` in `1..=n`.
    pub fn alpha(&self, i: usize) -> f64 {
        self.alphas[i - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.alphas
    }
}

/// Shorthand for [`ExponentChain::new`].
pub fn alpha_chain(n: usize, alpha_n: f64) -> Result<ExponentChain, StabilityError> {
    ExponentChain::new(n, alpha_n)
}

/// Routh pivots below this fraction of the largest coefficient magnitude
/// make the table [`Verdict::Singular`].
pub const ROUTH_SINGULAR_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Hurwitz,
    NotHurwitz,
    Singular,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Hurwitz => "Hurwitz",
            Verdict::NotHurwitz => "NotHurwitz",
            Verdict::Singular => "Singular",
        })
    }
}

/// Routh array of a real polynomial given in descending powers.
#[derive(Debug, Clone, PartialEq)]
pub struct RouthTable {
    pub degree: usize,
    pub coefficients: Vec<f64>,
    /// Full rows, `rows[0]` for `s^degree`. Construction stops at a
    /// singular pivot, so a singular table has fewer than `degree + 1` rows.
    pub rows: Vec<Vec<f64>>,
    /// Pivot of each computed row.
    pub first_column: Vec<f64>,
    pub verdict: Verdict,
}

/// Builds the Routh array and decides whether every root lies in the open
/// left half-plane.
///
/// A near-zero pivot stops construction. The verdict is then
/// [`Verdict::NotHurwitz`] if a right half-plane root is proven anyway (a
/// negative coefficient, an earlier negative pivot, or sign changes when
/// the table is continued past a zero pivot in a nonzero row), else
/// [`Verdict::Singular`].
pub fn routh_hurwitz(coefficients: &[f64]) -> Result<RouthTable, StabilityError> {
    if coefficients.len() < 2 {
        return Err(StabilityError::DegreeTooSmall);
    }
    if let Some(i) = coefficients.iter().position(|c| !c.is_finite()) {
        return Err(StabilityError::NonFiniteCoefficient(i));
    }
    if coefficients[0] <= 0.0 {
        return Err(StabilityError::NonPositiveLeading(coefficients[0]));
    }
    let degree = coefficients.len() - 1;
    let scale = coefficients.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let tol = ROUTH_SINGULAR_REL_TOL * scale;
    let width = degree / 2 + 1;

    let seed_row = |offset: usize| -> Vec<f64> {
        let mut row: Vec<f64> = coefficients.iter().skip(offset).step_by(2).copied().collect();
        row.resize(width, 0.0);
        row
    };

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(degree + 1);
    let mut first_column = Vec::with_capacity(degree + 1);
    // A Hurwitz polynomial has strictly positive coefficients; a negative
    // one already settles the verdict even if the table degenerates.
    let mut unstable = coefficients.iter().any(|&c| c < -tol);
    let mut singular = false;

    for k in 0..=degree {
        let row = match k {
            0 => seed_row(0),
            1 => seed_row(1),
            _ => next_row(&rows[k - 2], &rows[k - 1]),
        };
        let pivot = row[0];
        first_column.push(pivot);
        rows.push(row);
        if pivot.abs() < tol {
            singular = true;
            if !unstable && k < degree && rows[k].iter().any(|v| v.abs() >= tol) {
                unstable = continued_sign_changes(&rows, degree, tol) > 0;
            }
            break;
        }
        if pivot < 0.0 {
            unstable = true;
        }
    }
    let verdict = if unstable {
        Verdict::NotHurwitz
    } else if singular {
        Verdict::Singular
    } else {
        Verdict::Hurwitz
    };

    Ok(RouthTable { degree, coefficients: coefficients.to_vec(), rows, first_column, verdict })
}

fn next_row(above2: &[f64], above: &[f64]) -> Vec<f64> {
    let width = above.len();
    let pivot = above[0];
    let mut row = alloc::vec![0.0; width];
    for j in 0..width - 1 {
        row[j] = (pivot * above2[j + 1] - above2[0] * above[j + 1]) / pivot;
    }
    row
}

/// Sign changes in the first column after replacing the (near-)zero pivot
/// of the last row by `+tol` and finishing the table. Any change means a
/// right half-plane root for either sign of the true pivot.
fn continued_sign_changes(rows: &[Vec<f64>], degree: usize, tol: f64) -> usize {
    let mut prev2 = rows[rows.len() - 2].clone();
    let mut prev = rows[rows.len() - 1].clone();
    prev[0] = tol;
    let mut column: Vec<f64> = rows[..rows.len() - 1].iter().map(|r| r[0]).collect();
    column.push(tol);
    for _ in rows.len()..=degree {
        let mut row = next_row(&prev2, &prev);
        if row[0] == 0.0 {
            row[0] = tol;
        }
        column.push(row[0]);
        prev2 = core::mem::replace(&mut prev, row);
    }
    column.windows(2).filter(|w| (w[0] < 0.0) != (w[1] < 0.0)).count()
}

/// Whether the scaled observer polynomial can be Hurwitz for every
/// `epsilon in (0, 1)` with bounded positive gains.
///
/// True exactly for `(2,2)`, `(3,2)`, `(3,3)` and `(4,3)`.
pub fn feasible_shape(n: usize, p: usize) -> Result<bool, StabilityError> {
    if n < 2 {
        return Err(StabilityError::OrderTooSmall { n, min: 2 });
    }
    if p < 2 || p > n {
        return Err(StabilityError::SlotOutOfRange { n, p });
    }
    Ok(matches!((n, p), (2, 2) | (3, 2) | (3, 3) | (4, 3)))
}

/// Coefficients (descending) of
/// `s^n + k_n s^(n-1) + ... + (k_p / eps^(p alpha_p)) s^(p-1) + ... + k_1`.
///
/// `gains[i]` holds `k_{i+1}`. Callers guarantee `gains.len() == chain.order()`
/// and `2 <= p <= n`.
pub fn scaled_char_poly(p: usize, gains: &[f64], epsilon: f64, chain: &ExponentChain) -> Vec<f64> {
    let n = gains.len();
    let mut poly = Vec::with_capacity(n + 1);
    poly.push(1.0);
    for i in (1..=n).rev() {
        let k = gains[i - 1];
        if i == p {
            poly.push(k / math::powf(epsilon, p as f64 * chain.alpha(i)));
        } else {
            poly.push(k);
        }
    }
    poly
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_sign_examples() {
        assert_eq!(power_sign(0.0, 0.7).unwrap(), 0.0);
        assert_eq!(power_sign(-4.0, 0.5).unwrap(), -2.0);
        // 2^0.8 evaluated independently as exp(0.8 ln 2)
        let expected = (0.8 * core::f64::consts::LN_2).exp();
        assert!((power_sign(2.0, 0.8).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 1.74110).abs() < 1e-5);
    }

    #[test]
    fn power_sign_rejects_bad_exponent() {
        for a in [0.0, -0.5, 1.0001, f64::NAN] {
            assert!(matches!(power_sign(1.0, a), Err(StabilityError::ExponentOutOfRange(_))));
        }
        assert!(power_sign(1.0, 1.0).is_ok());
    }

    #[test]
    fn negative_zero_maps_to_zero() {
        assert_eq!(signed_pow(-0.0, 0.3), 0.0);
    }

    #[test]
    fn alpha_chain_examples() {
        assert_eq!(alpha_chain(3, 1.0).unwrap().as_slice(), &[1.0, 1.0, 1.0]);

        let c = alpha_chain(3, 0.8).unwrap();
        assert!((c.alpha(1) - 4.0 / 7.0).abs() < 1e-15);
        assert!((c.alpha(2) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(c.alpha(3), 0.8);

        let c = alpha_chain(3, 0.9).unwrap();
        assert!((c.alpha(1) - 0.75).abs() < 1e-15);
        assert!((c.alpha(2) - 9.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn alpha_chain_rejects_bad_inputs() {
        assert!(matches!(alpha_chain(1, 0.5), Err(StabilityError::OrderTooSmall { .. })));
        assert!(matches!(alpha_chain(3, 0.0), Err(StabilityError::ExponentOutOfRange(_))));
        assert!(matches!(alpha_chain(3, 1.5), Err(StabilityError::ExponentOutOfRange(_))));
    }

    #[test]
    fn routh_examples() {
        assert_eq!(routh_hurwitz(&[1.0, 1.0, 1.0]).unwrap().verdict, Verdict::Hurwitz);
        let t = routh_hurwitz(&[1.0, 1.0, 2.0, 1.0]).unwrap();
        assert_eq!(t.verdict, Verdict::Hurwitz);
        // s^1 pivot (k3 k2 - k1)/k3 = (2 - 1)/1
        assert_eq!(t.first_column, vec![1.0, 1.0, 1.0, 1.0]);
        // zero s^1 row, but the negative coefficient decides
        assert_eq!(routh_hurwitz(&[1.0, 0.0, -1.0]).unwrap().verdict, Verdict::NotHurwitz);
        assert_eq!(routh_hurwitz(&[1.0, 0.0, 1.0]).unwrap().verdict, Verdict::Singular);
        assert_eq!(routh_hurwitz(&[1.0, 1.0, -1.0]).unwrap().verdict, Verdict::NotHurwitz);
        // s^3 + s^2 + s + 1 has roots on the imaginary axis
        assert_eq!(routh_hurwitz(&[1.0, 1.0, 1.0, 1.0]).unwrap().verdict, Verdict::Singular);
    }

    #[test]
    fn zero_pivot_in_nonzero_row_is_continued() {
        // s^4 + s^3 + 2s^2 + 2s + 3: zero s^2 pivot, two right half-plane roots
        let t = routh_hurwitz(&[1.0, 1.0, 2.0, 2.0, 3.0]).unwrap();
        assert_eq!(t.first_column[2], 0.0);
        assert_eq!(t.verdict, Verdict::NotHurwitz);
        assert_eq!(routh_hurwitz(&[1.0, 1.0, 1.0, 1.0, 1.0, 2.0]).unwrap().verdict, Verdict::NotHurwitz);
        // (s+1)(s^4 + s^2 + 1): whole s^3 row vanishes, left Singular
        assert_eq!(routh_hurwitz(&[1.0; 6]).unwrap().verdict, Verdict::Singular);
    }

    #[test]
    fn routh_quartic_matches_closed_conditions() {
        // s^4 + k4 s^3 + k3 s^2 + k2 s + k1: A1 = (k4 k3 - k2)/k4,
        // B1 = (A1 k2 - k4 k1)/A1
        let (k4, k3, k2, k1) = (2.0, 3.0, 1.5, 0.4);
        let t = routh_hurwitz(&[1.0, k4, k3, k2, k1]).unwrap();
        let a1 = (k4 * k3 - k2) / k4;
        let b1 = (a1 * k2 - k4 * k1) / a1;
        assert!((t.first_column[2] - a1).abs() < 1e-14);
        assert!((t.first_column[3] - b1).abs() < 1e-14);
        assert_eq!(t.first_column[4], k1);
        assert_eq!(t.verdict, Verdict::Hurwitz);
    }

    #[test]
    fn routh_input_errors() {
        assert_eq!(routh_hurwitz(&[1.0]), Err(StabilityError::DegreeTooSmall));
        assert!(matches!(routh_hurwitz(&[-1.0, 1.0]), Err(StabilityError::NonPositiveLeading(_))));
        assert!(matches!(routh_hurwitz(&[0.0, 1.0]), Err(StabilityError::NonPositiveLeading(_))));
        assert!(matches!(routh_hurwitz(&[1.0, f64::NAN]), Err(StabilityError::NonFiniteCoefficient(1))));
    }

    #[test]
    fn first_degree() {
        assert_eq!(routh_hurwitz(&[2.0, 3.0]).unwrap().verdict, Verdict::Hurwitz);
        assert_eq!(routh_hurwitz(&[2.0, -3.0]).unwrap().verdict, Verdict::NotHurwitz);
    }

    #[test]
    fn feasibility_set() {
        assert!(feasible_shape(2, 2).unwrap());
        assert!(feasible_shape(3, 2).unwrap());
        assert!(feasible_shape(3, 3).unwrap());
        assert!(feasible_shape(4, 3).unwrap());
        assert!(!feasible_shape(4, 2).unwrap());
        assert!(!feasible_shape(4, 4).unwrap());
        assert!(!feasible_shape(5, 4).unwrap());
        assert!(feasible_shape(3, 1).is_err());
        assert!(feasible_shape(3, 4).is_err());
        assert!(feasible_shape(1, 1).is_err());
    }

    #[test]
    fn char_poly_examples() {
        let chain = alpha_chain(2, 0.8).unwrap();
        let poly = scaled_char_poly(2, &[0.1, 2.0], 0.5, &chain);
        assert_eq!(poly[0], 1.0);
        assert!((poly[1] - 6.062866266041593).abs() < 1e-12);
        assert_eq!(poly[2], 0.1);

        let chain = alpha_chain(3, 0.8).unwrap();
        assert_eq!(scaled_char_poly(2, &[0.1, 2.0, 1.0], 1.0, &chain), vec![1.0, 1.0, 2.0, 0.1]);

        let chain = alpha_chain(4, 0.8).unwrap();
        let poly = scaled_char_poly(3, &[1.0; 4], 0.5, &chain);
        // s^2 slot: 0.5^(-3 * 2/3) = 4
        assert!((poly[2] - 4.0).abs() < 1e-12);
        assert_eq!([poly[0], poly[1], poly[3], poly[4]], [1.0; 4]);
    }
}
