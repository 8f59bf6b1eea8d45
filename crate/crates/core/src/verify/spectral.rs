//! Spectrum of the Fourier symbol `iξA + Bᵃ + Bˢ` and its decay rate.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::linalg::{eigenvalues, rat_to_cmat, C64};
use crate::kalman::SystemSpec;
use crate::polymat::{determinant, pow2, rational_from_f64, sturm, GaussPoly, GaussRat, Mat, RatPoly, Rational};

/// Relative precision (in bits) of the exact decay rate.
const RATE_BITS: u32 = 30;

/// Spectrum of the symbol at one frequency.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralSample {
    pub xi: f64,
    /// Eigenvalues `λ` of `iξA + B`; modes decay like `e^{−λt}`.
    pub eigenvalues: Vec<(f64, f64)>,
    /// `min Re λ`.
    pub rate: f64,
}

/// `det(λI − (iξA + Bᵃ + Bˢ))` with exact Gaussian-rational coefficients.
pub fn symbol_char_poly(sys: &SystemSpec, xi: &Rational) -> GaussPoly {
    let b = sys.b();
    let lam = GaussPoly::x();
    let m: Mat<GaussPoly> = Mat::from_fn(sys.n, sys.n, |i, j| {
        let entry = GaussRat::new(b.get(i, j).clone(), xi * sys.a.get(i, j));
        let c = GaussPoly::constant(-entry);
        if i == j {
            &c + &lam
        } else {
            c
        }
    });
    determinant(&m)
}

/// Number of roots of the monic `p` with real part `< s`, or `None` when a
/// root lies on the line `Re λ = s`.
///
/// With `q(λ) = p(λ + s)` and `q(iy) = R(y) + iI(y)` (after rotating the
/// leading coefficient to the real axis), the argument principle gives
/// `#left − #right = −Ind_{−∞}^{+∞}(I/R)`.
fn roots_left_of(p: &GaussPoly, s: &Rational) -> Option<usize> {
    let n = p.degree().unwrap_or(0) as i64;
    let q = p.shift(&GaussRat::real(s.clone()));
    // i^k and the rotation (−i)^n folded into one factor i^{k−n}.
    let rot = |k: usize| -> GaussRat {
        match (k as i64 - n).rem_euclid(4) {
            0 => GaussRat::one(),
            1 => GaussRat::i(),
            2 => -GaussRat::one(),
            _ => -GaussRat::i(),
        }
    };
    let f: Vec<GaussRat> = q.coeffs().iter().enumerate().map(|(k, c)| c * &rot(k)).collect();
    let r = RatPoly::new(f.iter().map(|c| c.re.clone()).collect());
    let i = RatPoly::new(f.iter().map(|c| c.im.clone()).collect());
    let (ind, common) = sturm::cauchy_index(&i, &r);
    if common {
        return None;
    }
    Some(((n - ind) / 2) as usize)
}

fn count_left(p: &GaussPoly, s: &Rational) -> usize {
    let mut s = s.clone();
    let mut nudge = s.abs() * pow2(-40);
    if nudge.is_zero() {
        nudge = pow2(-1200);
    }
    loop {
        if let Some(c) = roots_left_of(p, &s) {
            return c;
        }
        s += &nudge;
        nudge *= Rational::from_integer(2.into());
    }
}

/// Exact-arithmetic decay rate `min Re λ` at a rational frequency, to about
/// 30 relative bits. Negative rates (unstable symbols) are reported through
/// the double-precision spectrum instead.
pub fn rate_exact(sys: &SystemSpec, xi: &Rational) -> Option<f64> {
    let p = symbol_char_poly(sys, xi);
    if count_left(&p, &Rational::zero()) > 0 {
        return None;
    }
    // Every eigenvalue has Re λ ≤ λ_max(Bˢ) ≤ tr Bˢ.
    let trace: Rational = (0..sys.n).map(|i| sys.bs.get(i, i).clone()).fold(Rational::zero(), |a, b| a + b);
    let upper = (trace.numer().bits() as i64 - trace.denom().bits() as i64) + 2;
    let lower = -1100;
    let mut counts = |x: &Rational| count_left(&p, x);
    if counts(&pow2(lower as i32)) > 0 {
        return Some(0.0);
    }
    let (lo, hi) = sturm::first_crossing(&mut counts, lower, upper, RATE_BITS);
    Some(crate::polymat::rational_to_f64(&((lo + hi) / Rational::from_integer(2.into()))))
}

/// Eigenvalues of the symbol and its decay rate at frequency `xi`.
pub fn spectral_rate(sys: &SystemSpec, xi: f64) -> SpectralSample {
    let g = rat_to_cmat(&sys.a) * C64::new(0.0, xi) + rat_to_cmat(&sys.b());
    let ev = eigenvalues(&g);
    let float_rate = ev.iter().map(|l| l.re).fold(f64::INFINITY, f64::min);
    let rate = rate_exact(sys, &rational_from_f64(xi)).unwrap_or(float_rate);
    SpectralSample { xi, eigenvalues: ev.iter().map(|l| (l.re, l.im)).collect(), rate }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymat::{int, rat, RatMatrix};

    fn rm(rows: &[&[i64]]) -> RatMatrix {
        Mat::from_rows(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect())
    }

    fn damped() -> SystemSpec {
        SystemSpec::new("damped", rm(&[&[0, 1], &[1, 0]]), RatMatrix::zeros(2, 2), rm(&[&[1, 0], &[0, 0]])).unwrap()
    }

    #[test]
    fn left_root_count_for_linear_factors() {
        // (λ + 1)(λ − 2 − 3i): one root left of 0, two left of 3.
        let l1 = GaussPoly::new(vec![GaussRat::one(), GaussRat::one()]);
        let l2 = GaussPoly::new(vec![GaussRat::new(int(-2), int(-3)), GaussRat::one()]);
        let p = &l1 * &l2;
        assert_eq!(roots_left_of(&p, &int(0)), Some(1));
        assert_eq!(roots_left_of(&p, &int(3)), Some(2));
        assert_eq!(roots_left_of(&p, &int(-2)), Some(0));
        assert_eq!(roots_left_of(&p, &int(2)), None);
    }

    #[test]
    fn damped_wave_closed_form() {
        // Eigenvalues (1 ± √(1 − 4ξ²))/2: rate ½ once ξ > ½.
        let s = spectral_rate(&damped(), 4.0);
        assert!((s.rate - 0.5).abs() < 1e-8);
        let xi = 0.25f64;
        let closed = (1.0 - (1.0 - 4.0 * xi * xi).sqrt()) / 2.0;
        let r = rate_exact(&damped(), &rat(1, 4)).unwrap();
        assert!((r / closed - 1.0).abs() < 1e-8);
    }

    #[test]
    fn tiny_rates_are_resolved() {
        // Rate ~ ξ² at ξ = 2^-30, far below double-precision resolution of
        // the O(1) eigenvalue.
        let xi = 2f64.powi(-30);
        let closed = 2.0 * xi * xi / (1.0 + (1.0 - 4.0 * xi * xi).sqrt());
        let r = rate_exact(&damped(), &pow2(-30)).unwrap();
        assert!((r / closed - 1.0).abs() < 1e-8);
    }

    #[test]
    fn pure_relaxation_rate() {
        let sys = SystemSpec::new("relax", RatMatrix::zeros(2, 2), RatMatrix::zeros(2, 2), rm(&[&[2, 0], &[0, 3]])).unwrap();
        for xi in [0.01, 1.0, 100.0] {
            assert!((spectral_rate(&sys, xi).rate - 2.0).abs() < 1e-8);
        }
    }
}
