//! System specification, the frequency-dependent Kalman stack, the
//! inhomogeneous Kalman rank condition and the generic exponents α, β.

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::polymat::{
    determinant, exceptional_real_points, format_rational, generic_rank, sturm, GaussPoly, GaussRat,
    Mat, PolyMatrix, RatMatrix, RatPoly, Rational, RealRoot,
};
use crate::verify::{fit_loglog, smin_oracle, SlopeFit};

/// Largest dimension accepted by the dense numerical backend.
pub const MAX_DIMENSION: usize = 64;
/// Maximal distance between a fitted slope and the integer it is rounded to.
pub const SLOPE_TOLERANCE: f64 = 0.15;
/// Exponents `j` of the σ_min sweeps `ξ = 2^{±j}`.
pub const KALMAN_SWEEP: std::ops::RangeInclusive<i32> = 6..=20;
/// Number of trailing sweep points used by the least-squares fit.
pub const FIT_POINTS: usize = 8;

/// The triple `(A, Bᵃ, Bˢ)` of a partially dissipative system.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    pub n: usize,
    pub a: RatMatrix,
    pub ba: RatMatrix,
    pub bs: RatMatrix,
    pub label: String,
    /// Smallest positive eigenvalue of `Bˢ` (the damping strength on its
    /// range).
    pub kappa: f64,
}

fn entry_error(name: &str, i: usize, j: usize, m: &RatMatrix, what: &str) -> Error {
    Error::InvalidSystem(format!(
        "{name}[{i}][{j}] = {} but {name}[{j}][{i}] = {}: {name} must be {what}",
        format_rational(m.get(i, j)),
        format_rational(m.get(j, i))
    ))
}

fn check_symmetric(name: &str, m: &RatMatrix) -> Result<()> {
    for i in 0..m.rows() {
        for j in i + 1..m.cols() {
            if m.get(i, j) != m.get(j, i) {
                return Err(entry_error(name, i, j, m, "symmetric"));
            }
        }
    }
    Ok(())
}

fn check_skew(name: &str, m: &RatMatrix) -> Result<()> {
    for i in 0..m.rows() {
        for j in i..m.cols() {
            if *m.get(i, j) != -m.get(j, i).clone() {
                return Err(entry_error(name, i, j, m, "skew-symmetric"));
            }
        }
    }
    Ok(())
}

/// Exact positive-semidefiniteness test by symmetric Schur complements:
/// a zero diagonal entry forces a zero row, a positive one is eliminated.
/// Returns the index of an offending diagonal entry on failure.
fn psd_violation(m: &RatMatrix) -> Option<usize> {
    let mut w = m.clone();
    let mut alive: Vec<usize> = (0..m.rows()).collect();
    while let Some(pos) = alive.iter().position(|&i| !w.get(i, i).is_zero()).or_else(|| {
        alive.iter().position(|&i| alive.iter().any(|&j| !w.get(i, j).is_zero()))
    }) {
        let p = alive[pos];
        let d = w.get(p, p).clone();
        if !d.is_positive() {
            return Some(p);
        }
        alive.remove(pos);
        for &i in &alive {
            for &j in &alive {
                let v = w.get(i, j).clone() - w.get(i, p).clone() * w.get(p, j).clone() / d.clone();
                w.set(i, j, v);
            }
        }
    }
    None
}

/// Characteristic polynomial `det(xI − M)` of a rational matrix.
pub fn char_poly(m: &RatMatrix) -> RatPoly {
    let x = RatPoly::x();
    let pm = Mat::from_fn(m.rows(), m.cols(), |i, j| {
        let c = RatPoly::constant(-m.get(i, j).clone());
        if i == j {
            &c + &x
        } else {
            c
        }
    });
    determinant(&pm)
}

impl SystemSpec {
    /// Validates the structure (`A` symmetric, `Bᵃ` skew, `Bˢ` symmetric,
    /// positive semidefinite and nonzero) and builds the specification.
    pub fn new(label: impl Into<String>, a: RatMatrix, ba: RatMatrix, bs: RatMatrix) -> Result<Self> {
        let n = a.rows();
        for (name, m) in [("A", &a), ("Ba", &ba), ("Bs", &bs)] {
            if m.rows() != n || m.cols() != n {
                return Err(Error::InvalidSystem(format!(
                    "{name} is {}x{}, expected {n}x{n}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        if n == 0 || n > MAX_DIMENSION {
            return Err(Error::InvalidSystem(format!("dimension {n} outside 1..={MAX_DIMENSION}")));
        }
        check_symmetric("A", &a)?;
        check_skew("Ba", &ba)?;
        check_symmetric("Bs", &bs)?;
        if bs.is_zero() {
            return Err(Error::InvalidSystem("Bs must be nonzero".into()));
        }
        if let Some(i) = psd_violation(&bs) {
            return Err(Error::InvalidSystem(format!(
                "Bs is not positive semidefinite (pivot at diagonal entry Bs[{i}][{i}])"
            )));
        }
        let kappa = sturm::smallest_positive_root(&char_poly(&bs), 40).unwrap_or(0.0);
        Ok(SystemSpec { n, a, ba, bs, label: label.into(), kappa })
    }

    /// `iξA + Bᵃ` as a polynomial matrix in ξ.
    pub fn generator_poly(&self) -> PolyMatrix {
        let ixi = GaussPoly::monomial(GaussRat::i(), 1);
        let a = self.a.to_poly().map(|p| p * &ixi);
        &a + &self.ba.to_poly()
    }

    /// `Bᵃ + Bˢ`.
    pub fn b(&self) -> RatMatrix {
        &self.ba + &self.bs
    }

    /// Exact rank of `Bˢ`.
    pub fn bs_rank(&self) -> usize {
        crate::polymat::echelon_rank(&self.bs)
    }
}

/// `(K+1)n × n` stack whose block `k` is `Bˢ(iξA + Bᵃ)^k`.
pub fn build_kalman_stack(sys: &SystemSpec, k: usize) -> PolyMatrix {
    let g = sys.generator_poly();
    let mut block = sys.bs.to_poly();
    let mut blocks = Vec::with_capacity(k + 1);
    for _ in 0..=k {
        blocks.push(block.clone());
        block = &block * &g;
    }
    Mat::vstack(&blocks)
}

/// High-frequency weighted stack in the variable `η = 1/ξ` (ξ > 0): block
/// `k` is `ξ^{−k}Bˢ(iξA + Bᵃ)^k = Bˢ(iA + ηBᵃ)^k`.
pub fn build_weighted_stack(sys: &SystemSpec, k: usize) -> PolyMatrix {
    let ia = sys.a.map(|v| GaussPoly::constant(GaussRat::new(Rational::zero(), v.clone())));
    let eta = GaussPoly::x();
    let g = &ia + &sys.ba.to_poly().map(|p| p * &eta);
    let mut block = sys.bs.to_poly();
    let mut blocks = Vec::with_capacity(k + 1);
    for _ in 0..=k {
        blocks.push(block.clone());
        block = &block * &g;
    }
    Mat::vstack(&blocks)
}

/// Integer exponent read off a log-log slope.
#[derive(Clone, Debug, Serialize)]
pub struct ExponentEstimate {
    pub exponent: u32,
    /// Slope of `log₂ σ_min` against `log₂ ξ`.
    pub raw_slope: f64,
    pub fit: SlopeFit,
    /// `(ξ, σ_min)` over the whole sweep.
    pub samples: Vec<(f64, f64)>,
}

/// Outcome of the Kalman analysis.
#[derive(Clone, Debug, Serialize)]
pub struct KalmanCertificate {
    pub holds: bool,
    /// Smallest order at which the condition holds.
    pub order: Option<usize>,
    /// Generic rank of the stack at each order tried.
    pub generic_ranks: Vec<usize>,
    /// Real frequencies where the last full-generic-rank stack drops rank.
    pub exceptional_points: Vec<RealRoot>,
    pub alpha: Option<u32>,
    pub beta: Option<u32>,
    pub alpha_fit: Option<ExponentEstimate>,
    pub beta_fit: Option<ExponentEstimate>,
    /// Failures of the exponent estimation, if any.
    pub fit_errors: Vec<String>,
}

/// Smallest `K ≤ kmax` with generic rank `n` and no real rank drop.
pub fn check_kalman(sys: &SystemSpec, kmax: usize) -> KalmanCertificate {
    let mut cert = KalmanCertificate {
        holds: false,
        order: None,
        generic_ranks: Vec::new(),
        exceptional_points: Vec::new(),
        alpha: None,
        beta: None,
        alpha_fit: None,
        beta_fit: None,
        fit_errors: Vec::new(),
    };
    for k in 0..=kmax {
        let stack = build_kalman_stack(sys, k);
        let r = generic_rank(&stack);
        cert.generic_ranks.push(r);
        if r < sys.n {
            continue;
        }
        match exceptional_real_points(&stack) {
            Ok(ex) if ex.is_empty() => {
                cert.holds = true;
                cert.order = Some(k);
                cert.exceptional_points.clear();
                return cert;
            }
            Ok(ex) => cert.exceptional_points = ex.roots,
            Err(e) => cert.fit_errors.push(e.to_string()),
        }
    }
    cert
}

/// Rounds `value` to a nonnegative integer within [`SLOPE_TOLERANCE`].
pub fn integer_exponent(value: f64) -> Result<u32> {
    let r = value.round();
    if !value.is_finite() || (value - r).abs() > SLOPE_TOLERANCE {
        return Err(Error::NonIntegerSlope { slope: value, tol: SLOPE_TOLERANCE });
    }
    Ok(r.max(0.0) as u32)
}

fn require_full_rank(sys: &SystemSpec, k: usize) -> Result<()> {
    let r = generic_rank(&build_kalman_stack(sys, k));
    if r < sys.n {
        return Err(Error::KalmanViolated { rank: r, n: sys.n });
    }
    Ok(())
}

fn estimate(samples: Vec<(f64, f64)>, sign: f64) -> Result<ExponentEstimate> {
    let tail = &samples[samples.len() - FIT_POINTS..];
    let fit = fit_loglog(tail);
    let exponent = integer_exponent(sign * fit.slope)?;
    Ok(ExponentEstimate { exponent, raw_slope: fit.slope, fit, samples })
}

/// High-frequency exponent α: `σ_min(W(ξ)) ~ ξ^{−α}` over `ξ = 2^j`.
pub fn estimate_alpha(sys: &SystemSpec, k: usize) -> Result<ExponentEstimate> {
    require_full_rank(sys, k)?;
    let w = build_weighted_stack(sys, k);
    let samples: Vec<(f64, f64)> = KALMAN_SWEEP
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&j| (2f64.powi(j), smin_oracle(&w, 2f64.powi(-j))))
        .collect();
    estimate(samples, -1.0)
}

/// Low-frequency exponent β: `σ_min(M(ξ)) ~ ξ^β` over `ξ = 2^{−j}`.
pub fn estimate_beta(sys: &SystemSpec, k: usize) -> Result<ExponentEstimate> {
    require_full_rank(sys, k)?;
    let m = build_kalman_stack(sys, k);
    let samples: Vec<(f64, f64)> = KALMAN_SWEEP
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&j| (2f64.powi(-j), smin_oracle(&m, 2f64.powi(-j))))
        .collect();
    estimate(samples, 1.0)
}

/// Rank check followed by the α/β estimates at the certified order.
pub fn certify_kalman(sys: &SystemSpec, kmax: usize) -> KalmanCertificate {
    let mut cert = check_kalman(sys, kmax);
    let Some(k) = cert.order else { return cert };
    match estimate_alpha(sys, k) {
        Ok(e) => {
            cert.alpha = Some(e.exponent);
            cert.alpha_fit = Some(e);
        }
        Err(e) => cert.fit_errors.push(format!("alpha: {e}")),
    }
    match estimate_beta(sys, k) {
        Ok(e) => {
            cert.beta = Some(e.exponent);
            cert.beta_fit = Some(e);
        }
        Err(e) => cert.fit_errors.push(format!("beta: {e}")),
    }
    cert
}

/// Default maximal order `n − 1`, at least 1.
pub fn default_kmax(sys: &SystemSpec) -> usize {
    sys.n.saturating_sub(1).max(1)
}
