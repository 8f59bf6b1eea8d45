//! Log-log slope fits and the spectral exponents.

use rayon::prelude::*;
use serde::Serialize;

use super::spectral::spectral_rate;
use crate::error::{Error, Result};
use crate::kalman::{SystemSpec, FIT_POINTS, SLOPE_TOLERANCE};

/// Exponents `j` of the spectral sweeps `ξ = 2^{±j}`.
pub const SPECTRAL_SWEEP: std::ops::RangeInclusive<i32> = 8..=20;

/// Least-squares line through `(log₂ x, log₂ y)`.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual in `log₂ y`.
    pub max_residual: f64,
    /// Range of `x` covered by the fit.
    pub window: (f64, f64),
}

impl SlopeFit {
    /// Fitted value `2^{intercept} x^{slope}`.
    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.slope * x.log2()).exp2()
    }
}

/// Fits `log₂ y = slope·log₂ x + intercept`.
///
/// # Panics
/// Panics with fewer than two points.
pub fn fit_loglog(points: &[(f64, f64)]) -> SlopeFit {
    assert!(points.len() >= 2, "slope fit needs two points");
    let xs: Vec<f64> = points.iter().map(|p| p.0.log2()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.log2()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).abs()).fold(0.0, f64::max);
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    SlopeFit { slope, intercept, max_residual, window: (lo, hi) }
}

/// Spectral exponent with its fit.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralExponent {
    pub exponent: u32,
    /// `∓slope/2` before rounding.
    pub raw: f64,
    pub fit: SlopeFit,
    /// `(ξ, rate)` over the whole sweep.
    pub samples: Vec<(f64, f64)>,
}

fn spectral_exponent(sys: &SystemSpec, sign: i32) -> Result<SpectralExponent> {
    let samples: Vec<(f64, f64)> = SPECTRAL_SWEEP
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&j| {
            let xi = 2f64.powi(sign * j);
            (xi, spectral_rate(sys, xi).rate)
        })
        .collect();
    if samples.iter().any(|s| !(s.1 > 0.0)) {
        return Err(Error::Precondition("spectral rate is not positive on the sweep".into()));
    }
    let fit = fit_loglog(&samples[samples.len() - FIT_POINTS..]);
    let raw = -(sign as f64) * fit.slope / 2.0;
    let r = raw.round();
    if (raw - r).abs() > SLOPE_TOLERANCE {
        return Err(Error::NonIntegerSlope { slope: raw, tol: SLOPE_TOLERANCE });
    }
    Ok(SpectralExponent { exponent: r.max(0.0) as u32, raw, fit, samples })
}

/// `α_spec`: `rate ~ ξ^{−2α}` over `ξ = 2^8 … 2^20`.
pub fn fit_hf_exponent(sys: &SystemSpec) -> Result<SpectralExponent> {
    spectral_exponent(sys, 1)
}

/// `β_spec`: `rate ~ ξ^{2β}` over `ξ = 2^{−8} … 2^{−20}`.
pub fn fit_lf_exponent(sys: &SystemSpec) -> Result<SpectralExponent> {
    spectral_exponent(sys, -1)
}
