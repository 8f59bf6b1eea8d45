//! Monitoring of `dℒ/dt ≤ −c·w(ξ)·ℒ` along Fourier-mode trajectories.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::integrate::{integrate_mode_sampled, step_bound, Trajectory};
use super::linalg::{CVec, C64};
use crate::error::Result;
use crate::kalman::SystemSpec;
use crate::lyapunov::{random_state, LyapunovFunctional};
use crate::polymat::{rational_from_f64, ConstMatrix};
use crate::tree::Regime;

/// Relative size below which a double-precision `dℒ/dt` is recomputed
/// exactly.
const DDT_RESOLUTION: f64 = 1e-10;

/// Certified frequency weight: `|ξ|^{−2α̃}` in HF, `|ξ|^{2β̃}` in LF.
pub fn regime_weight(regime: Regime, xi: f64, exponent: u32) -> f64 {
    match regime {
        Regime::High => xi.abs().powi(-2 * exponent as i32),
        Regime::Low => xi.abs().powi(2 * exponent as i32),
    }
}

/// Monitor outcome on one trajectory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonitorReport {
    pub xi: f64,
    pub weight: f64,
    /// `ℒ` non-increasing between samples and `dℒ/dt < 0` at every sample.
    pub monotone: bool,
    /// Largest `c` with `dℒ/dt ≤ −c·w(ξ)·ℒ` at every sample.
    pub c_empirical: f64,
    /// Smallest relative drop `(ℒ_k − ℒ_{k+1})/ℒ_k` between samples.
    pub worst_margin: f64,
    pub pass: bool,
    pub samples: usize,
}

struct ExactDissipation {
    d: Option<ConstMatrix>,
}

fn ddt(l: &LyapunovFunctional, sys: &SystemSpec, xi: f64, u: &CVec, scale: f64, exact: &mut ExactDissipation) -> Result<f64> {
    let v = l.ddt_evaluate(sys, xi, u)?;
    if v.abs() > DDT_RESOLUTION * scale * u.norm_squared() {
        return Ok(v);
    }
    let d = exact.d.get_or_insert_with(|| l.dissipation_exact(sys, &rational_from_f64(xi)).0);
    Ok(l.ddt_evaluate_exact(d, u))
}

fn dissipation_scale(l: &LyapunovFunctional, sys: &SystemSpec, xi: f64) -> f64 {
    l.dissipation(sys, xi).iter().fold(0f64, |m, z| m.max(z.norm()))
}

/// Checks monotonicity of `ℒ` and measures the empirical decay constant
/// along `traj` against the weight of `exponent`.
pub fn lyapunov_monitor(l: &LyapunovFunctional, sys: &SystemSpec, traj: &Trajectory, exponent: u32) -> Result<MonitorReport> {
    let xi = traj.xi;
    let w = regime_weight(l.regime, xi, exponent);
    let scale = dissipation_scale(l, sys, xi);
    let mut exact = ExactDissipation { d: None };
    let mut monotone = true;
    let mut c = f64::INFINITY;
    let mut margin = f64::INFINITY;
    let mut prev: Option<f64> = None;
    for u in &traj.states {
        let val = l.evaluate(xi, u)?;
        let der = ddt(l, sys, xi, u, scale, &mut exact)?;
        if !(der < 0.0) {
            monotone = false;
        }
        if val > 0.0 {
            c = c.min(-der / (w * val));
        }
        if let Some(p) = prev {
            let drop = (p - val) / p;
            margin = margin.min(drop);
            if val > p * (1.0 + 1e-12) {
                monotone = false;
            }
        }
        prev = Some(val);
    }
    let pass = monotone && c > 0.0;
    Ok(MonitorReport { xi, weight: w, monotone, c_empirical: c, worst_margin: margin, pass, samples: traj.states.len() })
}

/// Settings of a monitor sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct MonitorOptions {
    pub xi_samples: Vec<f64>,
    /// Random initial states per frequency; the worst-case eigenvector of
    /// the dissipation pencil is always added.
    pub states: usize,
    /// RK4 steps per trajectory, at the largest admissible step.
    pub steps: usize,
    pub seed: u64,
}

impl MonitorOptions {
    /// Ten frequencies `2^{±5} … 2^{±14}`.
    pub fn for_regime(regime: Regime, seed: u64) -> Self {
        let xi_samples = (5..=14)
            .map(|j| match regime {
                Regime::High => 2f64.powi(j),
                Regime::Low => 2f64.powi(-j),
            })
            .collect();
        MonitorOptions { xi_samples, states: 64, steps: 40, seed }
    }
}

/// Per-frequency summary of a monitor sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonitorRow {
    pub xi: f64,
    pub weight: f64,
    /// Smallest pencil eigenvalue of `(D, H)` divided by the weight.
    pub c_sharp: f64,
    /// Smallest normalized constant seen along the trajectories.
    pub c_empirical: f64,
    pub worst_margin: f64,
    pub trajectories: usize,
    pub monotone: bool,
    pub pass: bool,
}

/// Runs [`lyapunov_monitor`] on RK4 trajectories from random states and
/// from the worst-case eigenvector at every sampled frequency.
pub fn monitor_sweep(l: &LyapunovFunctional, sys: &SystemSpec, exponent: u32, opts: &MonitorOptions) -> Result<Vec<MonitorRow>> {
    opts.xi_samples
        .par_iter()
        .enumerate()
        .map(|(i, &xi)| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(i as u64));
            let w = regime_weight(l.regime, xi, exponent);
            let (lambda, worst) = l.decay_constant(sys, xi)?;
            let mut starts: Vec<CVec> = (0..opts.states).map(|_| random_state(&mut rng, sys.n)).collect();
            let nw = worst.norm();
            starts.push(if nw > 0.0 { worst / C64::new(nw, 0.0) } else { random_state(&mut rng, sys.n) });
            let dt = step_bound(sys, xi);
            let mut c = lambda / w;
            let mut margin = f64::INFINITY;
            let mut monotone = true;
            for u0 in &starts {
                let traj = integrate_mode_sampled(sys, xi, u0, dt * opts.steps as f64, dt, 1)?;
                let r = lyapunov_monitor(l, sys, &traj, exponent)?;
                c = c.min(r.c_empirical);
                margin = margin.min(r.worst_margin);
                monotone &= r.monotone;
            }
            Ok(MonitorRow {
                xi,
                weight: w,
                c_sharp: lambda / w,
                c_empirical: c,
                worst_margin: margin,
                trajectories: starts.len(),
                monotone,
                pass: monotone && c > 0.0,
            })
        })
        .collect()
}
