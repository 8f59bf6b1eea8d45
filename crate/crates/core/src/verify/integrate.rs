//! Time integration of a single Fourier mode `Û' = −(iξA + Bᵃ + Bˢ)Û`.

use serde::Serialize;

use super::linalg::{norm2, rat_to_cmat, CMat, CVec, C64};
use crate::error::{Error, Result};
use crate::kalman::SystemSpec;

/// How a trajectory was produced.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Propagation {
    /// Classical fourth-order Runge–Kutta with fixed step.
    Rk4 { dt: f64 },
    /// Repeated application of the exact propagator `exp(−G·Δt)`.
    Exponential { dt: f64 },
}

/// Sampled solution of one Fourier mode.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub xi: f64,
    pub times: Vec<f64>,
    pub states: Vec<CVec>,
    pub method: Propagation,
}

/// The symbol `G = iξA + Bᵃ + Bˢ`.
pub fn symbol(sys: &SystemSpec, xi: f64) -> CMat {
    rat_to_cmat(&sys.a) * C64::new(0.0, xi) + rat_to_cmat(&sys.b())
}

/// Largest admissible RK4 step `0.01/(1 + |ξ|‖A‖ + ‖B‖)`.
pub fn step_bound(sys: &SystemSpec, xi: f64) -> f64 {
    0.01 / (1.0 + xi.abs() * norm2(&rat_to_cmat(&sys.a)) + norm2(&rat_to_cmat(&sys.b())))
}

fn rk4_step(g: &CMat, u: &CVec, dt: f64) -> CVec {
    let h = C64::new(dt, 0.0);
    let half = C64::new(dt / 2.0, 0.0);
    let k1 = -(g * u);
    let k2 = -(g * (u + &k1 * half));
    let k3 = -(g * (u + &k2 * half));
    let k4 = -(g * (u + &k3 * h));
    u + (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0)
}

/// RK4 trajectory on `[0, t_end]` keeping every `stride`-th state (the final
/// state is always kept).
pub fn integrate_mode_sampled(sys: &SystemSpec, xi: f64, u0: &CVec, t_end: f64, dt: f64, stride: usize) -> Result<Trajectory> {
    let max = step_bound(sys, xi);
    if !(dt > 0.0) || dt > max {
        return Err(Error::StepTooLarge { dt, max });
    }
    let g = symbol(sys, xi);
    let steps = (t_end / dt).round().max(1.0) as usize;
    let stride = stride.max(1);
    let mut u = u0.clone();
    let mut times = vec![0.0];
    let mut states = vec![u.clone()];
    for s in 1..=steps {
        u = rk4_step(&g, &u, dt);
        if s % stride == 0 || s == steps {
            times.push(s as f64 * dt);
            states.push(u.clone());
        }
    }
    Ok(Trajectory { xi, times, states, method: Propagation::Rk4 { dt } })
}

/// RK4 trajectory keeping every step.
pub fn integrate_mode(sys: &SystemSpec, xi: f64, u0: &CVec, t_end: f64, dt: f64) -> Result<Trajectory> {
    integrate_mode_sampled(sys, xi, u0, t_end, dt, 1)
}

/// Exact propagator `exp(−Gt)`.
pub fn propagator(sys: &SystemSpec, xi: f64, t: f64) -> CMat {
    (symbol(sys, xi) * C64::new(-t, 0.0)).exp()
}

/// Trajectory sampled at `samples + 1` equispaced times by the exact
/// propagator; usable on horizons far beyond what RK4 can afford.
pub fn propagate_mode(sys: &SystemSpec, xi: f64, u0: &CVec, t_end: f64, samples: usize) -> Trajectory {
    let dt = t_end / samples as f64;
    let p = propagator(sys, xi, dt);
    let mut u = u0.clone();
    let mut times = vec![0.0];
    let mut states = vec![u.clone()];
    for s in 1..=samples {
        u = &p * &u;
        times.push(s as f64 * dt);
        states.push(u.clone());
    }
    Trajectory { xi, times, states, method: Propagation::Exponential { dt } }
}

/// Decay rate fitted as minus the least-squares slope of `ln|U(t)|` over
/// the second half of the trajectory.
pub fn decay_fit(traj: &Trajectory) -> Result<f64> {
    let first = traj.states.first().map_or(0.0, |u| u.norm());
    let last = traj.states.last().map_or(0.0, |u| u.norm());
    let ratio = last / first;
    if !(ratio <= 1e-3) {
        return Err(Error::InsufficientDecay { ratio });
    }
    let t_end = *traj.times.last().expect("nonempty trajectory");
    let pts: Vec<(f64, f64)> = traj
        .times
        .iter()
        .zip(&traj.states)
        .filter(|(t, _)| **t >= t_end / 2.0)
        .map(|(t, u)| (*t, u.norm().ln()))
        .collect();
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sty: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let stt: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    Ok(-sty / stt)
}
