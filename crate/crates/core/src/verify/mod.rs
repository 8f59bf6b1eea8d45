//! Numerical verification: σ_min sampling, spectral rates, slope fits,
//! Fourier-mode integration and Lyapunov-inequality monitoring.

pub mod fit;
pub mod integrate;
pub mod linalg;
pub mod monitor;
pub mod spectral;

pub use fit::{fit_hf_exponent, fit_lf_exponent, fit_loglog, SlopeFit, SpectralExponent, SPECTRAL_SWEEP};
pub use integrate::{
    decay_fit, integrate_mode, integrate_mode_sampled, propagate_mode, propagator, step_bound, symbol, Propagation,
    Trajectory,
};
pub use linalg::{smin_exact, smin_oracle};
pub use monitor::{lyapunov_monitor, monitor_sweep, regime_weight, MonitorOptions, MonitorReport, MonitorRow};
pub use spectral::{rate_exact, spectral_rate, SpectralSample};
