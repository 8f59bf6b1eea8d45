//! Decay-rate certification for one-dimensional partially dissipative
//! hyperbolic systems `∂ₜU + A∂ₓU + BᵃU + BˢU = 0`.

// Negated float comparisons are used on purpose so that NaN fails the test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod kalman;
pub mod lyapunov;
pub mod polymat;
pub mod report;
pub mod sysfile;
pub mod tree;
pub mod verify;
pub mod zoo;

pub use error::{Error, Result};
