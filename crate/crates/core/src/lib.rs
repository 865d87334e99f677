//! Loss-tolerant Wigner-function tomography through phase-sensitive
//! parametric amplification.
//!
//! The crate simulates the measurement chain (state preparation, loss,
//! amplification, detection) shot by shot and reconstructs the input Wigner
//! function from detected photon numbers by the amplified-quadrature change of
//! variables followed by filtered backprojection.
//!
//! Numerical modules are generic over [`Real`] (`f32`/`f64`); the aliases at
//! the crate root fix the scalar for the common cases.

// `!(x > 0.0)` is used deliberately throughout so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod detection;
pub mod error;
pub mod experiment;
pub mod io;
pub mod metrics;
pub mod opa;
pub mod phase_space;
pub mod plot;
pub mod reconstruction;
pub mod rng;
pub mod scalar;
pub mod workflow;

pub use error::{Error, Result};
pub use scalar::Real;

pub type GaussianState64 = phase_space::GaussianState<f64>;
pub type GaussianState32 = phase_space::GaussianState<f32>;
pub type WignerGrid64 = phase_space::WignerGrid<f64>;
pub type WignerGrid32 = phase_space::WignerGrid<f32>;
pub type StateSpec64 = phase_space::StateSpec<f64>;
