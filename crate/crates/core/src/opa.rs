//! Phase-sensitive parametric amplification.
//!
//! An amplifier with squeezing parameter `G` scales the quadrature `x_θ` by
//! `e^G` and its conjugate `p_θ` by `e^{-G}`. The photon number behind it is
//! `N = e^{2G} x_θ² + e^{-2G} p_θ² − 1/2`; for large enough `G` only the first
//! term matters, `N ≈ e^{2G} x_θ²`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase_space::{quadrature_axis, Extent, GaussianState, WignerGrid};
use crate::scalar::Real;

/// Smallest `G − G_sq` for which the amplified quadrature dominates the
/// photon number for every phase.
pub const SUFFICIENT_MARGIN: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpaParams<T> {
    /// Squeezing parameter `G >= 0` of the amplifier.
    pub gain: T,
    /// Angle of the amplified quadrature, radians.
    #[serde(default)]
    pub theta: T,
    /// Keep the de-amplified quadrature and the vacuum offset in `N`.
    #[serde(default = "default_exact")]
    pub exact_model: bool,
}

fn default_exact() -> bool {
    true
}

impl<T: Real> OpaParams<T> {
    pub fn new(gain: T, theta: T, exact_model: bool) -> Result<Self> {
        let p = Self {
            gain,
            theta,
            exact_model,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gain >= T::zero()) || !self.gain.is_finite() {
            return Err(Error::invalid(
                "gain",
                format!("must be finite and >= 0, got {}", self.gain),
            ));
        }
        Ok(())
    }

    pub fn at_phase(&self, theta: T) -> Self {
        Self { theta, ..*self }
    }

    /// Intensity gain `e^{2G}` of the amplified quadrature.
    pub fn power_gain(&self) -> T {
        (T::lit(2.0) * self.gain).exp()
    }
}

/// Outcome of the amplification-sufficiency check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SufficiencyReport<T> {
    /// `G − G_sq`.
    pub margin: T,
    /// `margin >= 1.5`.
    pub sufficient: bool,
    /// `e^{-4(G − G_sq)}`: worst-case weight of the de-amplified quadrature in `⟨N⟩`.
    pub residual_ratio: T,
}

pub fn check_sufficiency<T: Real>(gain: T, g_sq: T) -> SufficiencyReport<T> {
    let margin = gain - g_sq;
    SufficiencyReport {
        margin,
        sufficient: margin >= T::lit(SUFFICIENT_MARGIN),
        residual_ratio: (-T::lit(4.0) * margin).exp().min(T::one()),
    }
}

/// Photon number behind the amplifier for input quadratures `(x_θ, p_θ)`.
///
/// The exact form is clamped at zero: a detected intensity cannot be negative.
pub fn amplified_photon_number<T: Real>(x_theta: T, p_theta: T, params: &OpaParams<T>) -> T {
    let amp = params.power_gain();
    if params.exact_model {
        let n = amp * x_theta * x_theta + p_theta * p_theta / amp - T::lit(0.5);
        n.max(T::zero())
    } else {
        amp * x_theta * x_theta
    }
}

/// `⟨N_θ⟩` for a zero-mean Gaussian input (no clamping).
pub fn mean_photon_number<T: Real>(state: &GaussianState<T>, params: &OpaParams<T>) -> T {
    let amp = params.power_gain();
    let vx = state.quadrature_variance(params.theta);
    if params.exact_model {
        let vp = state.quadrature_variance(params.theta + T::FRAC_PI_2());
        amp * vx + vp / amp - T::lit(0.5)
    } else {
        amp * vx
    }
}

/// Gaussian state after ideal phase-sensitive amplification.
pub fn amplify_gaussian<T: Real>(state: &GaussianState<T>, params: &OpaParams<T>) -> GaussianState<T> {
    let rc = state.rotated_cov(params.theta);
    let g = params.gain.exp();
    // scale (x_θ, p_θ) by (e^G, e^{-G}) and rotate back
    let scaled = [[rc[0][0] * g * g, rc[0][1]], [rc[0][1], rc[1][1] / (g * g)]];
    let (c, s) = quadrature_axis(params.theta);
    // R scaled Rᵀ with R = [[c, -s], [s, c]]
    let a = scaled[0][0];
    let b = scaled[0][1];
    let d = scaled[1][1];
    let xx = c * c * a - T::lit(2.0) * c * s * b + s * s * d;
    let pp = s * s * a + T::lit(2.0) * c * s * b + c * c * d;
    let xp = c * s * (a - d) + (c * c - s * s) * b;
    GaussianState::from_cov([[xx, xp], [xp, pp]]).unwrap_or(*state)
}

/// Wigner function after amplification, `W_out(r) = W_in(S⁻¹ r)`, tabulated
/// on `extent` (the output is stretched by `e^G` along `x_θ`).
pub fn amplify_grid<T: Real>(
    input: &WignerGrid<T>,
    params: &OpaParams<T>,
    nx: usize,
    np: usize,
    extent: Extent<T>,
) -> Result<WignerGrid<T>> {
    let (c, s) = quadrature_axis(params.theta);
    let g = params.gain.exp();
    WignerGrid::tabulate(nx, np, extent, |x, p| {
        let a = (x * c + p * s) / g;
        let b = (-x * s + p * c) * g;
        input.value_at(a * c - b * s, a * s + b * c)
    })?
    .normalized()
}
