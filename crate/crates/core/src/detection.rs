//! Everything after the amplifier: multimode admixture, loss, dark noise.
//!
//! Post-amplification loss only rescales photon numbers, so the normalized
//! shape of the photon-number distribution is unchanged by it.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Post-amplification transmission reproducing `⟨N_vac⟩ ≈ 73` at `G = 4.4`.
pub const REFERENCE_ETA_DET: f64 = 0.044;
pub const REFERENCE_DARK_MEAN: f64 = 2.0;
pub const REFERENCE_DARK_STD: f64 = 1.0;
/// Effective mode number reported for the filtered squeezed vacuum.
pub const REFERENCE_MODE_NUMBER: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel<T> {
    /// Post-amplification transmission times quantum efficiency, in (0, 1].
    pub eta_det: T,
    /// Additive Gaussian read-out noise, photons per pulse.
    pub dark_mean: T,
    pub dark_std: T,
    #[serde(default = "default_clamp")]
    pub clamp_negative: bool,
}

fn default_clamp() -> bool {
    true
}

impl<T: Real> DetectorModel<T> {
    pub fn ideal() -> Self {
        Self {
            eta_det: T::one(),
            dark_mean: T::zero(),
            dark_std: T::zero(),
            clamp_negative: true,
        }
    }

    pub fn reference() -> Self {
        Self {
            eta_det: T::lit(REFERENCE_ETA_DET),
            dark_mean: T::lit(REFERENCE_DARK_MEAN),
            dark_std: T::lit(REFERENCE_DARK_STD),
            clamp_negative: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta_det > T::zero() && self.eta_det <= T::one()) {
            return Err(Error::invalid(
                "eta_det",
                format!("must lie in (0, 1], got {}", self.eta_det),
            ));
        }
        if !(self.dark_std >= T::zero()) || !self.dark_mean.is_finite() {
            return Err(Error::invalid("dark", "dark_std must be >= 0 and dark_mean finite"));
        }
        Ok(())
    }
}

/// Detected photon number `η·N + g`, `g ~ normal(dark_mean, dark_std²)`.
pub fn detect<T: Real, R: Rng + ?Sized>(n_true: T, det: &DetectorModel<T>, rng: &mut R) -> T {
    let noise = if det.dark_std > T::zero() {
        det.dark_mean + det.dark_std * T::lit(rng.sample::<f64, _>(StandardNormal))
    } else {
        det.dark_mean
    };
    let n = det.eta_det * n_true + noise;
    if det.clamp_negative {
        n.max(T::zero())
    } else {
        n
    }
}

/// Incoherent admixture of a secondary amplified-vacuum mode carrying a
/// fraction `secondary_fraction` of the primary mode's vacuum power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeModel<T> {
    pub secondary_fraction: T,
}

impl<T: Real> Default for ModeModel<T> {
    fn default() -> Self {
        Self::single()
    }
}

impl<T: Real> ModeModel<T> {
    pub fn single() -> Self {
        Self {
            secondary_fraction: T::zero(),
        }
    }

    /// The admixture whose amplified vacuum has moment mode number `mu ∈ [1, 2]`:
    /// solves `(1+f)²/(1+f²) = mu` for `f ∈ [0, 1]`.
    pub fn from_mode_number(mu: T) -> Result<Self> {
        let one = T::one();
        if !(mu >= one && mu <= T::lit(2.0)) {
            return Err(Error::invalid(
                "mu",
                format!("mode number must lie in [1, 2], got {mu}"),
            ));
        }
        let excess = mu - one;
        let f = if excess == T::zero() {
            T::zero()
        } else {
            (one - (one - excess * excess).max(T::zero()).sqrt()) / excess
        };
        Ok(Self { secondary_fraction: f })
    }

    /// Moment mode number `2⟨N⟩²/Var(N)` of amplified vacuum with this admixture.
    pub fn mode_number(&self) -> T {
        let f = self.secondary_fraction;
        let one = T::one();
        (one + f) * (one + f) / (one + f * f)
    }

    pub fn validate(&self) -> Result<()> {
        let f = self.secondary_fraction;
        if !(f >= T::zero() && f <= T::one()) {
            return Err(Error::invalid(
                "secondary_fraction",
                format!("must lie in [0, 1], got {f}"),
            ));
        }
        Ok(())
    }
}

/// Add the secondary mode's amplified-vacuum photon number,
/// `f · vacuum_scale · z²` with `z ~ normal(0, 1)`; `vacuum_scale` is that
/// mode's amplified-vacuum mean.
pub fn admix_modes<T: Real, R: Rng + ?Sized>(n_primary: T, mode: &ModeModel<T>, rng: &mut R, vacuum_scale: T) -> T {
    if mode.secondary_fraction == T::zero() {
        return n_primary;
    }
    let z = T::lit(rng.sample::<f64, _>(StandardNormal));
    n_primary + mode.secondary_fraction * vacuum_scale * z * z
}
