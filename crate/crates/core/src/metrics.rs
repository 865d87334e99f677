//! Figures of merit: squeezing, purity, fidelity and effective mode number.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::phase_space::{wigner_value, StateSpec, WignerGrid, VACUUM_VARIANCE};
use crate::scalar::Real;

/// Allowed excess of a purity estimate over one before it is flagged.
pub const PURITY_TOLERANCE: f64 = 1e-3;
/// Fidelities are clipped to `[0, 1 + FIDELITY_TOLERANCE]`.
pub const FIDELITY_TOLERANCE: f64 = 1e-2;
/// Allowed deviation of `∬W` from one for grid metrics.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-3;
/// Minimum records for the mode-number estimator.
pub const MIN_MODE_RECORDS: usize = 1000;

/// `10 log₁₀(ratio)`.
pub fn squeezing_db<T: Real>(ratio: T) -> Result<T> {
    if !(ratio > T::zero()) || !ratio.is_finite() {
        return Err(Error::invalid(
            "ratio",
            format!("must be positive and finite, got {ratio}"),
        ));
    }
    Ok(T::lit(10.0) * ratio.log10())
}

/// A purity or fidelity value with a flag for results outside the physical
/// range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate<T> {
    pub value: T,
    pub unphysical: bool,
}

/// Gaussian purity `Δ²x_vac / (Δx₀ Δx_{π/2})` from principal-axis standard
/// deviations.
pub fn purity_gaussian<T: Real>(delta_x0: T, delta_x_pi2: T) -> Result<Estimate<T>> {
    if !(delta_x0 > T::zero()) || !(delta_x_pi2 > T::zero()) {
        return Err(Error::invalid("delta_x", "standard deviations must be positive"));
    }
    let value = T::lit(VACUUM_VARIANCE) / (delta_x0 * delta_x_pi2);
    Ok(Estimate {
        value,
        unphysical: value > T::one() + T::lit(PURITY_TOLERANCE),
    })
}

fn check_normalized<T: Real>(w: &WignerGrid<T>) -> Result<()> {
    let integral = w.integral();
    if (integral - T::one()).abs() > T::lit(NORMALIZATION_TOLERANCE) {
        return Err(Error::NotNormalized {
            integral: integral.as_f64(),
        });
    }
    Ok(())
}

/// `Tr ρ² = π ∬ W²`.
pub fn purity_grid<T: Real>(w: &WignerGrid<T>) -> Result<T> {
    check_normalized(w)?;
    Ok(T::PI() * w.integral_of_square())
}

/// Target Wigner function tabulated on the nodes of `like`. Fails if the
/// target has more than [`NORMALIZATION_TOLERANCE`] of its mass outside.
fn target_on<T: Real>(like: &WignerGrid<T>, target: &StateSpec<T>) -> Result<WignerGrid<T>> {
    target.validate()?;
    let grid = WignerGrid::tabulate(like.nx(), like.np(), like.extent(), |x, p| wigner_value(target, x, p))?;
    let outside = T::one() - grid.integral();
    if outside.abs() > T::lit(NORMALIZATION_TOLERANCE) {
        return Err(Error::ExtentTooSmall {
            mass_outside: outside.as_f64(),
        });
    }
    Ok(grid)
}

/// `π ∬ W_a W_b`, with `b` resampled bilinearly onto `a`'s nodes when the
/// grids differ.
pub fn grid_overlap<T: Real>(a: &WignerGrid<T>, b: &WignerGrid<T>) -> Result<T> {
    let same = a.nx() == b.nx() && a.np() == b.np() && a.extent() == b.extent();
    let ov = if same {
        a.overlap(b)?
    } else {
        let resampled = WignerGrid::tabulate(a.nx(), a.np(), a.extent(), |x, p| b.value_at(x, p))?;
        a.overlap(&resampled)?
    };
    Ok(T::PI() * ov)
}

/// Fidelity to a pure target, `Tr(ρσ) = π ∬ W_rec W_target`. Clipped to
/// `[0, 1 + 10⁻²]`; values above one are flagged.
pub fn fidelity_to_pure<T: Real>(w_rec: &WignerGrid<T>, target: &StateSpec<T>) -> Result<Estimate<T>> {
    check_normalized(w_rec)?;
    let tgt = target_on(w_rec, target)?;
    let raw = grid_overlap(w_rec, &tgt)?;
    Ok(clip_fidelity(raw))
}

/// Overlap normalized by both purities, `Tr(ρσ)/√(Tr ρ² Tr σ²)`. Equals the
/// fidelity for pure states and is insensitive to a global admixture of
/// mixedness in the reconstruction.
pub fn normalized_overlap<T: Real>(w_rec: &WignerGrid<T>, target: &StateSpec<T>) -> Result<Estimate<T>> {
    check_normalized(w_rec)?;
    let tgt = target_on(w_rec, target)?;
    let raw = grid_overlap(w_rec, &tgt)?;
    let p_rec = T::PI() * w_rec.integral_of_square();
    let p_tgt = T::PI() * tgt.integral_of_square();
    if !(p_rec > T::zero()) {
        return Err(Error::Degenerate("reconstruction has zero purity".into()));
    }
    Ok(clip_fidelity(raw / (p_rec * p_tgt).sqrt()))
}

fn clip_fidelity<T: Real>(raw: T) -> Estimate<T> {
    let hi = T::one() + T::lit(FIDELITY_TOLERANCE);
    Estimate {
        value: raw.max(T::zero()).min(hi),
        unphysical: raw > T::one(),
    }
}

/// Photon-number statistics summarized by the effective mode number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeFit<T> {
    /// `μ = 2⟨N⟩²/Var(N)`.
    pub mu: T,
    pub mean: T,
    pub variance: T,
}

impl<T: Real> ModeFit<T> {
    /// Shape `μ/2` of the matching gamma density.
    pub fn shape(&self) -> T {
        self.mu * T::lit(0.5)
    }

    /// Scale of the gamma density, chosen to preserve the mean.
    pub fn scale(&self) -> T {
        self.mean / self.shape()
    }

    /// Gamma density with shape `μ/2` and the fitted mean, evaluated at `n`.
    pub fn density(&self, n: T) -> T {
        if !(n > T::zero()) {
            return T::zero();
        }
        let k = self.shape().as_f64();
        let th = self.scale().as_f64();
        let v = n.as_f64();
        T::lit(((k - 1.0) * v.ln() - v / th - ln_gamma(k) - k * th.ln()).exp())
    }
}

/// Moment estimator of the effective mode number for amplified-vacuum-like,
/// dark-corrected photon numbers. One mode gives `χ²₁` statistics (`μ = 1`).
pub fn fit_mode_number<T: Real>(records: &[T]) -> Result<ModeFit<T>> {
    if records.len() < MIN_MODE_RECORDS {
        return Err(Error::invalid(
            "records",
            format!("need at least {MIN_MODE_RECORDS}, got {}", records.len()),
        ));
    }
    let n = records.len() as f64;
    let mean = records.iter().map(|v| v.as_f64()).sum::<f64>() / n;
    let variance = records.iter().map(|v| (v.as_f64() - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if !(variance > 0.0) {
        return Err(Error::Degenerate("photon-number variance is zero".into()));
    }
    Ok(ModeFit {
        mu: T::lit(2.0 * mean * mean / variance),
        mean: T::lit(mean),
        variance: T::lit(variance),
    })
}

/// Summary of a reconstructed state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateMetrics {
    /// From the variance-curve fit at the squeezed quadrature.
    pub squeezing_db: f64,
    pub antisqueezing_db: f64,
    /// Standard deviations of the reconstructed marginals.
    pub delta_x0: f64,
    pub delta_x_pi2: f64,
    /// `Δ²x_vac/(Δx₀ Δx_{π/2})`.
    pub purity: f64,
    /// `π ∬ W²` of the reconstructed grid.
    pub purity_grid: f64,
    /// Normalized overlap with the target state.
    pub fidelity: f64,
    /// Plain overlap `π ∬ W_rec W_target`.
    pub overlap: f64,
    /// `None` without enough vacuum records.
    pub mode_number: Option<f64>,
    pub unphysical: bool,
}

impl StateMetrics {
    pub fn fields(&self) -> [(&'static str, String); 10] {
        [
            ("squeezing_db", fmt(self.squeezing_db)),
            ("antisqueezing_db", fmt(self.antisqueezing_db)),
            ("delta_x0", fmt(self.delta_x0)),
            ("delta_x_pi2", fmt(self.delta_x_pi2)),
            ("purity", fmt(self.purity)),
            ("purity_grid", fmt(self.purity_grid)),
            ("fidelity", fmt(self.fidelity)),
            ("overlap", fmt(self.overlap)),
            ("mode_number", self.mode_number.map_or_else(|| "n/a".to_string(), fmt)),
            ("unphysical", self.unphysical.to_string()),
        ]
    }

    /// One `key=value` per line.
    pub fn to_report(&self) -> String {
        self.fields().iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// Single line of space-separated `key=value` pairs.
    pub fn to_line(&self) -> String {
        self.fields()
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::{apply_loss_to_grid, build_wigner_grid, Extent, GaussianState};
    use crate::rng::StreamFactory;
    use rand::Rng;
    use rand_distr::StandardNormal;
    use std::f64::consts::FRAC_PI_2;

    fn grid(spec: &StateSpec<f64>) -> WignerGrid<f64> {
        build_wigner_grid(spec, 201, 201, Extent::square(4.0)).unwrap()
    }

    fn chi2(modes: usize, n: usize, seed: u64) -> Vec<f64> {
        let f = StreamFactory::new(seed);
        (0..n as u64)
            .map(|i| {
                let mut r = f.stream(0, 0, i);
                (0..modes)
                    .map(|_| r.sample::<f64, _>(StandardNormal).powi(2))
                    .sum::<f64>()
                    * 50.0
            })
            .collect()
    }

    #[test]
    fn squeezing_examples() {
        assert_eq!(squeezing_db(1.0_f64).unwrap(), 0.0);
        assert!((squeezing_db(12.8_f64 / 73.0).unwrap() + 7.56).abs() < 0.005);
        assert!((squeezing_db(511.0_f64 / 73.0).unwrap() - 8.45).abs() < 0.005);
        assert!(squeezing_db(0.0).is_err());
        assert!(squeezing_db(-1.0).is_err());
    }

    #[test]
    fn purity_gaussian_examples() {
        assert!((purity_gaussian(0.5_f64, 0.5).unwrap().value - 1.0).abs() < 1e-12);
        assert!((purity_gaussian(1.30_f64, 0.21).unwrap().value - 0.916).abs() < 1e-3);
        assert!((purity_gaussian(1.324_f64, 0.2158).unwrap().value - 0.875).abs() < 1e-3);
        assert!(purity_gaussian(0.4, 0.4).unwrap().unphysical);
    }

    #[test]
    fn purity_grid_examples() {
        assert!((purity_grid(&grid(&StateSpec::Vacuum)).unwrap() - 1.0).abs() < 0.01);
        assert!((purity_grid(&grid(&StateSpec::Fock { n: 1 })).unwrap() - 1.0).abs() < 0.02);
        let sv = StateSpec::SqueezedVacuum {
            g_sq: 1.0,
            squeeze_angle: FRAC_PI_2,
        };
        let g = build_wigner_grid(&sv, 301, 301, Extent::square(6.0)).unwrap();
        let lossy = apply_loss_to_grid(&g, 0.941).unwrap();
        let oracle = GaussianState::squeezed_vacuum(1.0, FRAC_PI_2)
            .unwrap()
            .apply_loss(0.941)
            .unwrap()
            .purity();
        assert!((purity_grid(&lossy).unwrap() - oracle).abs() < 0.02);
        assert!((oracle - 0.875).abs() < 0.002);
    }

    #[test]
    fn purity_grid_rejects_unnormalized() {
        let g = grid(&StateSpec::Vacuum);
        let scaled =
            WignerGrid::from_values(g.nx(), g.np(), g.extent(), g.values().iter().map(|v| v * 2.0).collect()).unwrap();
        assert!(matches!(purity_grid(&scaled), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn fidelity_examples() {
        let vac = grid(&StateSpec::Vacuum);
        assert!((fidelity_to_pure(&vac, &StateSpec::Vacuum).unwrap().value - 1.0).abs() < 0.005);
        assert!(fidelity_to_pure(&vac, &StateSpec::Fock { n: 1 }).unwrap().value.abs() < 0.01);
    }

    #[test]
    fn fidelity_matches_gaussian_overlap_oracle() {
        // Tr(ρσ) for Gaussians: 1 / (2 √det(V₁ + V₂)) in vacuum-variance-1/4 units
        let sv = StateSpec::SqueezedVacuum {
            g_sq: 1.0,
            squeeze_angle: FRAC_PI_2,
        };
        let lossy_state = GaussianState::squeezed_vacuum(1.0, FRAC_PI_2)
            .unwrap()
            .apply_loss(0.941)
            .unwrap();
        let ideal = GaussianState::squeezed_vacuum(1.0, FRAC_PI_2).unwrap();
        let (a, b) = (lossy_state.cov(), ideal.cov());
        let sum = [
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ];
        let det = sum[0][0] * sum[1][1] - sum[0][1] * sum[1][0];
        let oracle = 1.0 / (2.0 * det.sqrt());
        let g = build_wigner_grid(&sv, 301, 301, Extent::square(6.0)).unwrap();
        let lossy = apply_loss_to_grid(&g, 0.941).unwrap();
        let f = fidelity_to_pure(&lossy, &sv).unwrap().value;
        assert!((f - oracle).abs() < 2e-3, "{f} vs {oracle}");
        let norm = normalized_overlap(&lossy, &sv).unwrap().value;
        assert!((norm - oracle / lossy_state.purity().sqrt()).abs() < 3e-3);
    }

    #[test]
    fn fidelity_requires_support() {
        let small = build_wigner_grid(&StateSpec::Vacuum, 101, 101, Extent::square(2.0)).unwrap();
        let wide = StateSpec::SqueezedVacuum {
            g_sq: 1.5,
            squeeze_angle: FRAC_PI_2,
        };
        assert!(matches!(
            fidelity_to_pure(&small, &wide),
            Err(Error::ExtentTooSmall { .. })
        ));
    }

    #[test]
    fn mode_number_chi_squared_oracle() {
        assert!((fit_mode_number(&chi2(1, 8000, 1)).unwrap().mu - 1.0).abs() < 0.1);
        assert!((fit_mode_number(&chi2(2, 8000, 2)).unwrap().mu - 2.0).abs() < 0.15);
        assert!(fit_mode_number(&[1.0; 2000]).is_err());
        assert!(fit_mode_number(&[1.0; 10]).is_err());
    }

    #[test]
    fn gamma_density_integrates_to_one() {
        let fit = ModeFit {
            mu: 1.2,
            mean: 73.0,
            variance: 2.0 * 73.0 * 73.0 / 1.2,
        };
        let h = 0.01;
        let total: f64 = (1..200_000).map(|k| fit.density(k as f64 * h) * h).sum();
        assert!((total - 1.0).abs() < 0.01, "{total}");
    }

    #[test]
    fn report_is_key_value() {
        let m = StateMetrics {
            squeezing_db: -7.3,
            antisqueezing_db: 8.46,
            delta_x0: 1.32,
            delta_x_pi2: 0.216,
            purity: 0.875,
            purity_grid: 0.87,
            fidelity: 0.993,
            overlap: 0.929,
            mode_number: Some(1.0),
            unphysical: false,
        };
        let r = m.to_report();
        assert_eq!(r.lines().count(), 10);
        assert!(r.contains("squeezing_db=-7.300000\n"));
        assert!(!m.to_line().contains('\n'));
    }
}
