//! Phase dependence of the quadrature variance.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VariancePoint<T> {
    pub phase: T,
    /// `Var(x_θ)/Var(x_vac)`.
    pub ratio: T,
    /// Standard error of `ratio` from the spread of the shots at this phase;
    /// zero if unknown.
    pub ratio_err: T,
}

/// Least-squares fit `ratio(θ) = a cos²θ + d` with standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceFit<T> {
    pub a: T,
    pub d: T,
    pub a_err: T,
    pub d_err: T,
}

impl<T: Real> VarianceFit<T> {
    pub fn predict(&self, phase: T) -> T {
        let c = phase.cos();
        self.a * c * c + self.d
    }

    /// Ratio at θ = π/2 (the squeezed quadrature for the default geometry).
    pub fn min_ratio(&self) -> T {
        self.d
    }

    /// Ratio at θ = 0.
    pub fn max_ratio(&self) -> T {
        self.a + self.d
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceCurve<T> {
    pub points: Vec<VariancePoint<T>>,
    pub fit: VarianceFit<T>,
}

/// Variance ratios from mean photon numbers. Behind a strong amplifier
/// `⟨N_θ⟩ ∝ Var(x_θ)`, so the dark-corrected ratio to the amplified vacuum
/// is the variance in vacuum units. Fitted by ordinary least squares.
pub fn variance_curve<T: Real>(phases: &[T], means: &[T], vacuum_mean: T, dark_mean: T) -> Result<VarianceCurve<T>> {
    let zeros = vec![T::zero(); means.len()];
    variance_curve_weighted(phases, means, &zeros, vacuum_mean, dark_mean)
}

/// As [`variance_curve`], with the standard errors of the means. The fit is
/// weighted by the inverse squared ratio errors, which keeps the precise
/// low-variance phases from being swamped by the noisy anti-squeezed ones.
pub fn variance_curve_weighted<T: Real>(
    phases: &[T],
    means: &[T],
    mean_errors: &[T],
    vacuum_mean: T,
    dark_mean: T,
) -> Result<VarianceCurve<T>> {
    if phases.len() != means.len() || phases.len() != mean_errors.len() {
        return Err(Error::invalid("means", "one mean and error per phase required"));
    }
    if phases.len() < 3 {
        return Err(Error::InsufficientCoverage(format!(
            "variance fit needs at least 3 phases, got {}",
            phases.len()
        )));
    }
    let vac = vacuum_mean - dark_mean;
    if !(vac > T::zero()) {
        return Err(Error::invalid("vacuum_mean", "must exceed the dark mean"));
    }
    let points: Vec<VariancePoint<T>> = phases
        .iter()
        .zip(means)
        .zip(mean_errors)
        .map(|((&phase, &m), &e)| VariancePoint {
            phase,
            ratio: (m - dark_mean) / vac,
            ratio_err: e / vac,
        })
        .collect();
    let fit = fit_cos2(&points)?;
    Ok(VarianceCurve { points, fit })
}

/// Least squares in `c = cos²θ`, weighted by `1/ratio_err²` when every point
/// carries a positive error and unweighted otherwise. Parameter errors are
/// scaled by the reduced residual sum of squares.
pub fn fit_cos2<T: Real>(points: &[VariancePoint<T>]) -> Result<VarianceFit<T>> {
    if points.len() < 3 {
        return Err(Error::InsufficientCoverage(
            "variance fit needs at least 3 phases".into(),
        ));
    }
    let weighted = points.iter().all(|p| p.ratio_err > T::zero());
    let w = |p: &VariancePoint<T>| {
        if weighted {
            T::one() / (p.ratio_err * p.ratio_err)
        } else {
            T::one()
        }
    };
    let (mut s, mut sx, mut sy, mut sxx, mut sxy) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    for p in points {
        let c = p.phase.cos().powi(2);
        let wk = w(p);
        s = s + wk;
        sx = sx + wk * c;
        sy = sy + wk * p.ratio;
        sxx = sxx + wk * c * c;
        sxy = sxy + wk * c * p.ratio;
    }
    let delta = s * sxx - sx * sx;
    if !(delta > T::lit(1e-12) * s * s) {
        return Err(Error::Degenerate("all phases share the same cos²θ".into()));
    }
    let a = (s * sxy - sx * sy) / delta;
    let d = (sxx * sy - sx * sxy) / delta;
    let chi2: T = points
        .iter()
        .map(|p| {
            let r = p.ratio - (a * p.phase.cos().powi(2) + d);
            w(p) * r * r
        })
        .sum();
    let reduced = chi2 / (T::from_usize_lossy(points.len()) - T::lit(2.0));
    Ok(VarianceFit {
        a,
        d,
        a_err: (s / delta * reduced).sqrt(),
        d_err: (sxx / delta * reduced).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::squeezing_db;
    use crate::phase_space::GaussianState;
    use std::f64::consts::FRAC_PI_2;

    fn reference_phases() -> Vec<f64> {
        (0..19).map(|k| k as f64 * FRAC_PI_2 / 18.0).collect()
    }

    #[test]
    fn reference_means() {
        let c = variance_curve(&[0.0, FRAC_PI_2 / 2.0, FRAC_PI_2], &[511.0, 261.9, 12.8], 73.0, 0.0).unwrap();
        assert!((c.points[0].ratio - 7.0).abs() < 1e-3);
        assert!((squeezing_db(c.points[0].ratio).unwrap() - 8.45).abs() < 0.01);
        assert!((squeezing_db(c.points[2].ratio).unwrap() + 7.56).abs() < 0.01);
    }

    #[test]
    fn analytic_loss_chain() {
        let sv = GaussianState::squeezed_vacuum(1.0, FRAC_PI_2)
            .unwrap()
            .apply_loss(0.941)
            .unwrap();
        let phases = reference_phases();
        let means: Vec<f64> = phases.iter().map(|&t| sv.quadrature_variance(t) / 0.25).collect();
        let c = variance_curve(&phases, &means, 1.0, 0.0).unwrap();
        assert!((c.fit.d - 0.186).abs() < 1e-3, "{}", c.fit.d);
        assert!((c.fit.a + c.fit.d - 7.01).abs() < 5e-3);
        assert!(c.fit.a_err < 1e-9 && c.fit.d_err < 1e-9);
    }

    #[test]
    fn flat_input() {
        let phases = reference_phases();
        let c = variance_curve(&phases, &[73.0; 19], 73.0, 0.0).unwrap();
        assert!(c.fit.a.abs() < 1e-12);
        assert!((c.fit.d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weighting_favours_precise_points() {
        let phases = reference_phases();
        let mut means: Vec<f64> = phases.iter().map(|t| 0.2 + 7.0 * t.cos().powi(2)).collect();
        let errs: Vec<f64> = means.iter().map(|m| 0.01 * m).collect();
        // perturb the most uncertain point
        means[0] += 0.5;
        let ols = variance_curve(&phases, &means, 1.0, 0.0).unwrap();
        let wls = variance_curve_weighted(&phases, &means, &errs, 1.0, 0.0).unwrap();
        assert!((wls.fit.d - 0.2).abs() < (ols.fit.d - 0.2).abs());
        assert!(wls.fit.d_err < ols.fit.d_err);
    }

    #[test]
    fn too_few_phases() {
        assert!(variance_curve(&[0.0, 1.0], &[1.0, 2.0], 1.0, 0.0).is_err());
        assert!(variance_curve(&[0.0, 1.0, 1.5], &[1.0, 2.0, 3.0], 1.0, 2.0).is_err());
    }
}
