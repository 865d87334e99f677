//! Angle-indexed families of quadrature densities.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

use crate::error::{Error, Result};
use crate::phase_space::PhaseSpaceState;
use crate::reconstruction::quadrature::QuadratureDistribution;
use crate::scalar::{interp_linear, linspace, trapezoid, Real};

/// Largest allowed gap between neighbouring angles (cyclic over `[0, π)`)
/// after symmetry extension.
pub const MAX_ANGULAR_GAP: f64 = FRAC_PI_3;

/// Mass a row may lose when resampled onto the shared grid.
pub const RESAMPLE_MASS_TOLERANCE: f64 = 1e-3;

/// Quadrature densities on a shared, uniform, zero-centred `x` grid, one row
/// per phase in `[0, π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram<T> {
    phases: Vec<T>,
    x: Vec<T>,
    rows: Vec<Vec<T>>,
}

/// How `build_sinogram` lays out and extends its rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SinogramOptions<T> {
    /// Shared grid; if `None`, a grid of `points` nodes spanning every row.
    pub x_grid: Option<Vec<T>>,
    pub points: usize,
    /// Fill `(π/2, π)` by reflection, `P_{π−θ} = P_θ`. Valid for states with
    /// `W(x, p) = W(x, −p)`, such as a squeezed vacuum on its principal axes.
    pub mirror: bool,
}

impl<T: Real> Default for SinogramOptions<T> {
    fn default() -> Self {
        Self {
            x_grid: None,
            points: 301,
            mirror: true,
        }
    }
}

impl<T: Real> Sinogram<T> {
    /// Build from rows already on `x`. Rows are checked but not resampled.
    pub fn new(phases: Vec<T>, x: Vec<T>, rows: Vec<Vec<T>>) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::Empty("sinogram has no rows"));
        }
        if phases.len() != rows.len() {
            return Err(Error::invalid("rows", "one row per phase required"));
        }
        if x.len() < 3 {
            return Err(Error::invalid("x_grid", "needs at least 3 nodes"));
        }
        if rows.iter().any(|r| r.len() != x.len()) {
            return Err(Error::invalid("rows", "row length differs from x grid"));
        }
        let pi = T::PI();
        if phases.iter().any(|&t| !(t >= T::zero() && t < pi)) {
            return Err(Error::invalid("phases", "must lie in [0, π)"));
        }
        if phases.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("phases", "must be strictly increasing"));
        }
        check_uniform(&x)?;
        Ok(Self { phases, x, rows })
    }

    /// Exact marginals of `state` at `phases`.
    pub fn from_state(state: &PhaseSpaceState<T>, phases: &[T], x: Vec<T>) -> Result<Self> {
        let rows = phases.iter().map(|&t| state.marginal_density(t, &x)).collect();
        Self::new(phases.to_vec(), x, rows)
    }

    /// `n` uniformly spaced angles `kπ/n`.
    pub fn uniform_angles(n: usize) -> Vec<T> {
        (0..n)
            .map(|k| T::PI() * T::from_usize_lossy(k) / T::from_usize_lossy(n))
            .collect()
    }

    pub fn phases(&self) -> &[T] {
        &self.phases
    }

    pub fn x_grid(&self) -> &[T] {
        &self.x
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    pub fn row(&self, k: usize) -> &[T] {
        &self.rows[k]
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn spacing(&self) -> T {
        self.x[1] - self.x[0]
    }

    /// `∫ x² P_k(x) dx / ∫ P_k(x) dx`.
    pub fn row_variance(&self, k: usize) -> T {
        let m2: Vec<T> = self.x.iter().zip(&self.rows[k]).map(|(x, p)| *x * *x * *p).collect();
        trapezoid(&self.x, &m2) / trapezoid(&self.x, &self.rows[k])
    }

    /// Mass of row `k` at `|x| > radius`.
    pub fn row_mass_beyond(&self, k: usize, radius: T) -> T {
        let total = trapezoid(&self.x, &self.rows[k]);
        let inside: Vec<T> = self
            .x
            .iter()
            .zip(&self.rows[k])
            .map(|(x, p)| if x.abs() <= radius { *p } else { T::zero() })
            .collect();
        if total > T::zero() {
            T::one() - trapezoid(&self.x, &inside) / total
        } else {
            T::zero()
        }
    }

    /// Trapezoid weights over the angle circle `[0, π)` (wrapping), summing
    /// to `π`. Uniform angles get `π/K` each.
    pub fn angle_weights(&self) -> Vec<T> {
        let k = self.phases.len();
        let pi = T::PI();
        let half = T::lit(0.5);
        if k == 1 {
            return vec![pi];
        }
        (0..k)
            .map(|i| {
                let next = if i + 1 < k {
                    self.phases[i + 1]
                } else {
                    self.phases[0] + pi
                };
                let prev = if i > 0 {
                    self.phases[i - 1]
                } else {
                    self.phases[k - 1] - pi
                };
                (next - prev) * half
            })
            .collect()
    }

    /// Largest cyclic gap between neighbouring angles.
    pub fn max_angular_gap(&self) -> T {
        max_cyclic_gap(&self.phases)
    }
}

fn max_cyclic_gap<T: Real>(phases: &[T]) -> T {
    let mut gap = phases[0] + T::PI() - phases[phases.len() - 1];
    for w in phases.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    gap
}

fn check_uniform<T: Real>(x: &[T]) -> Result<()> {
    let h = x[1] - x[0];
    if !(h > T::zero()) {
        return Err(Error::invalid("x_grid", "must be increasing"));
    }
    let tol = h * T::lit(1e-6);
    for w in x.windows(2) {
        if ((w[1] - w[0]) - h).abs() > tol {
            return Err(Error::invalid("x_grid", "must be uniformly spaced"));
        }
    }
    Ok(())
}

/// Assemble quadrature distributions into a sinogram over `[0, π)`.
///
/// Rows are resampled onto a shared grid by linear interpolation and
/// renormalized. With `mirror`, every phase in `(0, π/2)` also supplies the
/// row at `π − θ`; phases already present are not duplicated.
pub fn build_sinogram<T: Real>(dists: &[QuadratureDistribution<T>], opts: &SinogramOptions<T>) -> Result<Sinogram<T>> {
    if dists.is_empty() {
        return Err(Error::Empty("no quadrature distributions"));
    }
    let pi = T::PI();
    let x = match &opts.x_grid {
        Some(g) => g.clone(),
        None => {
            let half = dists
                .iter()
                .flat_map(|d| d.x.iter().map(|v| v.abs()))
                .fold(T::zero(), T::max);
            if !(half > T::zero()) {
                return Err(Error::Degenerate("all quadrature grids collapse to zero".into()));
            }
            linspace(-half, half, opts.points.max(3))
        }
    };
    if x.len() < 3 {
        return Err(Error::invalid("x_grid", "needs at least 3 nodes"));
    }
    check_uniform(&x)?;

    let mut entries: Vec<(T, Vec<T>)> = Vec::with_capacity(2 * dists.len());
    for d in dists {
        let phase = d.phase;
        if !(phase >= T::zero() && phase < pi) {
            return Err(Error::invalid("phase", format!("{phase} is outside [0, π)")));
        }
        let raw: Vec<T> = x.iter().map(|&v| interp_linear(&d.x, &d.density, v)).collect();
        let kept = trapezoid(&x, &raw);
        let total = d.integral();
        if !(kept > T::zero()) || T::one() - kept / total > T::lit(RESAMPLE_MASS_TOLERANCE) {
            return Err(Error::InsufficientCoverage(format!(
                "row at phase {phase} loses {} of its mass on the shared grid",
                (T::one() - kept / total).as_f64()
            )));
        }
        entries.push((phase, raw.into_iter().map(|v| v / kept).collect()));
    }
    if opts.mirror {
        let quarter = T::lit(FRAC_PI_2);
        let mirrored: Vec<(T, Vec<T>)> = entries
            .iter()
            .filter(|(t, _)| *t > T::zero() && *t < quarter)
            .map(|(t, row)| (pi - *t, row.clone()))
            .collect();
        entries.extend(mirrored);
    }
    entries.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite phases"));
    // merge angles closer than a rounding error (e.g. a measured π−θ and its mirror)
    let eps = T::lit(1e-9);
    let mut merged: Vec<(T, Vec<T>)> = Vec::with_capacity(entries.len());
    for e in entries {
        match merged.last() {
            Some(last) if (e.0 - last.0).abs() <= eps => {
                if opts.mirror {
                    continue;
                }
                return Err(Error::invalid("phases", "duplicate phase"));
            }
            _ => merged.push(e),
        }
    }
    if merged.len() < 2 {
        return Err(Error::InsufficientCoverage(
            "at least two distinct phases are needed".into(),
        ));
    }
    let (phases, rows): (Vec<T>, Vec<Vec<T>>) = merged.into_iter().unzip();
    let gap = max_cyclic_gap(&phases);
    if gap > T::lit(MAX_ANGULAR_GAP) + eps {
        return Err(Error::InsufficientCoverage(format!(
            "largest angular gap {:.4} rad exceeds {:.4} rad",
            gap.as_f64(),
            MAX_ANGULAR_GAP
        )));
    }
    Sinogram::new(phases, x, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::{symmetric_grid, GaussianState};

    fn gauss_row(phase: f64, var: f64) -> QuadratureDistribution<f64> {
        QuadratureDistribution::gaussian(phase, var, symmetric_grid(4.0, 161)).unwrap()
    }

    fn reference_phases() -> Vec<f64> {
        (0..19).map(|k| k as f64 * FRAC_PI_2 / 18.0).collect()
    }

    #[test]
    fn vacuum_rows_identical() {
        let dists: Vec<_> = [0.0, 0.7, 1.4].iter().map(|&t| gauss_row(t, 0.25)).collect();
        let s = build_sinogram(&dists, &SinogramOptions::default()).unwrap();
        assert_eq!(s.len(), 5);
        for r in s.rows() {
            assert_eq!(r, s.row(0));
        }
    }

    #[test]
    fn squeezed_rows_decrease_over_quadrant() {
        let sv = GaussianState::squeezed_vacuum(1.0, FRAC_PI_2)
            .unwrap()
            .apply_loss(0.941)
            .unwrap();
        let dists: Vec<_> = reference_phases()
            .into_iter()
            .map(|t| gauss_row(t, sv.quadrature_variance(t)))
            .collect();
        let s = build_sinogram(&dists, &SinogramOptions::default()).unwrap();
        assert_eq!(s.len(), 36);
        let quadrant: Vec<f64> = (0..19).map(|k| s.row_variance(k)).collect();
        assert!(quadrant.windows(2).all(|w| w[1] < w[0]));
        let w = s.angle_weights();
        for wk in &w {
            assert!((wk - std::f64::consts::PI / 36.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_phase_rejected() {
        let err = build_sinogram(&[gauss_row(0.0, 0.25)], &SinogramOptions::default()).unwrap_err();
        assert!(matches!(err, Error::InsufficientCoverage(_)));
    }

    #[test]
    fn sparse_phases_rejected() {
        let dists = vec![gauss_row(0.0, 0.25), gauss_row(FRAC_PI_2, 0.25)];
        assert!(build_sinogram(&dists, &SinogramOptions::default()).is_err());
    }

    #[test]
    fn truncating_grid_rejected() {
        let dists: Vec<_> = reference_phases().into_iter().map(|t| gauss_row(t, 1.0)).collect();
        let opts = SinogramOptions {
            x_grid: Some(symmetric_grid(1.5, 61)),
            ..Default::default()
        };
        assert!(matches!(
            build_sinogram(&dists, &opts),
            Err(Error::InsufficientCoverage(_))
        ));
    }

    #[test]
    fn from_state_rows_are_marginals() {
        let st = crate::phase_space::PhaseSpaceState::Gaussian(GaussianState::<f64>::vacuum());
        let s = Sinogram::from_state(&st, &Sinogram::uniform_angles(36), symmetric_grid(4.0, 201)).unwrap();
        assert!((s.row_variance(5) - 0.25).abs() < 1e-6);
    }
}
