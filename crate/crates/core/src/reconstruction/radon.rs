//! Filtered backprojection.

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase_space::{Extent, WignerGrid, DEFAULT_GRID_POINTS, DEFAULT_HALF_EXTENT};
use crate::reconstruction::sinogram::Sinogram;
use crate::scalar::Real;

/// Minimum number of distinct projection angles.
pub const MIN_ANGLES: usize = 9;

/// Default filter cutoff as a fraction of the Nyquist frequency.
pub const DEFAULT_CUTOFF: f64 = 0.7;

/// Largest fraction of a projection's mass allowed outside the inscribed
/// circle of the output grid.
pub const MAX_MASS_BEYOND_GRID: f64 = 1e-3;

/// Apodization applied on top of the ramp filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterWindow {
    /// Bare ramp, truncated at the cutoff.
    RamLak,
    SheppLogan,
    Cosine,
    Hamming,
    #[default]
    Hann,
}

impl FilterWindow {
    /// Window value at `ratio = |f| / (k_c f_Nyquist)`; zero beyond one.
    pub fn weight(self, ratio: f64) -> f64 {
        use std::f64::consts::PI;
        if ratio > 1.0 {
            return 0.0;
        }
        match self {
            FilterWindow::RamLak => 1.0,
            FilterWindow::SheppLogan => {
                let a = 0.5 * PI * ratio;
                if a == 0.0 {
                    1.0
                } else {
                    a.sin() / a
                }
            }
            FilterWindow::Cosine => (0.5 * PI * ratio).cos(),
            FilterWindow::Hamming => 0.54 + 0.46 * (PI * ratio).cos(),
            FilterWindow::Hann => 0.5 * (1.0 + (PI * ratio).cos()),
        }
    }
}

impl std::str::FromStr for FilterWindow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ram-lak" | "ramp" => Ok(Self::RamLak),
            "shepp-logan" => Ok(Self::SheppLogan),
            "cosine" => Ok(Self::Cosine),
            "hamming" => Ok(Self::Hamming),
            "hann" => Ok(Self::Hann),
            other => Err(Error::invalid("filter", format!("unknown window '{other}'"))),
        }
    }
}

/// Lookup of filtered projections between samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    Nearest,
    #[default]
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionParams<T> {
    pub nx: usize,
    pub np: usize,
    pub extent: Extent<T>,
    pub window: FilterWindow,
    /// `k_c ∈ (0, 1]`, fraction of Nyquist.
    pub cutoff: T,
    pub interpolation: Interpolation,
}

impl<T: Real> Default for ReconstructionParams<T> {
    fn default() -> Self {
        Self {
            nx: DEFAULT_GRID_POINTS,
            np: DEFAULT_GRID_POINTS,
            extent: Extent::square(T::lit(DEFAULT_HALF_EXTENT)),
            window: FilterWindow::Hann,
            cutoff: T::lit(DEFAULT_CUTOFF),
            interpolation: Interpolation::Linear,
        }
    }
}

impl<T: Real> ReconstructionParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff > T::zero() && self.cutoff <= T::one()) {
            return Err(Error::invalid(
                "cutoff",
                format!("k_c must lie in (0, 1], got {}", self.cutoff),
            ));
        }
        if self.nx < 2 || self.np < 2 {
            return Err(Error::invalid("grid", "needs at least 2×2 points"));
        }
        let e = &self.extent;
        if !(e.x_max > e.x_min && e.p_max > e.p_min) {
            return Err(Error::invalid("extent", "must have positive width"));
        }
        Ok(())
    }
}

/// Frequency response of the band-limited ramp filter for a projection of
/// `n` samples at spacing `d`, zero-padded to `len`. The spatial kernel is
/// the discrete ramp `h[0] = 1/(4d²)`, `h[odd k] = −1/(π²k²d²)`, which avoids
/// the DC bias of sampling `|f|` directly.
fn ramp_response(len: usize, d: f64, window: FilterWindow, cutoff: f64) -> Vec<f64> {
    use std::f64::consts::PI;
    let mut kernel: Vec<Complex<f64>> = (0..len)
        .map(|i| {
            let k = i.min(len - i);
            let v = if k == 0 {
                1.0 / (4.0 * d * d)
            } else if k % 2 == 1 {
                -1.0 / (PI * PI * (k * k) as f64 * d * d)
            } else {
                0.0
            };
            Complex::new(v, 0.0)
        })
        .collect();
    FftPlanner::<f64>::new().plan_fft_forward(len).process(&mut kernel);
    kernel
        .iter()
        .enumerate()
        .map(|(m, h)| {
            let ratio = 2.0 * m.min(len - m) as f64 / len as f64 / cutoff;
            h.re * window.weight(ratio)
        })
        .collect()
}

/// Ramp-filtered projections on an extended grid. The filtered rows have
/// long negative tails that integrate against the central peak, so they are
/// kept over the full zero-padded length rather than cut to the input range.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredProjections<T> {
    /// Coordinate of the first sample.
    pub start: T,
    pub spacing: T,
    pub rows: Vec<Vec<T>>,
}

/// Ramp-filter every row of `sino`.
pub fn filter_projections<T: Real>(sino: &Sinogram<T>, window: FilterWindow, cutoff: T) -> FilteredProjections<T> {
    let n = sino.x_grid().len();
    let len = (2 * n).next_power_of_two();
    let pad = (len - n) / 2;
    let d = sino.spacing().as_f64();
    let response = ramp_response(len, d, window, cutoff.as_f64());
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    // d for the convolution sum, 1/len for the unnormalized inverse transform
    let scale = d / len as f64;
    let rows = sino
        .rows()
        .par_iter()
        .map(|row| {
            let mut buf: Vec<Complex<f64>> = row
                .iter()
                .map(|v| Complex::new(v.as_f64(), 0.0))
                .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
                .take(len)
                .collect();
            fwd.process(&mut buf);
            for (b, r) in buf.iter_mut().zip(&response) {
                *b *= *r;
            }
            inv.process(&mut buf);
            // circular index −pad maps to len − pad
            (0..len)
                .map(|i| T::lit(buf[(i + len - pad) % len].re * scale))
                .collect()
        })
        .collect();
    FilteredProjections {
        start: sino.x_grid()[0] - sino.spacing() * T::from_usize_lossy(pad),
        spacing: sino.spacing(),
        rows,
    }
}

/// Reconstruct a Wigner function from its projections.
///
/// Each row is convolved with the windowed ramp filter, then smeared back
/// along its angle, `W(x, p) = Σ_k Δθ_k q_k(x cos θ_k + p sin θ_k)`, and the
/// result is normalized to unit integral. Rows of the output are computed in
/// parallel; within a pixel the angle sum runs in a fixed order, so the
/// result does not depend on the thread count.
pub fn inverse_radon<T: Real>(sino: &Sinogram<T>, params: &ReconstructionParams<T>) -> Result<WignerGrid<T>> {
    let raw = backproject(sino, params)?;
    let total = raw.integral();
    if !(total > T::zero()) {
        return Err(Error::Degenerate(
            "backprojection integrates to a non-positive value".into(),
        ));
    }
    raw.normalized()
}

/// [`inverse_radon`] without the final normalization; its integral measures
/// how well the filter and angle weights preserve mass.
pub fn backproject<T: Real>(sino: &Sinogram<T>, params: &ReconstructionParams<T>) -> Result<WignerGrid<T>> {
    params.validate()?;
    if sino.len() < MIN_ANGLES {
        return Err(Error::InsufficientCoverage(format!(
            "{} distinct angles, at least {MIN_ANGLES} required",
            sino.len()
        )));
    }
    let e = params.extent;
    let radius = (e.x_max.min(-e.x_min)).min(e.p_max.min(-e.p_min));
    for k in 0..sino.len() {
        let beyond = sino.row_mass_beyond(k, radius);
        if beyond > T::lit(MAX_MASS_BEYOND_GRID) {
            return Err(Error::ExtentTooSmall {
                mass_outside: beyond.as_f64(),
            });
        }
    }

    let filtered = filter_projections(sino, params.window, params.cutoff);
    let weights = sino.angle_weights();
    let trig: Vec<(f64, f64)> = sino
        .phases()
        .iter()
        .map(|t| (t.as_f64().cos(), t.as_f64().sin()))
        .collect();
    let x0 = filtered.start.as_f64();
    let inv_d = 1.0 / filtered.spacing.as_f64();
    let rows: Vec<Vec<f64>> = filtered
        .rows
        .iter()
        .map(|r| r.iter().map(|v| v.as_f64()).collect())
        .collect();
    let w: Vec<f64> = weights.iter().map(|v| v.as_f64()).collect();

    let grid = WignerGrid::tabulate(params.nx, params.np, e, |_, _| T::zero())?;
    let xs: Vec<f64> = grid.x_nodes().iter().map(|v| v.as_f64()).collect();
    let ps: Vec<f64> = grid.p_nodes().iter().map(|v| v.as_f64()).collect();
    let n = rows[0].len();
    let nx = params.nx;
    let mut values = vec![T::zero(); nx * params.np];
    values.par_chunks_mut(nx).enumerate().for_each(|(j, out)| {
        let p = ps[j];
        for (i, slot) in out.iter_mut().enumerate() {
            let x = xs[i];
            let mut acc = 0.0;
            for k in 0..rows.len() {
                let (c, s) = trig[k];
                let u = (x * c + p * s - x0) * inv_d;
                acc += w[k] * lookup(&rows[k], u, n, params.interpolation);
            }
            *slot = T::lit(acc);
        }
    });
    WignerGrid::from_values(nx, params.np, e, values)
}

#[inline]
fn lookup(row: &[f64], u: f64, n: usize, mode: Interpolation) -> f64 {
    match mode {
        Interpolation::Nearest => {
            let k = u.round();
            if k < 0.0 || k > (n - 1) as f64 {
                0.0
            } else {
                row[k as usize]
            }
        }
        Interpolation::Linear => {
            if u < 0.0 || u > (n - 1) as f64 {
                return 0.0;
            }
            let k = (u.floor() as usize).min(n - 2);
            let t = u - k as f64;
            row[k] * (1.0 - t) + row[k + 1] * t
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::{symmetric_grid, GaussianState, PhaseSpaceState, StateSpec};
    use std::f64::consts::{FRAC_2_PI, FRAC_PI_2};

    fn analytic(spec: &StateSpec<f64>, angles: usize) -> Sinogram<f64> {
        let st = PhaseSpaceState::from_spec(spec, 241, 6.0).unwrap();
        Sinogram::from_state(&st, &Sinogram::uniform_angles(angles), symmetric_grid(6.0, 301)).unwrap()
    }

    #[test]
    fn ramp_response_is_real_and_nonnegative() {
        let h = ramp_response(512, 0.04, FilterWindow::RamLak, 1.0);
        assert!(h[0].abs() < 1e-2 * h[128]);
        assert!(h.iter().all(|&v| v > -1e-9));
    }

    #[test]
    fn vacuum_origin_value() {
        let s = analytic(&StateSpec::Vacuum, 36);
        let w = inverse_radon(&s, &ReconstructionParams::default()).unwrap();
        let w00 = w.value_at(0.0, 0.0);
        assert!((w00 / FRAC_2_PI - 1.0).abs() < 0.02, "W(0,0) = {w00}");
        let raw = backproject(&s, &ReconstructionParams::default()).unwrap();
        assert!((raw.integral() - 1.0).abs() < 1e-2, "{}", raw.integral());
    }

    #[test]
    fn fock_negativity() {
        let s = analytic(&StateSpec::Fock { n: 1 }, 36);
        let w = inverse_radon(&s, &ReconstructionParams::default()).unwrap();
        let w00 = w.value_at(0.0, 0.0);
        assert!((w00 / -FRAC_2_PI - 1.0).abs() < 0.05, "W(0,0) = {w00}");
    }

    #[test]
    fn gaussian_round_trip_variances() {
        let sv = GaussianState::squeezed_vacuum(0.6, FRAC_PI_2).unwrap();
        let st = PhaseSpaceState::Gaussian(sv);
        let s = Sinogram::from_state(&st, &Sinogram::uniform_angles(36), symmetric_grid(4.0, 201)).unwrap();
        let w = inverse_radon(&s, &ReconstructionParams::default()).unwrap();
        let xg = symmetric_grid(4.0, 401);
        for theta in [0.0, FRAC_PI_2] {
            let m = w.project(theta, &xg);
            let v = crate::scalar::trapezoid(&xg, &xg.iter().zip(&m).map(|(x, p)| x * x * p).collect::<Vec<_>>());
            let want = sv.quadrature_variance(theta);
            assert!((v / want - 1.0).abs() < 0.03, "θ={theta}: {v} vs {want}");
        }
    }

    #[test]
    fn rejects_few_angles_and_small_grids() {
        let s = analytic(&StateSpec::Vacuum, 8);
        assert!(matches!(
            inverse_radon(&s, &ReconstructionParams::default()),
            Err(Error::InsufficientCoverage(_))
        ));
        let s = analytic(&StateSpec::Vacuum, 36);
        let small = ReconstructionParams {
            extent: Extent::square(1.0),
            ..Default::default()
        };
        assert!(matches!(inverse_radon(&s, &small), Err(Error::ExtentTooSmall { .. })));
        let bad = ReconstructionParams {
            cutoff: 0.0,
            ..Default::default()
        };
        assert!(inverse_radon(&s, &bad).is_err());
    }

    #[test]
    fn nearest_interpolation_close_to_linear() {
        let s = analytic(&StateSpec::Vacuum, 36);
        let lin = inverse_radon(&s, &ReconstructionParams::default()).unwrap();
        let near = inverse_radon(
            &s,
            &ReconstructionParams {
                interpolation: Interpolation::Nearest,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((lin.value_at(0.0, 0.0) - near.value_at(0.0, 0.0)).abs() < 0.02);
    }
}
