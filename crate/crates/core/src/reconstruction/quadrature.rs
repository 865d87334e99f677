//! Photon-number distributions to quadrature distributions.
//!
//! Behind a strong amplifier `N = s·x_θ²` with `s = η_det e^{2G}`, so
//! `P(|x|) = 2 s |x| P(N = s x²)`. The scale `s` is calibrated from the
//! amplified vacuum (`⟨N_vac⟩ = s/4`), which makes the result independent of
//! the detection efficiency.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase_space::VACUUM_VARIANCE;
use crate::reconstruction::histogram::PhotonHistogram;
use crate::scalar::{trapezoid, Real};

/// Where each photon-number bin is placed on the quadrature axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodePlacement {
    /// Midpoint of the bin's image `[√(N_lo/s), √(N_hi/s)]`. The transformed
    /// density then integrates over each image interval to the bin's mass.
    #[default]
    XMidpoint,
    /// `√(N_center/s)`.
    NCenter,
}

/// Bin masses on the `|x|` axis, kept so the cumulative distribution can be
/// evaluated exactly at the bin edges.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedMass<T> {
    pub abs_edges: Vec<T>,
    pub mass: Vec<T>,
}

/// Even quadrature density `P(x_θ)` on a grid symmetric about zero.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureDistribution<T> {
    pub phase: T,
    pub x: Vec<T>,
    pub density: Vec<T>,
    pub bins: Option<BinnedMass<T>>,
}

/// Photon-number scale `s = 4·⟨N_vac⟩` (estimates `η_det e^{2G}`).
pub fn calibration_scale<T: Real>(n_vac_mean: T) -> Result<T> {
    if !(n_vac_mean > T::zero()) || !n_vac_mean.is_finite() {
        return Err(Error::invalid(
            "n_vac_mean",
            format!("dark-corrected vacuum mean must be > 0, got {n_vac_mean}"),
        ));
    }
    Ok(n_vac_mean / T::lit(VACUUM_VARIANCE))
}

/// Apply the amplified-quadrature change of variables to a photon histogram.
pub fn to_quadrature_distribution<T: Real>(
    hist: &PhotonHistogram<T>,
    n_vac_mean: T,
    placement: NodePlacement,
) -> Result<QuadratureDistribution<T>> {
    let s = calibration_scale(n_vac_mean)?;
    if hist.density.is_empty() || !(hist.integral() > T::zero()) {
        return Err(Error::Empty("photon histogram has no counts"));
    }
    let abs_edges: Vec<T> = hist.edges.iter().map(|&n| (n / s).sqrt()).collect();
    let nodes: Vec<T> = match placement {
        NodePlacement::XMidpoint => abs_edges.windows(2).map(|w| (w[0] + w[1]) * T::lit(0.5)).collect(),
        NodePlacement::NCenter => hist.centers().into_iter().map(|n| (n / s).sqrt()).collect(),
    };
    // P(|x|) = 2 s |x| P(N); the even density is half of it
    let half: Vec<T> = nodes.iter().zip(&hist.density).map(|(&x, &pn)| s * x * pn).collect();
    let x: Vec<T> = nodes.iter().rev().map(|&v| -v).chain(nodes.iter().copied()).collect();
    let raw: Vec<T> = half.iter().rev().chain(half.iter()).copied().collect();
    let norm = trapezoid(&x, &raw);
    if !(norm > T::zero()) {
        return Err(Error::Degenerate("transformed density has zero mass".into()));
    }
    let density = raw.into_iter().map(|v| v / norm).collect();
    let mass = hist.masses();
    Ok(QuadratureDistribution {
        phase: hist.phase,
        x,
        density,
        bins: Some(BinnedMass { abs_edges, mass }),
    })
}

/// Sample-wise variant: each dark-corrected record maps to `±√(N/s)`.
/// Returns the mirrored sample (twice the input length).
pub fn quadrature_samples<T: Real>(records: &[T], dark_mean: T, n_vac_mean: T) -> Result<Vec<T>> {
    let s = calibration_scale(n_vac_mean)?;
    if records.is_empty() {
        return Err(Error::Empty("no photon-number records"));
    }
    let mut out = Vec::with_capacity(records.len() * 2);
    for &n in records {
        let x = ((n - dark_mean).max(T::zero()) / s).sqrt();
        out.push(x);
        out.push(-x);
    }
    Ok(out)
}

/// `(P(x) + P(−x))/2` for a density on a grid symmetric about zero.
pub fn symmetrize<T: Real>(density: &[T]) -> Vec<T> {
    let n = density.len();
    (0..n)
        .map(|i| (density[i] + density[n - 1 - i]) * T::lit(0.5))
        .collect()
}

impl<T: Real> QuadratureDistribution<T> {
    /// Zero-mean normal density on `x` with the given variance.
    pub fn gaussian(phase: T, variance: T, x: Vec<T>) -> Result<Self> {
        if !(variance > T::zero()) {
            return Err(Error::invalid("variance", "must be > 0"));
        }
        let two = T::lit(2.0);
        let raw: Vec<T> = x
            .iter()
            .map(|&v| (-(v * v) / (two * variance)).exp() / (two * T::PI() * variance).sqrt())
            .collect();
        let norm = trapezoid(&x, &raw);
        Ok(Self {
            phase,
            x,
            density: raw.into_iter().map(|v| v / norm).collect(),
            bins: None,
        })
    }

    pub fn integral(&self) -> T {
        trapezoid(&self.x, &self.density)
    }

    /// `∫ x² P(x) dx` of the piecewise-linear density.
    pub fn variance(&self) -> T {
        let m2: Vec<T> = self.x.iter().zip(&self.density).map(|(x, p)| *x * *x * *p).collect();
        trapezoid(&self.x, &m2) / self.integral()
    }

    pub fn std_dev(&self) -> T {
        self.variance().sqrt()
    }

    /// Cumulative distribution of the signed variable at the bin-edge images
    /// `±√(N_k/s)`, where the binned distribution is known exactly.
    pub fn cdf_at_edges(&self) -> Option<Vec<(T, T)>> {
        let bins = self.bins.as_ref()?;
        let half = T::lit(0.5);
        let mut out = Vec::with_capacity(2 * bins.abs_edges.len());
        // F_abs at each edge
        let mut f_abs = Vec::with_capacity(bins.abs_edges.len());
        let mut acc = T::zero();
        f_abs.push(acc);
        for &m in &bins.mass {
            acc = acc + m;
            f_abs.push(acc);
        }
        for (&e, &f) in bins.abs_edges.iter().zip(&f_abs).rev() {
            out.push((-e, half - f * half));
        }
        for (&e, &f) in bins.abs_edges.iter().zip(&f_abs).skip(1) {
            out.push((e, half + f * half));
        }
        Some(out)
    }

    /// Kolmogorov–Smirnov distance to a reference CDF. Binned distributions
    /// are compared at their bin-edge images; others at their grid nodes
    /// using the trapezoidal cumulative integral.
    pub fn ks_statistic<F: Fn(T) -> T>(&self, reference_cdf: F) -> T {
        let points = self.cdf_at_edges().unwrap_or_else(|| {
            let mut acc = T::zero();
            let mut pts = vec![(self.x[0], acc)];
            let norm = self.integral();
            for k in 1..self.x.len() {
                acc = acc + (self.x[k] - self.x[k - 1]) * (self.density[k] + self.density[k - 1]) * T::lit(0.5) / norm;
                pts.push((self.x[k], acc));
            }
            pts
        });
        points
            .into_iter()
            .map(|(x, f)| (f - reference_cdf(x)).abs())
            .fold(T::zero(), T::max)
    }
}

/// Critical KS distance at significance `alpha` for `n` samples
/// (asymptotic `√(−ln(α/2)/2)/√n`).
pub fn ks_critical_value(alpha: f64, n: usize) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}
