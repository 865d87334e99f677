//! Reconstruction and figures of merit for a simulated run.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiment::{lossy_input_state, ReconstructionConfig, RowSource, SampleSet};
use crate::metrics::{
    fidelity_to_pure, fit_mode_number, normalized_overlap, purity_gaussian, purity_grid, squeezing_db, StateMetrics,
    MIN_MODE_RECORDS,
};
use crate::phase_space::{symmetric_grid, Extent, StateSpec, WignerGrid, VACUUM_VARIANCE};
use crate::reconstruction::{
    build_sinogram, histogram_photons, inverse_radon, to_quadrature_distribution, variance_curve_weighted,
    PhotonHistogram, QuadratureDistribution, ReconstructionParams, Sinogram, SinogramOptions, VarianceCurve,
};
use crate::rng::{tag, StreamFactory};

/// Intermediate and final products of a reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    /// Dark-corrected amplified-vacuum mean.
    pub calibration_mean: f64,
    pub histograms: Vec<PhotonHistogram<f64>>,
    pub vacuum_histogram: PhotonHistogram<f64>,
    /// Transformed histograms at the measured phases.
    pub distributions: Vec<QuadratureDistribution<f64>>,
    pub variance: VarianceCurve<f64>,
    pub sinogram: Sinogram<f64>,
    pub wigner: WignerGrid<f64>,
}

pub fn reconstruction_params(rc: &ReconstructionConfig) -> ReconstructionParams<f64> {
    ReconstructionParams {
        nx: rc.grid_points,
        np: rc.grid_points,
        extent: Extent::square(rc.half_extent),
        window: rc.filter,
        cutoff: rc.cutoff,
        interpolation: rc.interpolation,
    }
}

/// Reconstruct with the settings stored in the run's configuration.
pub fn reconstruct(set: &SampleSet) -> Result<Reconstruction> {
    reconstruct_with(set, &set.config.reconstruction)
}

pub fn reconstruct_with(set: &SampleSet, rc: &ReconstructionConfig) -> Result<Reconstruction> {
    if set.phases.is_empty() {
        return Err(Error::Empty("sample set has no phase records"));
    }
    let cfg = &set.config;
    let dark = cfg.detector.dark_mean;
    let bins = cfg.run.bins;
    let calibration_mean = set.calibration_mean()?;
    let vacuum_histogram = histogram_photons(&set.vacuum, 0.0, bins, dark)?;
    let histograms = set
        .phases
        .iter()
        .map(|p| histogram_photons(&p.n_detected, p.phase, bins, dark))
        .collect::<Result<Vec<_>>>()?;
    let distributions = histograms
        .iter()
        .map(|h| to_quadrature_distribution(h, calibration_mean, rc.node_placement))
        .collect::<Result<Vec<_>>>()?;
    let phases: Vec<f64> = set.phases.iter().map(|p| p.phase).collect();
    let means: Vec<f64> = set.phases.iter().map(|p| p.mean()).collect();
    let errors: Vec<f64> = set.phases.iter().map(|p| p.std_error()).collect();
    let variance = variance_curve_weighted(&phases, &means, &errors, set.vacuum_mean().unwrap_or(f64::NAN), dark)?;

    let rows: Vec<QuadratureDistribution<f64>> = match rc.row_source.resolve(&cfg.state) {
        RowSource::Histogram | RowSource::Auto => distributions.clone(),
        RowSource::GaussianFit => {
            let widest = variance.points.iter().map(|p| p.ratio).fold(0.0, f64::max) * VACUUM_VARIANCE;
            let half = 8.0 * widest.sqrt();
            let x = symmetric_grid(half, 2 * (half / rc.sinogram_spacing).ceil() as usize + 1);
            variance
                .points
                .iter()
                .map(|p| QuadratureDistribution::gaussian(p.phase, p.ratio * VACUUM_VARIANCE, x.clone()))
                .collect::<Result<Vec<_>>>()?
        }
        RowSource::Exact => {
            let state = lossy_input_state(cfg)?;
            let half = cfg.state.suggested_half_extent();
            let x = symmetric_grid(half, 2 * (half / rc.sinogram_spacing).ceil() as usize + 1);
            phases
                .iter()
                .map(|&phase| QuadratureDistribution {
                    phase,
                    density: state.marginal_density(phase, &x),
                    x: x.clone(),
                    bins: None,
                })
                .collect()
        }
    };
    let half = rows
        .iter()
        .flat_map(|r| r.x.iter().map(|v| v.abs()))
        .fold(0.0, f64::max);
    let cells = (half / rc.sinogram_spacing).ceil() as usize;
    let x_grid = symmetric_grid(cells as f64 * rc.sinogram_spacing, 2 * cells + 1);
    let sinogram = build_sinogram(
        &rows,
        &SinogramOptions {
            x_grid: Some(x_grid),
            points: 0,
            mirror: rc.mirror,
        },
    )?;
    let wigner = inverse_radon(&sinogram, &reconstruction_params(rc))?;
    Ok(Reconstruction {
        calibration_mean,
        histograms,
        vacuum_histogram,
        distributions,
        variance,
        sinogram,
        wigner,
    })
}

/// Width of the reconstructed marginal of `x_θ`, from a least-squares fit
/// of a zero-mean Gaussian. Unlike the second moment, the fit is not pulled
/// around by small filtered-backprojection ripples far from the centre.
pub fn marginal_std(w: &WignerGrid<f64>, theta: f64) -> f64 {
    let e = w.extent();
    let half = e.radius();
    let step = w.dx().min(w.dp());
    let n = 2 * (half / step).ceil() as usize + 1;
    let x = symmetric_grid(half, n);
    let m = w.project(theta, &x);
    gaussian_fit_std(&x, &m, step)
}

/// `σ` minimizing `Σ (m(x) − A exp(−x²/2σ²))²` with the best `A` for each
/// `σ`; log-spaced scan followed by golden-section refinement.
pub fn gaussian_fit_std(x: &[f64], m: &[f64], min_sigma: f64) -> f64 {
    let score = |sigma: f64| {
        let (mut mg, mut gg) = (0.0, 0.0);
        for (&xv, &mv) in x.iter().zip(m) {
            let g = (-xv * xv / (2.0 * sigma * sigma)).exp();
            mg += mv * g;
            gg += g * g;
        }
        if gg > 0.0 {
            mg * mg / gg
        } else {
            0.0
        }
    };
    let max_sigma = x.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let (lo, hi) = (min_sigma.max(1e-6).ln(), max_sigma.ln());
    let steps = 400;
    let at = |k: usize| lo + (hi - lo) * k as f64 / steps as f64;
    let best = (0..=steps)
        .max_by(|&a, &b| score(at(a).exp()).total_cmp(&score(at(b).exp())))
        .unwrap_or(0);
    let (mut a, mut b) = (at(best.saturating_sub(1)), at((best + 1).min(steps)));
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if score(c.exp()) > score(d.exp()) {
            b = d;
        } else {
            a = c;
        }
    }
    (0.5 * (a + b)).exp()
}

/// Figures of merit for a reconstruction. The fidelity target is the
/// configured `reconstruction.target`, or the input state.
pub fn analyze(set: &SampleSet, rec: &Reconstruction) -> Result<StateMetrics> {
    let target: StateSpec<f64> = set.config.reconstruction.target.unwrap_or(set.config.state);
    let fit = &rec.variance.fit;
    let (lo, hi) = if fit.a >= 0.0 {
        (fit.min_ratio(), fit.max_ratio())
    } else {
        (fit.max_ratio(), fit.min_ratio())
    };
    let delta_x0 = marginal_std(&rec.wigner, 0.0);
    let delta_x_pi2 = marginal_std(&rec.wigner, FRAC_PI_2);
    let purity = purity_gaussian(delta_x0, delta_x_pi2)?;
    let fidelity = normalized_overlap(&rec.wigner, &target)?;
    let overlap = fidelity_to_pure(&rec.wigner, &target)?;
    let dark = set.config.detector.dark_mean;
    let vac: Vec<f64> = set.vacuum.iter().map(|n| n - dark).collect();
    let mode_number = if vac.len() >= MIN_MODE_RECORDS {
        Some(fit_mode_number(&vac)?.mu)
    } else {
        None
    };
    Ok(StateMetrics {
        squeezing_db: squeezing_db(lo)?,
        antisqueezing_db: squeezing_db(hi)?,
        delta_x0,
        delta_x_pi2,
        purity: purity.value,
        purity_grid: purity_grid(&rec.wigner)?,
        fidelity: fidelity.value,
        overlap: overlap.value,
        mode_number,
        unphysical: purity.unphysical || fidelity.unphysical || overlap.unphysical,
    })
}

/// Percentile interval of a metric over bootstrap resamples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub low: f64,
    pub median: f64,
    pub high: f64,
}

/// 16th, 50th and 84th percentiles of the metrics over shot resamples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapSummary {
    pub resamples: usize,
    pub squeezing_db: Interval,
    pub antisqueezing_db: Interval,
    pub delta_x0: Interval,
    pub delta_x_pi2: Interval,
    pub purity: Interval,
    pub fidelity: Interval,
}

impl BootstrapSummary {
    pub fn to_report(&self) -> String {
        let mut out = format!("bootstrap_resamples={}\n", self.resamples);
        for (name, iv) in [
            ("squeezing_db", self.squeezing_db),
            ("antisqueezing_db", self.antisqueezing_db),
            ("delta_x0", self.delta_x0),
            ("delta_x_pi2", self.delta_x_pi2),
            ("purity", self.purity),
            ("fidelity", self.fidelity),
        ] {
            out.push_str(&format!(
                "{name}_p16={:.6}\n{name}_p50={:.6}\n{name}_p84={:.6}\n",
                iv.low, iv.median, iv.high
            ));
        }
        out
    }
}

/// Resample shots with replacement within every phase (and the vacuum run),
/// reconstruct and analyze each replicate.
pub fn bootstrap(set: &SampleSet, resamples: usize, seed: u64) -> Result<BootstrapSummary> {
    if resamples < 2 {
        return Err(Error::invalid("resamples", "need at least 2"));
    }
    let streams = StreamFactory::new(seed);
    let mut rows: Vec<StateMetrics> = Vec::with_capacity(resamples);
    for r in 0..resamples {
        let mut rng = streams.stream(tag::BOOTSTRAP, 0, r as u64);
        let mut replicate = set.clone();
        for p in replicate.phases.iter_mut() {
            p.n_detected = resample(&p.n_detected, &mut rng);
        }
        replicate.vacuum = resample(&set.vacuum, &mut rng);
        let rec = reconstruct(&replicate)?;
        rows.push(analyze(&replicate, &rec)?);
    }
    let pick = |f: fn(&StateMetrics) -> f64| {
        let mut v: Vec<f64> = rows.iter().map(f).collect();
        v.sort_by(|a, b| a.total_cmp(b));
        Interval {
            low: percentile(&v, 0.16),
            median: percentile(&v, 0.5),
            high: percentile(&v, 0.84),
        }
    };
    Ok(BootstrapSummary {
        resamples,
        squeezing_db: pick(|m| m.squeezing_db),
        antisqueezing_db: pick(|m| m.antisqueezing_db),
        delta_x0: pick(|m| m.delta_x0),
        delta_x_pi2: pick(|m| m.delta_x_pi2),
        purity: pick(|m| m.purity),
        fidelity: pick(|m| m.fidelity),
    })
}

fn resample<R: Rng>(v: &[f64], rng: &mut R) -> Vec<f64> {
    (0..v.len()).map(|_| v[rng.random_range(0..v.len())]).collect()
}

/// Linear-interpolated percentile of sorted data.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let k = pos.floor() as usize;
    let t = pos - k as f64;
    if k + 1 < sorted.len() {
        sorted[k] * (1.0 - t) + sorted[k + 1] * t
    } else {
        sorted[k]
    }
}
