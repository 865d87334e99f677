//! File-level steps behind the command-line tool: simulate, reconstruct,
//! analyze, plot, and the single-photon amplification demonstration.
//!
//! Every step writes plain-text data files plus SVG renderings into an
//! output directory. Output is deterministic for a given configuration and
//! seed; `pipeline` produces exactly what the three separate steps do.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::analysis::{analyze, bootstrap, reconstruct, Reconstruction};
use crate::error::{Error, Result};
use crate::experiment::{load_samples, persist_samples, run_experiment, ExperimentConfig, SampleSet};
use crate::io::{detect_kind, parse_sinogram, parse_wigner, write_sinogram, write_text, write_wigner, FileKind, Table};
use crate::metrics::{ModeFit, StateMetrics};
use crate::opa::{mean_photon_number, OpaParams};
use crate::phase_space::{
    build_wigner_grid, symmetric_grid, wigner_value, Extent, GaussianState, PhaseSpaceState, StateSpec, WignerGrid,
    VACUUM_VARIANCE,
};
use crate::plot::{line_plot_svg, sinogram_svg, table_svg, wigner_svg, LinePlot, Series, Style};
use crate::reconstruction::{to_quadrature_distribution, NodePlacement, PhotonHistogram};

pub const SHOTS_FILE: &str = "shots.csv";
pub const RUN_METADATA_FILE: &str = "run_metadata.txt";
pub const VARIANCE_FILE: &str = "variance.csv";
pub const HISTOGRAMS_FILE: &str = "histograms.csv";
pub const VACUUM_HISTOGRAM_FILE: &str = "vacuum_histogram.csv";
pub const QUADRATURES_FILE: &str = "quadratures.csv";
pub const SINOGRAM_FILE: &str = "sinogram.csv";
pub const WIGNER_FILE: &str = "wigner.csv";
pub const METRICS_FILE: &str = "metrics.txt";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const BOOTSTRAP_FILE: &str = "bootstrap.txt";

/// Simulate the run and write the shot records plus run metadata.
pub fn simulate(config: &ExperimentConfig, out: &Path) -> Result<SampleSet> {
    let set = run_experiment(config)?;
    persist_samples(&set, &out.join(SHOTS_FILE))?;
    write_text(&out.join(RUN_METADATA_FILE), &run_metadata(&set))?;
    Ok(set)
}

fn run_metadata(set: &SampleSet) -> String {
    let cfg = &set.config;
    let det = &cfg.detector;
    let mut s = String::new();
    let _ = writeln!(s, "seed={}", cfg.run.seed);
    let _ = writeln!(s, "phases={}", set.phases.len());
    let _ = writeln!(s, "shots_per_phase={}", cfg.run.shots_per_phase);
    let _ = writeln!(s, "vacuum_records={}", set.vacuum.len());
    let _ = writeln!(s, "records={}", set.record_count());
    let _ = writeln!(s, "eta_det={}", det.eta_det);
    let _ = writeln!(s, "dark_mean={}", det.dark_mean);
    let _ = writeln!(s, "dark_std={}", det.dark_std);
    let _ = writeln!(s, "gain={}", cfg.opa.gain);
    let _ = writeln!(s, "eta_pre={}", cfg.loss.eta_pre);
    let _ = writeln!(s, "sufficiency_margin={:.6}", set.sufficiency.margin);
    let _ = writeln!(s, "sufficient={}", set.sufficiency.sufficient);
    let _ = writeln!(s, "residual_ratio={:.6e}", set.sufficiency.residual_ratio);
    let _ = writeln!(s, "gain_override_used={}", set.gain_override_used());
    if let Some(vac) = set.vacuum_mean() {
        // detection efficiency as seen by the calibration run
        let params = OpaParams {
            gain: cfg.opa.gain,
            theta: 0.0,
            exact_model: cfg.opa.exact_model,
        };
        let ideal = mean_photon_number(&GaussianState::vacuum(), &params)
            + cfg.mode.secondary_fraction * params.power_gain() / 4.0;
        let _ = writeln!(s, "vacuum_mean={vac:.6}");
        let _ = writeln!(s, "realized_eta_det={:.6}", (vac - det.dark_mean) / ideal);
    }
    s
}

/// Reconstruct from a shot file and write the intermediate tables, the
/// sinogram, the Wigner grid and their renderings.
pub fn reconstruct_file(shots: &Path, out: &Path) -> Result<(SampleSet, Reconstruction)> {
    let set = load_samples(shots)?;
    if set.phases.is_empty() {
        return Err(Error::Empty("shot file holds no phase records"));
    }
    let rec = reconstruct(&set)?;
    write_reconstruction(&rec, out)?;
    Ok((set, rec))
}

fn write_table(table: &Table, out: &Path, name: &str, title: &str) -> Result<()> {
    let path = out.join(name);
    table.write(&path)?;
    write_text(&path.with_extension("svg"), &table_svg(table, title)?)
}

fn write_reconstruction(rec: &Reconstruction, out: &Path) -> Result<()> {
    let fit = rec.variance.fit;
    let mut variance = Table::new(&["phase", "ratio", "ratio_err", "fit"]);
    for p in &rec.variance.points {
        variance.push(vec![p.phase, p.ratio, p.ratio_err, fit.predict(p.phase)]);
    }
    write_table(&variance, out, VARIANCE_FILE, "Quadrature variance / vacuum")?;

    // single-mode photon statistics implied by the fitted variance
    let mut hist = Table::new(&["phase", "n", "density", "fit"]);
    for h in &rec.histograms {
        let model = ModeFit {
            mu: 1.0,
            mean: fit.predict(h.phase) * rec.calibration_mean,
            variance: f64::NAN,
        };
        for (c, d) in h.centers().into_iter().zip(&h.density) {
            hist.push(vec![h.phase, c, *d, model.density(c)]);
        }
    }
    write_table(&hist, out, HISTOGRAMS_FILE, "Photon-number histograms")?;

    let mut vac = Table::new(&["n", "density", "fit"]);
    let centers = rec.vacuum_histogram.centers();
    let mode = gamma_from_histogram(&rec.vacuum_histogram);
    for (c, d) in centers.into_iter().zip(&rec.vacuum_histogram.density) {
        vac.push(vec![c, *d, mode.map_or(f64::NAN, |m| m.density(c))]);
    }
    write_table(&vac, out, VACUUM_HISTOGRAM_FILE, "Amplified vacuum")?;

    let mut quad = Table::new(&["phase", "x", "density", "fit"]);
    for q in &rec.distributions {
        let var = fit.predict(q.phase) * VACUUM_VARIANCE;
        for (x, d) in q.x.iter().zip(&q.density) {
            let g = (-x * x / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt();
            quad.push(vec![q.phase, *x, *d, g]);
        }
    }
    write_table(&quad, out, QUADRATURES_FILE, "Quadrature distributions")?;

    let path = out.join(SINOGRAM_FILE);
    write_sinogram(&rec.sinogram, &path)?;
    write_text(&path.with_extension("svg"), &sinogram_svg(&rec.sinogram, "Sinogram"))?;

    let path = out.join(WIGNER_FILE);
    write_wigner(&rec.wigner, &path)?;
    write_text(
        &path.with_extension("svg"),
        &wigner_svg(&rec.wigner, "Reconstructed Wigner function", true),
    )
}

/// Gamma density matching the moments of a photon-number histogram.
fn gamma_from_histogram(h: &PhotonHistogram<f64>) -> Option<ModeFit<f64>> {
    let m = h.masses();
    let c = h.centers();
    let mean: f64 = m.iter().zip(&c).map(|(w, x)| w * x).sum();
    let var: f64 = m.iter().zip(&c).map(|(w, x)| w * (x - mean).powi(2)).sum();
    (var > 0.0 && mean > 0.0).then(|| ModeFit {
        mu: 2.0 * mean * mean / var,
        mean,
        variance: var,
    })
}

/// Analysis outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    pub metrics: StateMetrics,
    pub text: String,
}

/// Reconstruct from a shot file in memory and write the metrics report
/// (`metrics.txt`, one `key=value` per line) and a one-line `summary.txt`.
/// With `resamples`, a bootstrap interval report is written as well.
pub fn analyze_file(shots: &Path, out: &Path, resamples: Option<usize>) -> Result<AnalysisReport> {
    let set = load_samples(shots)?;
    let rec = reconstruct(&set)?;
    let metrics = analyze(&set, &rec)?;
    if metrics.mode_number.is_none() {
        log::warn!("{} vacuum records; mode number not estimated", set.vacuum.len());
    }
    let fit = rec.variance.fit;
    let mut text = metrics.to_report();
    let _ = writeln!(text, "fit_a={:.6}\nfit_a_err={:.6}", fit.a, fit.a_err);
    let _ = writeln!(text, "fit_d={:.6}\nfit_d_err={:.6}", fit.d, fit.d_err);
    let _ = writeln!(text, "calibration_mean={:.6}", rec.calibration_mean);
    let _ = writeln!(text, "records={}", set.record_count());
    let _ = writeln!(text, "seed={}", set.config.run.seed);
    let _ = writeln!(text, "gain_override_used={}", set.gain_override_used());
    write_text(&out.join(METRICS_FILE), &text)?;
    write_text(&out.join(SUMMARY_FILE), &format!("{}\n", metrics.to_line()))?;
    if let Some(n) = resamples {
        let summary = bootstrap(&set, n, set.config.run.seed)?;
        write_text(&out.join(BOOTSTRAP_FILE), &summary.to_report())?;
    }
    Ok(AnalysisReport { metrics, text })
}

/// `simulate`, then `reconstruct` and `analyze` on the written shot file.
pub fn pipeline(config: &ExperimentConfig, out: &Path, resamples: Option<usize>) -> Result<AnalysisReport> {
    simulate(config, out)?;
    let shots = out.join(SHOTS_FILE);
    reconstruct_file(&shots, out)?;
    analyze_file(&shots, out, resamples)
}

/// Render a recognized data file as SVG into `out` (or next to the input).
/// Returns the written path. Nothing is written on error.
pub fn plot_file(input: &Path, out: Option<&Path>) -> Result<PathBuf> {
    let text = std::fs::read_to_string(input).map_err(|e| Error::io(input, e))?;
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "plot".into());
    let svg = match detect_kind(&text) {
        Some(FileKind::Wigner) => wigner_svg(&parse_wigner(&text, input)?, &stem, true),
        Some(FileKind::Sinogram) => sinogram_svg(&parse_sinogram(&text, input)?, &stem),
        Some(FileKind::Table) => table_svg(&Table::parse(&text, input)?, &stem)?,
        None => {
            return Err(Error::Parse {
                path: input.to_path_buf(),
                line: 1,
                reason: "unrecognized file type".into(),
            })
        }
    };
    let dir = match out {
        Some(d) => d.to_path_buf(),
        None => input.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let path = dir.join(format!("{stem}.svg"));
    write_text(&path, &svg)?;
    Ok(path)
}

/// Squeezing of the demonstration input, `e^{-2·0.495}` ≈ −4.3 dB.
pub const DEMO_G_SQ: f64 = 0.495;
pub const DEMO_GAIN: f64 = 2.7;
pub const DEMO_PHASE: f64 = FRAC_PI_4;
const DEMO_GRID: usize = 201;
const DEMO_HALF: f64 = 7.0;
const DEMO_BINS: usize = 400;

/// Numbers behind the four demonstration panels.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplificationDemo {
    /// (a) input Wigner function.
    pub input: WignerGrid<f64>,
    /// (b) amplified Wigner function in the rotated frame `(x_θ, p_θ)`.
    pub amplified: WignerGrid<f64>,
    /// (c) photon-number distribution behind the amplifier.
    pub photons: PhotonHistogram<f64>,
    /// (d) recovered `P(x_θ)` on its nodes, with the exact marginal.
    pub x: Vec<f64>,
    pub recovered: Vec<f64>,
    pub exact: Vec<f64>,
    /// Variance of the recovered distribution and of the input marginal.
    pub recovered_variance: f64,
    pub marginal_variance: f64,
}

/// Amplification of a squeezed single photon (`G = 2.7`, `θ = π/4`):
/// input Wigner function, amplified Wigner function, photon-number
/// distribution, and the quadrature distribution recovered from it.
pub fn demo_fig1(out: &Path) -> Result<AmplificationDemo> {
    let spec = StateSpec::SqueezedFock {
        n: 1,
        g_sq: DEMO_G_SQ,
        squeeze_angle: FRAC_PI_2,
    };
    let input = build_wigner_grid(&spec, DEMO_GRID, DEMO_GRID, Extent::square(DEMO_HALF))?;

    let g = DEMO_GAIN.exp();
    let (c, s) = (DEMO_PHASE.cos(), DEMO_PHASE.sin());
    let stretched = Extent {
        x_min: -DEMO_HALF * g,
        x_max: DEMO_HALF * g,
        p_min: -DEMO_HALF / g,
        p_max: DEMO_HALF / g,
    };
    let amplified = WignerGrid::tabulate(DEMO_GRID, DEMO_GRID, stretched, |xt, pt| {
        let (a, b) = (xt / g, pt * g);
        wigner_value(&spec, a * c - b * s, a * s + b * c)
    })?;

    // P(N) from exact bin masses of the input marginal, N = e^{2G} x_θ²
    let state = PhaseSpaceState::from_spec(&spec, 601, DEMO_HALF * 1.5)?;
    let power = g * g;
    let n_max = power * DEMO_HALF * DEMO_HALF;
    let edges: Vec<f64> = (0..=DEMO_BINS).map(|k| n_max * k as f64 / DEMO_BINS as f64).collect();
    let fine = symmetric_grid(DEMO_HALF, 56_001);
    let dens = state.marginal_density(DEMO_PHASE, &fine);
    let dx = fine[1] - fine[0];
    let mut mass = vec![0.0; DEMO_BINS];
    for (x, d) in fine.iter().zip(&dens) {
        let n = power * x * x;
        let k = ((n / n_max * DEMO_BINS as f64) as usize).min(DEMO_BINS - 1);
        mass[k] += d * dx;
    }
    let density: Vec<f64> = mass
        .iter()
        .zip(edges.windows(2))
        .map(|(m, w)| m / (w[1] - w[0]))
        .collect();
    let photons = PhotonHistogram::from_density(DEMO_PHASE, edges, density)?;

    let recovered = to_quadrature_distribution(&photons, power * VACUUM_VARIANCE, NodePlacement::XMidpoint)?;
    let exact = state.marginal_density(DEMO_PHASE, &recovered.x);
    let marginal_variance = state.quadrature_variance(DEMO_PHASE);

    let fig = AmplificationDemo {
        recovered_variance: recovered.variance(),
        marginal_variance,
        x: recovered.x.clone(),
        recovered: recovered.density.clone(),
        exact,
        input,
        amplified,
        photons,
    };
    write_fig1(&fig, out)?;
    Ok(fig)
}

fn write_fig1(fig: &AmplificationDemo, out: &Path) -> Result<()> {
    let a = out.join("fig1a_input_wigner.csv");
    write_wigner(&fig.input, &a)?;
    write_text(
        &a.with_extension("svg"),
        &wigner_svg(&fig.input, "(a) squeezed single photon", true),
    )?;

    let b = out.join("fig1b_amplified_wigner.csv");
    write_wigner(&fig.amplified, &b)?;
    write_text(
        &b.with_extension("svg"),
        &wigner_svg(&fig.amplified, "(b) amplified, axes x_θ and p_θ", false),
    )?;

    let mut c = Table::new(&["n", "density"]);
    for (n, d) in fig.photons.centers().into_iter().zip(&fig.photons.density) {
        c.push(vec![n, *d]);
    }
    write_table(&c, out, "fig1c_photon_distribution.csv", "(c) P(N_θ)")?;

    let mut d = Table::new(&["x", "recovered", "exact"]);
    for ((x, r), e) in fig.x.iter().zip(&fig.recovered).zip(&fig.exact) {
        d.push(vec![*x, *r, *e]);
    }
    let path = out.join("fig1d_quadrature.csv");
    d.write(&path)?;
    let svg = line_plot_svg(&LinePlot {
        title: "(d) recovered P(x_θ)".into(),
        x_label: "x_θ".into(),
        y_label: "P(x_θ)".into(),
        series: vec![
            Series {
                label: "recovered".into(),
                x: fig.x.clone(),
                y: fig.recovered.clone(),
                style: Style::Line,
            },
            Series {
                label: "exact".into(),
                x: fig.x.clone(),
                y: fig.exact.clone(),
                style: Style::Dashed,
            },
        ],
    })?;
    write_text(&path.with_extension("svg"), &svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_2_PI;

    #[test]
    fn fig1_closure() {
        let dir = tempfile::tempdir().unwrap();
        let fig = demo_fig1(dir.path()).unwrap();
        assert!((fig.recovered_variance / fig.marginal_variance - 1.0).abs() < 0.02);
        assert!((fig.input.min_value() + FRAC_2_PI).abs() < 0.01);
        assert!((fig.photons.integral() - 1.0).abs() < 1e-9);
        assert!((fig.amplified.integral() - 1.0).abs() < 1e-2);
        for f in [
            "fig1a_input_wigner",
            "fig1b_amplified_wigner",
            "fig1c_photon_distribution",
            "fig1d_quadrature",
        ] {
            assert!(dir.path().join(format!("{f}.csv")).exists());
            assert!(dir.path().join(format!("{f}.svg")).exists());
        }
    }

    #[test]
    fn unknown_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("junk.txt");
        std::fs::write(&p, "hello world\n").unwrap();
        assert!(plot_file(&p, None).is_err());
        assert!(!dir.path().join("junk.svg").exists());
    }

    #[test]
    fn metadata_reports_detection_efficiency() {
        let mut cfg = ExperimentConfig::reference();
        cfg.run.shots_per_phase = 2000;
        cfg.run.phases = vec![0.0, FRAC_PI_2];
        let set = run_experiment(&cfg).unwrap();
        let text = run_metadata(&set);
        let eta: f64 = text
            .lines()
            .find_map(|l| l.strip_prefix("realized_eta_det="))
            .unwrap()
            .parse()
            .unwrap();
        assert!((eta / 0.044 - 1.0).abs() < 0.1, "{eta}");
    }
}
