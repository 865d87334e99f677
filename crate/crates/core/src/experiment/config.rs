//! Run configuration, read from sectioned TOML.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detection::{DetectorModel, ModeModel};
use crate::error::{Error, Result};
use crate::phase_space::StateSpec;
use crate::reconstruction::{FilterWindow, Interpolation, NodePlacement, DEFAULT_BINS, DEFAULT_CUTOFF};

pub const MIN_SHOTS_PER_PHASE: usize = 100;
pub const DEFAULT_PHASE_COUNT: usize = 19;
pub const DEFAULT_SHOTS_PER_PHASE: usize = 8000;
/// Transmission before the amplifier: 0.6 % propagation loss and the
/// 5.3 % loss equivalent of imperfect mode overlap.
pub const REFERENCE_ETA_PRE: f64 = 0.941;
pub const REFERENCE_GAIN: f64 = 4.4;
pub const REFERENCE_G_SQ: f64 = 1.0;

/// `n` uniformly spaced phases from 0 to π/2 inclusive.
pub fn quadrant_phases(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n)
            .map(|k| {
                if k == n - 1 {
                    FRAC_PI_2
                } else {
                    FRAC_PI_2 * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplifierConfig {
    pub gain: f64,
    #[serde(default = "yes")]
    pub exact_model: bool,
    /// Run even if the gain fails the sufficiency check.
    #[serde(default)]
    pub allow_insufficient_gain: bool,
}

impl Default for AmplifierConfig {
    fn default() -> Self {
        Self {
            gain: REFERENCE_GAIN,
            exact_model: true,
            allow_insufficient_gain: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossConfig {
    pub eta_pre: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            eta_pre: REFERENCE_ETA_PRE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_phases")]
    pub phases: Vec<f64>,
    #[serde(default = "default_shots")]
    pub shots_per_phase: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "yes")]
    pub include_vacuum_run: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            phases: default_phases(),
            shots_per_phase: DEFAULT_SHOTS_PER_PHASE,
            bins: DEFAULT_BINS,
            seed: default_seed(),
            include_vacuum_run: true,
        }
    }
}

/// What the sinogram rows are built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowSource {
    /// `GaussianFit` for Gaussian input states, `Histogram` otherwise.
    #[default]
    Auto,
    /// Photon histograms through the amplified-quadrature transform.
    Histogram,
    /// Zero-mean normal rows with the measured variance ratio (Gaussian
    /// states only).
    GaussianFit,
    /// Closed-form marginals of the lossy input state; ignores the shots.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructionConfig {
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default = "default_half_extent")]
    pub half_extent: f64,
    #[serde(default)]
    pub filter: FilterWindow,
    #[serde(default = "default_cutoff")]
    pub cutoff: f64,
    #[serde(default)]
    pub interpolation: Interpolation,
    #[serde(default)]
    pub row_source: RowSource,
    #[serde(default)]
    pub node_placement: NodePlacement,
    /// Fill `(π/2, π)` by reflection of the measured quadrant.
    #[serde(default = "yes")]
    pub mirror: bool,
    /// Node spacing of the shared sinogram grid.
    #[serde(default = "default_sinogram_spacing")]
    pub sinogram_spacing: f64,
    /// Reference state for the fidelity; defaults to the input state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<StateSpec<f64>>,
}

impl RowSource {
    pub fn resolve(self, state: &StateSpec<f64>) -> Self {
        match self {
            RowSource::Auto if state.is_gaussian() => RowSource::GaussianFit,
            RowSource::Auto => RowSource::Histogram,
            other => other,
        }
    }
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        Self {
            grid_points: default_grid_points(),
            half_extent: default_half_extent(),
            filter: FilterWindow::default(),
            cutoff: DEFAULT_CUTOFF,
            interpolation: Interpolation::default(),
            row_source: RowSource::default(),
            node_placement: NodePlacement::default(),
            mirror: true,
            sinogram_spacing: default_sinogram_spacing(),
            target: None,
        }
    }
}

fn yes() -> bool {
    true
}
fn default_phases() -> Vec<f64> {
    quadrant_phases(DEFAULT_PHASE_COUNT)
}
fn default_shots() -> usize {
    DEFAULT_SHOTS_PER_PHASE
}
fn default_bins() -> usize {
    DEFAULT_BINS
}
fn default_seed() -> u64 {
    1
}
fn default_grid_points() -> usize {
    601
}
fn default_half_extent() -> f64 {
    6.0
}
fn default_cutoff() -> f64 {
    DEFAULT_CUTOFF
}
fn default_sinogram_spacing() -> f64 {
    0.02
}
fn default_state() -> StateSpec<f64> {
    StateSpec::SqueezedVacuum {
        g_sq: REFERENCE_G_SQ,
        squeeze_angle: FRAC_PI_2,
    }
}

/// Complete description of a simulated run. Every section is optional in
/// the file; missing sections take the values of the reference experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_state")]
    pub state: StateSpec<f64>,
    #[serde(default)]
    pub opa: AmplifierConfig,
    #[serde(default)]
    pub loss: LossConfig,
    #[serde(default = "DetectorModel::reference")]
    pub detector: DetectorModel<f64>,
    #[serde(default)]
    pub mode: ModeModel<f64>,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub reconstruction: ReconstructionConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::reference()
    }
}

impl ExperimentConfig {
    /// Squeezed vacuum (`G_sq = 1`), `η_pre = 0.941`, `G = 4.4`,
    /// `η_det = 0.044`, dark noise 2 ± 1, 19 phases × 8000 shots.
    pub fn reference() -> Self {
        Self {
            state: default_state(),
            opa: AmplifierConfig::default(),
            loss: LossConfig::default(),
            detector: DetectorModel::reference(),
            mode: ModeModel::single(),
            run: RunConfig::default(),
            reconstruction: ReconstructionConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |e: Error| Error::Config(e.to_string());
        self.state.validate().map_err(cfg)?;
        let eta = self.loss.eta_pre;
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::Config(format!("loss.eta_pre must lie in (0, 1], got {eta}")));
        }
        if !(self.opa.gain >= 0.0) || !self.opa.gain.is_finite() {
            return Err(Error::Config(format!(
                "opa.gain must be finite and >= 0, got {}",
                self.opa.gain
            )));
        }
        self.detector.validate().map_err(cfg)?;
        self.mode.validate().map_err(cfg)?;
        let run = &self.run;
        if run.shots_per_phase < MIN_SHOTS_PER_PHASE {
            return Err(Error::Config(format!(
                "run.shots_per_phase must be >= {MIN_SHOTS_PER_PHASE}, got {}",
                run.shots_per_phase
            )));
        }
        if run.phases.is_empty() {
            return Err(Error::Config("run.phases must not be empty".into()));
        }
        if run.phases.iter().any(|&t| !(0.0..PI).contains(&t)) {
            return Err(Error::Config("run.phases must lie in [0, π)".into()));
        }
        if run.phases.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("run.phases must be strictly increasing".into()));
        }
        if run.phases.len() > u32::MAX as usize {
            return Err(Error::Config("too many phases".into()));
        }
        if run.bins == 0 {
            return Err(Error::Config("run.bins must be >= 1".into()));
        }
        let r = &self.reconstruction;
        if r.grid_points < 3 {
            return Err(Error::Config("reconstruction.grid_points must be >= 3".into()));
        }
        if !(r.half_extent > 0.0) || !r.half_extent.is_finite() {
            return Err(Error::Config("reconstruction.half_extent must be > 0".into()));
        }
        if !(r.cutoff > 0.0 && r.cutoff <= 1.0) {
            return Err(Error::Config(format!(
                "reconstruction.cutoff must lie in (0, 1], got {}",
                r.cutoff
            )));
        }
        if !(r.sinogram_spacing > 0.0) || !r.sinogram_spacing.is_finite() {
            return Err(Error::Config("reconstruction.sinogram_spacing must be > 0".into()));
        }
        if r.row_source == RowSource::GaussianFit && !self.state.is_gaussian() {
            return Err(Error::Config(
                "reconstruction.row_source = \"gaussian_fit\" requires a Gaussian state".into(),
            ));
        }
        if let Some(t) = &r.target {
            t.validate().map_err(cfg)?;
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// `section.key = value` pairs, values in TOML syntax.
    pub fn flatten(&self) -> Vec<(String, String)> {
        let value = toml::Value::try_from(self).expect("config serializes to TOML");
        let mut out = Vec::new();
        if let toml::Value::Table(sections) = value {
            for (section, body) in sections {
                if let toml::Value::Table(fields) = body {
                    for (key, v) in fields {
                        out.push((format!("{section}.{key}"), v.to_string()));
                    }
                }
            }
        }
        out
    }

    /// Inverse of [`flatten`](Self::flatten).
    pub fn unflatten(pairs: &[(String, String)]) -> Result<Self> {
        let mut sections: Vec<(&str, Vec<(&str, &str)>)> = Vec::new();
        for (key, value) in pairs {
            let (section, field) = key
                .split_once('.')
                .ok_or_else(|| Error::Config(format!("key '{key}' has no section")))?;
            match sections.iter_mut().find(|(s, _)| *s == section) {
                Some((_, fields)) => fields.push((field, value)),
                None => sections.push((section, vec![(field, value)])),
            }
        }
        let mut text = String::new();
        for (section, fields) in sections {
            text.push_str(&format!("[{section}]\n"));
            for (k, v) in fields {
                text.push_str(&format!("{k} = {v}\n"));
            }
        }
        Self::from_toml_str(&text)
    }

    /// `G_sq` (or its second-moment equivalent) used for the sufficiency check.
    pub fn effective_squeezing(&self) -> f64 {
        self.state.effective_squeezing()
    }
}
