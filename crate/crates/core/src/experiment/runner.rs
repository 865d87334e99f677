//! Shot-by-shot simulation of the measurement chain.

use rayon::prelude::*;

use crate::detection::{admix_modes, detect};
use crate::error::{Error, Result};
use crate::experiment::config::ExperimentConfig;
use crate::opa::{amplified_photon_number, check_sufficiency, mean_photon_number, OpaParams, SufficiencyReport};
use crate::phase_space::{make_gaussian, GaussianState, PhaseSpaceState, QuadratureSampler};
use crate::rng::{tag, StreamFactory};

/// Grid resolution used to tabulate non-Gaussian input states.
pub const STATE_GRID_POINTS: usize = 301;

/// Detected photon numbers at one amplifier phase, in shot order.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRecords {
    pub phase: f64,
    pub n_detected: Vec<f64>,
}

impl PhaseRecords {
    pub fn mean(&self) -> f64 {
        mean(&self.n_detected)
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        std_error(&self.n_detected)
    }
}

/// Output of a simulated run: records per phase plus the amplified-vacuum
/// calibration run, with the configuration that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub config: ExperimentConfig,
    pub sufficiency: SufficiencyReport<f64>,
    pub phases: Vec<PhaseRecords>,
    /// Empty when the configuration disables the vacuum run.
    pub vacuum: Vec<f64>,
}

impl SampleSet {
    pub fn is_empty(&self) -> bool {
        self.phases.is_empty() && self.vacuum.is_empty()
    }

    pub fn record_count(&self) -> usize {
        self.phases.iter().map(|p| p.n_detected.len()).sum::<usize>() + self.vacuum.len()
    }

    pub fn vacuum_mean(&self) -> Option<f64> {
        (!self.vacuum.is_empty()).then(|| mean(&self.vacuum))
    }

    /// Dark-corrected amplified-vacuum mean `⟨N_vac⟩ − dark_mean`.
    pub fn calibration_mean(&self) -> Result<f64> {
        let vac = self.vacuum_mean().ok_or(Error::Empty("no vacuum calibration run"))?;
        Ok(vac - self.config.detector.dark_mean)
    }

    /// True if the run went ahead despite failing the sufficiency check.
    pub fn gain_override_used(&self) -> bool {
        !self.sufficiency.sufficient
    }
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub(crate) fn std_error(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = mean(v);
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (var / n).sqrt()
}

/// Input state after the pre-amplification loss.
pub fn lossy_input_state(config: &ExperimentConfig) -> Result<PhaseSpaceState<f64>> {
    let spec = &config.state;
    let state = PhaseSpaceState::from_spec(spec, STATE_GRID_POINTS, spec.suggested_half_extent())?;
    state.apply_pre_amp_loss(config.loss.eta_pre)
}

/// Model prediction of the raw detected mean at `phase` for Gaussian inputs
/// (`None` otherwise). Ignores the clamping of negative photon numbers.
pub fn expected_detected_mean(config: &ExperimentConfig, phase: f64) -> Option<f64> {
    let g = make_gaussian(&config.state)
        .ok()?
        .apply_loss(config.loss.eta_pre)
        .ok()?;
    Some(expected_mean_for(&g, config, phase))
}

/// Predicted raw detected mean of the vacuum calibration run.
pub fn expected_vacuum_mean(config: &ExperimentConfig) -> f64 {
    expected_mean_for(&GaussianState::vacuum(), config, 0.0)
}

fn expected_mean_for(g: &GaussianState<f64>, config: &ExperimentConfig, phase: f64) -> f64 {
    let params = OpaParams {
        gain: config.opa.gain,
        theta: phase,
        exact_model: config.opa.exact_model,
    };
    let secondary = config.mode.secondary_fraction * params.power_gain() / 4.0;
    config.detector.eta_det * (mean_photon_number(g, &params) + secondary) + config.detector.dark_mean
}

/// Simulate the configured run.
///
/// For each phase, quadratures of the lossy input are sampled, mapped to
/// photon numbers by the amplifier, mixed with the secondary mode and passed
/// through the detector. Every shot draws from its own random stream keyed
/// by `(seed, phase index, shot index)`, so the output does not depend on the
/// thread count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<SampleSet> {
    config.validate()?;
    let sufficiency = check_sufficiency(config.opa.gain, config.effective_squeezing());
    if !sufficiency.sufficient {
        if !config.opa.allow_insufficient_gain {
            return Err(Error::InsufficientGain {
                margin: sufficiency.margin,
            });
        }
        log::warn!(
            "gain margin {:.3} below the sufficiency threshold; continuing on request",
            sufficiency.margin
        );
    }
    let state = lossy_input_state(config)?;
    let shots = config.run.shots_per_phase;
    let streams = StreamFactory::new(config.run.seed);

    let mut phases = Vec::with_capacity(config.run.phases.len());
    for (group, &phase) in config.run.phases.iter().enumerate() {
        let sampler = QuadratureSampler::new(&state, phase)?;
        let n_detected = simulate_shots(config, &sampler, phase, shots, &streams, tag::PHASE_SHOTS, group as u32);
        phases.push(PhaseRecords { phase, n_detected });
    }
    let vacuum = if config.run.include_vacuum_run {
        let vac = PhaseSpaceState::Gaussian(GaussianState::vacuum());
        let sampler = QuadratureSampler::new(&vac, 0.0)?;
        simulate_shots(config, &sampler, 0.0, shots, &streams, tag::VACUUM_SHOTS, 0)
    } else {
        Vec::new()
    };
    Ok(SampleSet {
        config: config.clone(),
        sufficiency,
        phases,
        vacuum,
    })
}

fn simulate_shots(
    config: &ExperimentConfig,
    sampler: &QuadratureSampler<f64>,
    phase: f64,
    shots: usize,
    streams: &StreamFactory,
    stream_tag: u32,
    group: u32,
) -> Vec<f64> {
    let params = OpaParams {
        gain: config.opa.gain,
        theta: phase,
        exact_model: config.opa.exact_model,
    };
    let amp = params.power_gain();
    let vacuum_scale = amp / 4.0;
    (0..shots as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = streams.stream(stream_tag, group, i);
            let (x, p) = sampler.sample_pair(&mut rng);
            let n = match p {
                Some(p) => amplified_photon_number(x, p, &params),
                // tabulated marginals carry no p sample: use the leading term
                None => amp * x * x,
            };
            let n = admix_modes(n, &config.mode, &mut rng, vacuum_scale);
            detect(n, &config.detector, &mut rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::StateSpec;

    fn small(shots: usize) -> ExperimentConfig {
        let mut c = ExperimentConfig::reference();
        c.run.shots_per_phase = shots;
        c
    }

    #[test]
    fn reference_means() {
        let cfg = small(8000);
        let set = run_experiment(&cfg).unwrap();
        let dark = cfg.detector.dark_mean;
        let n0 = set.phases[0].mean() - dark;
        let nv = set.vacuum_mean().unwrap() - dark;
        let n_sq = set.phases[18].mean() - dark;
        assert!((n0 / 511.0 - 1.0).abs() < 0.05, "⟨N_0⟩ = {n0}");
        assert!((nv / 73.0 - 1.0).abs() < 0.05, "⟨N_vac⟩ = {nv}");
        let want = expected_detected_mean(&cfg, set.phases[18].phase).unwrap() - dark;
        assert!((n_sq / want - 1.0).abs() < 0.05, "⟨N_π/2⟩ = {n_sq} vs {want}");
    }

    #[test]
    fn means_follow_the_model() {
        let cfg = small(4000);
        let set = run_experiment(&cfg).unwrap();
        for p in &set.phases {
            let want = expected_detected_mean(&cfg, p.phase).unwrap();
            assert!(
                (p.mean() - want).abs() < 3.0 * p.std_error(),
                "θ={}: {} vs {want}",
                p.phase,
                p.mean()
            );
        }
        let v = expected_vacuum_mean(&cfg);
        assert!((set.vacuum_mean().unwrap() - v).abs() < 3.0 * std_error(&set.vacuum));
    }

    #[test]
    fn vacuum_is_phase_independent() {
        // a single seed fails a 2σ test 5 % of the time; look at 20 of them
        let beyond: usize = (0..20)
            .filter(|&seed| {
                let mut cfg = small(2000);
                cfg.state = StateSpec::Vacuum;
                cfg.run.phases = vec![0.0, 1.0];
                cfg.run.seed = seed;
                let set = run_experiment(&cfg).unwrap();
                let (a, b) = (&set.phases[0], &set.phases[1]);
                let se = (a.std_error().powi(2) + b.std_error().powi(2)).sqrt();
                (a.mean() - b.mean()).abs() >= 2.0 * se
            })
            .count();
        assert!(
            beyond <= 3,
            "{beyond} of 20 seeds differ by more than 2 standard errors"
        );
    }

    #[test]
    fn deterministic() {
        let cfg = small(500);
        assert_eq!(run_experiment(&cfg).unwrap(), run_experiment(&cfg).unwrap());
    }

    #[test]
    fn insufficient_gain_needs_override() {
        let mut cfg = small(200);
        cfg.opa.gain = 2.0;
        assert!(matches!(run_experiment(&cfg), Err(Error::InsufficientGain { .. })));
        cfg.opa.allow_insufficient_gain = true;
        let set = run_experiment(&cfg).unwrap();
        assert!(set.gain_override_used());
    }

    #[test]
    fn grid_states_run() {
        let mut cfg = small(4000);
        cfg.state = StateSpec::Fock { n: 1 };
        cfg.run.phases = vec![0.0, 0.8];
        let set = run_experiment(&cfg).unwrap();
        // ⟨x²⟩ = 3/4 for one photon, lossy: η·3/4 + (1−η)/4
        let want_var = 0.941 * 0.75 + 0.059 * 0.25;
        let want = cfg.detector.eta_det * (8.8f64).exp() * want_var + cfg.detector.dark_mean;
        for p in &set.phases {
            assert!((p.mean() / want - 1.0).abs() < 0.06, "{} vs {want}", p.mean());
        }
    }
}
