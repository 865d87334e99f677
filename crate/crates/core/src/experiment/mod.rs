//! Simulated runs: configuration, shot generation and shot files.

mod config;
mod runner;
mod shots;

pub use config::{
    quadrant_phases, AmplifierConfig, ExperimentConfig, LossConfig, ReconstructionConfig, RowSource, RunConfig,
    DEFAULT_PHASE_COUNT, DEFAULT_SHOTS_PER_PHASE, MIN_SHOTS_PER_PHASE, REFERENCE_ETA_PRE, REFERENCE_GAIN,
    REFERENCE_G_SQ,
};
pub use runner::{
    expected_detected_mean, expected_vacuum_mean, lossy_input_state, run_experiment, PhaseRecords, SampleSet,
    STATE_GRID_POINTS,
};
pub use shots::{load_samples, persist_samples, FORMAT_VERSION};
