//! From detected photon numbers to a reconstructed Wigner function.

mod histogram;
mod quadrature;
mod radon;
mod sinogram;
mod variance;

pub use histogram::{histogram_photons, HistogramNote, PhotonHistogram, DEFAULT_BINS};
pub use quadrature::{
    calibration_scale, ks_critical_value, quadrature_samples, symmetrize, to_quadrature_distribution, BinnedMass,
    NodePlacement, QuadratureDistribution,
};
pub use radon::{
    backproject, filter_projections, inverse_radon, FilterWindow, Interpolation, ReconstructionParams, DEFAULT_CUTOFF,
    MIN_ANGLES,
};
pub use sinogram::{build_sinogram, Sinogram, SinogramOptions, MAX_ANGULAR_GAP};
pub use variance::{fit_cos2, variance_curve, variance_curve_weighted, VarianceCurve, VarianceFit, VariancePoint};
