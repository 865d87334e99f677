//! Randomized checks of structural invariants.

use std::f64::consts::{FRAC_PI_2, PI};

use opatomo::detection::{detect, DetectorModel};
use opatomo::metrics::{fidelity_to_pure, purity_grid, squeezing_db};
use opatomo::opa::{amplified_photon_number, mean_photon_number, OpaParams};
use opatomo::phase_space::{
    build_wigner_grid, symmetric_grid, CatParity, Extent, GaussianState, PhaseSpaceState, QuadratureSampler, StateSpec,
    WignerGrid,
};
use opatomo::reconstruction::{
    histogram_photons, inverse_radon, symmetrize, to_quadrature_distribution, NodePlacement, ReconstructionParams,
    Sinogram,
};
use opatomo::rng::StreamFactory;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(a, b)| 0.5 * (a[1] - a[0]) * (b[0] + b[1]))
        .sum()
}

fn any_spec() -> impl Strategy<Value = StateSpec<f64>> {
    prop_oneof![
        Just(StateSpec::Vacuum),
        (0.0..1.0f64, 0.0..PI).prop_map(|(g_sq, squeeze_angle)| StateSpec::SqueezedVacuum { g_sq, squeeze_angle }),
        (0u32..4).prop_map(|n| StateSpec::Fock { n }),
        (1u32..3, 0.0..0.5f64, 0.0..PI).prop_map(|(n, g_sq, squeeze_angle)| StateSpec::SqueezedFock {
            n,
            g_sq,
            squeeze_angle
        }),
        (0.5..2.0f64, any::<bool>()).prop_map(|(amplitude, even)| StateSpec::Cat {
            amplitude,
            parity: if even { CatParity::Even } else { CatParity::Odd },
        }),
    ]
}

fn grid_for(spec: &StateSpec<f64>) -> WignerGrid<f64> {
    let half = spec.suggested_half_extent();
    build_wigner_grid(spec, 201, 201, Extent::square(half)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn grids_are_normalized_and_inversion_symmetric(spec in any_spec(), theta in 0.0..PI) {
        let w = grid_for(&spec);
        prop_assert!((w.integral() - 1.0).abs() < 1e-3);
        prop_assert!(w.inversion_asymmetry() < 1e-9);
        let half = w.extent().radius();
        let x = symmetric_grid(half, 801);
        let m = w.project(theta, &x);
        prop_assert!((trapezoid(&x, &m) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn pure_states_have_unit_fidelity_with_themselves(spec in any_spec()) {
        let w = grid_for(&spec);
        let f = fidelity_to_pure(&w, &spec).unwrap();
        prop_assert!(f.value >= 0.99, "{spec:?}: {}", f.value);
        prop_assert!(f.value <= 1.0 + 1e-2);
    }

    /// Pointwise agreement needs the grid to resolve the narrow quadrature
    /// (about a dozen nodes per standard deviation).
    #[test]
    fn gaussian_grid_marginals_match_closed_form(g_sq in 0.0..0.5f64, angle in 0.0..PI, theta in 0.0..PI) {
        let spec = StateSpec::SqueezedVacuum { g_sq, squeeze_angle: angle };
        let g = GaussianState::squeezed_vacuum(g_sq, angle).unwrap();
        let w = build_wigner_grid(&spec, 401, 401, Extent::square(spec.suggested_half_extent())).unwrap();
        let x = symmetric_grid(3.0, 121);
        let grid = w.project(theta, &x);
        let peak = g.marginal_at(theta, 0.0);
        for (xi, m) in x.iter().zip(&grid) {
            prop_assert!((m - g.marginal_at(theta, *xi)).abs() < 1e-3 * peak);
        }
    }

    #[test]
    fn loss_contracts_towards_vacuum(g_sq in 0.0..1.5f64, angle in 0.0..PI, theta in 0.0..PI) {
        let g = GaussianState::squeezed_vacuum(g_sq, angle).unwrap();
        let mut last = f64::INFINITY;
        for k in 0..=10 {
            let eta = 1.0 - k as f64 / 10.0;
            let dev = (g.apply_loss(eta).unwrap().quadrature_variance(theta) - 0.25).abs();
            prop_assert!(dev <= last + 1e-15);
            last = dev;
        }
    }

    #[test]
    fn gaussian_purity_on_grid(v1 in 0.05..1.5f64, v2 in 0.05..1.5f64, angle in 0.0..PI) {
        // any physical covariance with variances inside the default window
        prop_assume!(v1 * v2 >= 1.0 / 16.0);
        let g = GaussianState::from_principal(v1, v2, angle);
        let w = WignerGrid::tabulate(201, 201, Extent::square(6.0), |x, p| g.wigner(x, p)).unwrap();
        let expected = 1.0 / (4.0 * g.det().sqrt());
        prop_assert!((purity_grid(&w.normalized().unwrap()).unwrap() / expected - 1.0).abs() < 0.02);
    }

    #[test]
    fn amplification_is_phase_covariant(g_sq in 0.0..1.0f64, angle in 0.0..PI, theta in 0.0..PI, seed in any::<u64>()) {
        let g = GaussianState::squeezed_vacuum(g_sq, angle).unwrap();
        let direct = QuadratureSampler::new(&PhaseSpaceState::Gaussian(g), theta).unwrap();
        let rotated = QuadratureSampler::new(&PhaseSpaceState::Gaussian(g.rotate(-theta)), 0.0).unwrap();
        let at_theta = OpaParams::new(4.4, theta, true).unwrap();
        let at_zero = OpaParams::new(4.4, 0.0, true).unwrap();
        let streams = StreamFactory::new(seed);
        for i in 0..200 {
            let (x1, p1) = direct.sample_pair(&mut streams.stream(1, 0, i));
            let (x2, p2) = rotated.sample_pair(&mut streams.stream(1, 0, i));
            let n1 = amplified_photon_number(x1, p1.unwrap(), &at_theta);
            let n2 = amplified_photon_number(x2, p2.unwrap(), &at_zero);
            prop_assert!((n1 - n2).abs() <= 1e-9 * (1.0 + n1.abs()));
        }
    }

    #[test]
    fn mean_photon_number_grows_with_gain(g_sq in 0.0..1.0f64, theta in 0.0..PI, exact in any::<bool>()) {
        let g = GaussianState::squeezed_vacuum(g_sq, FRAC_PI_2).unwrap();
        let mut last = f64::NEG_INFINITY;
        for k in 0..20 {
            let params = OpaParams::new(1.5 + 0.2 * k as f64, theta, exact).unwrap();
            let n = mean_photon_number(&g, &params);
            prop_assert!(n > last);
            last = n;
        }
    }

    #[test]
    fn symmetrization_is_idempotent(v in prop::collection::vec(0.0..10.0f64, 1..64)) {
        let once = symmetrize(&v);
        prop_assert_eq!(symmetrize(&once), once.clone());
        let rev: Vec<f64> = once.iter().rev().copied().collect();
        prop_assert_eq!(rev, once);
    }

    #[test]
    fn squeezing_db_is_monotone_and_zero_at_vacuum(a in 0.01..10.0f64, b in 0.01..10.0f64) {
        prop_assert_eq!(squeezing_db(1.0).unwrap(), 0.0);
        let (da, db) = (squeezing_db(a).unwrap(), squeezing_db(b).unwrap());
        prop_assert_eq!(a < b, da < db);
        prop_assert!((da - db - squeezing_db(a / b).unwrap()).abs() < 1e-9);
    }
}

fn amplified_vacuum(shots: usize, seed: u64) -> Vec<f64> {
    let streams = StreamFactory::new(seed);
    let amp = (2.0 * 4.4f64).exp();
    (0..shots as u64)
        .map(|i| {
            let z: f64 = streams.stream(2, 0, i).sample(StandardNormal);
            amp * 0.25 * z * z
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    /// Rescaling every photon number (state and calibration alike) does not
    /// change the transformed distribution. Powers of two scale exactly.
    #[test]
    fn transform_is_calibration_invariant(exp in -6i32..7, c in 0.01..100.0f64, seed in any::<u64>()) {
        let n = amplified_vacuum(2000, seed);
        let n_vac = n.iter().sum::<f64>() / n.len() as f64;
        let reference = to_quadrature_distribution(
            &histogram_photons(&n, 0.0, 35, 0.0).unwrap(), n_vac, NodePlacement::XMidpoint).unwrap();

        let pow2 = 2f64.powi(exp);
        let scaled: Vec<f64> = n.iter().map(|v| v * pow2).collect();
        let exact = to_quadrature_distribution(
            &histogram_photons(&scaled, 0.0, 35, 0.0).unwrap(), n_vac * pow2, NodePlacement::XMidpoint).unwrap();
        prop_assert_eq!(&exact.x, &reference.x);
        prop_assert_eq!(&exact.density, &reference.density);

        let scaled: Vec<f64> = n.iter().map(|v| v * c).collect();
        let close = to_quadrature_distribution(
            &histogram_photons(&scaled, 0.0, 35, 0.0).unwrap(), n_vac * c, NodePlacement::XMidpoint).unwrap();
        for (a, b) in close.density.iter().zip(&reference.density) {
            prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1e-12));
        }
    }

    /// Without dark noise, the detector only rescales: `N/⟨N⟩` is the same
    /// set of numbers for every efficiency.
    #[test]
    fn detection_preserves_normalized_shape(seed in any::<u64>()) {
        let n = amplified_vacuum(8000, seed);
        let normalized = |eta: f64| {
            let det = DetectorModel { eta_det: eta, dark_mean: 0.0, dark_std: 0.0, clamp_negative: false };
            let streams = StreamFactory::new(seed);
            let m: Vec<f64> = n.iter().enumerate()
                .map(|(i, &v)| detect(v, &det, &mut streams.stream(9, 0, i as u64)))
                .collect();
            let mean = m.iter().sum::<f64>() / m.len() as f64;
            let mut r: Vec<f64> = m.into_iter().map(|v| v / mean).collect();
            r.sort_by(f64::total_cmp);
            r
        };
        let base = normalized(1.0);
        for eta in [0.05, 0.2] {
            let other = normalized(eta);
            // two-sample KS distance between identical-up-to-rounding samples
            let ks = base.iter().zip(&other).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prop_assert!(ks < 1e-9);
        }
    }
}

#[test]
fn dark_floor_is_linear_in_efficiency() {
    let n = amplified_vacuum(8000, 5);
    let etas = [0.01, 0.044, 0.1, 0.3, 0.6, 1.0];
    let means: Vec<f64> = etas
        .iter()
        .map(|&eta| {
            let det = DetectorModel {
                eta_det: eta,
                dark_mean: 2.0,
                dark_std: 1.0,
                clamp_negative: false,
            };
            let streams = StreamFactory::new(17);
            let total: f64 = n
                .iter()
                .enumerate()
                .map(|(i, &v)| detect(v, &det, &mut streams.stream(9, 0, i as u64)) - det.dark_mean)
                .sum();
            total / n.len() as f64
        })
        .collect();
    // ordinary least squares and R²
    let k = etas.len() as f64;
    let mx = etas.iter().sum::<f64>() / k;
    let my = means.iter().sum::<f64>() / k;
    let sxy: f64 = etas.iter().zip(&means).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = etas.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let ss_res: f64 = etas
        .iter()
        .zip(&means)
        .map(|(x, y)| (y - my - slope * (x - mx)).powi(2))
        .sum();
    let ss_tot: f64 = means.iter().map(|y| (y - my).powi(2)).sum();
    assert!(1.0 - ss_res / ss_tot > 0.999);
}

#[test]
fn reconstruction_reproduces_its_projections() {
    let g = GaussianState::squeezed_vacuum(0.6, FRAC_PI_2)
        .unwrap()
        .apply_loss(0.9)
        .unwrap();
    let state = PhaseSpaceState::Gaussian(g);
    let phases = Sinogram::<f64>::uniform_angles(36);
    let x = symmetric_grid(6.0, 601);
    let sino = Sinogram::from_state(&state, &phases, x.clone()).unwrap();
    let params = ReconstructionParams {
        nx: 201,
        np: 201,
        extent: Extent::square(4.0),
        ..ReconstructionParams::default()
    };
    let w = inverse_radon(&sino, &params).unwrap();
    let inside: Vec<usize> = (0..x.len()).filter(|&i| x[i].abs() <= 4.0).collect();
    let xs: Vec<f64> = inside.iter().map(|&i| x[i]).collect();
    for (k, &theta) in phases.iter().enumerate() {
        let proj = w.project(theta, &xs);
        let row: Vec<f64> = inside.iter().map(|&i| sino.row(k)[i]).collect();
        let diff: Vec<f64> = proj.iter().zip(&row).map(|(a, b)| (a - b).abs()).collect();
        let l1 = trapezoid(&xs, &diff);
        assert!(l1 < 0.05, "θ={theta}: L1 {l1}");
    }
}
