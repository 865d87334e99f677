//! Monte Carlo front end: i.i.d. quadrature samples from a state's marginal.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::phase_space::PhaseSpaceState;
use crate::rng::{tag, StreamFactory};
use crate::scalar::{linspace, Real};

/// Nodes of the tabulated marginal used for inverse-CDF sampling.
pub const MARGINAL_TABLE_POINTS: usize = 4096;

/// Negative marginal values above this fraction of the peak are treated as
/// discretization noise and clipped.
const NEGATIVITY_CLIP: f64 = 1e-3;

/// Draws `x_θ` (and, for Gaussian states, the conjugate `p_θ`) at a fixed
/// phase.
#[derive(Debug, Clone)]
pub enum QuadratureSampler<T> {
    /// Cholesky factor `[[l11, 0], [l21, l22]]` of the `(x_θ, p_θ)` covariance.
    Gaussian { l11: T, l21: T, l22: T },
    /// Tabulated inverse CDF.
    Tabulated { x: Vec<T>, cdf: Vec<T> },
}

impl<T: Real> QuadratureSampler<T> {
    pub fn new(state: &PhaseSpaceState<T>, theta: T) -> Result<Self> {
        match state {
            PhaseSpaceState::Gaussian(g) => {
                let c = g.rotated_cov(theta);
                let l11 = c[0][0].sqrt();
                let l21 = c[0][1] / l11;
                let l22 = (c[1][1] - l21 * l21).max(T::zero()).sqrt();
                Ok(Self::Gaussian { l11, l21, l22 })
            }
            PhaseSpaceState::Grid(w) => {
                let half = w.extent().radius();
                let x = linspace(-half, half, MARGINAL_TABLE_POINTS);
                let density = w.project(theta, &x);
                Self::from_density(x, density)
            }
        }
    }

    /// Inverse-CDF sampler from a tabulated density on an increasing grid.
    pub fn from_density(x: Vec<T>, mut density: Vec<T>) -> Result<Self> {
        if x.len() < 2 || x.len() != density.len() {
            return Err(Error::invalid(
                "density",
                "need matching abscissa and density of length >= 2",
            ));
        }
        let peak = density.iter().copied().fold(T::zero(), T::max);
        let floor = -T::lit(NEGATIVITY_CLIP) * peak;
        for v in density.iter_mut() {
            if *v < floor {
                return Err(Error::NegativeMarginal { value: v.as_f64() });
            }
            if *v < T::zero() {
                *v = T::zero();
            }
        }
        let mut cdf = Vec::with_capacity(x.len());
        cdf.push(T::zero());
        for k in 1..x.len() {
            let area = (x[k] - x[k - 1]) * (density[k] + density[k - 1]) * T::lit(0.5);
            cdf.push(cdf[k - 1] + area);
        }
        let total = cdf[cdf.len() - 1];
        if !(total > T::zero()) {
            return Err(Error::Degenerate("marginal has zero mass".into()));
        }
        cdf.iter_mut().for_each(|c| *c = *c / total);
        Ok(Self::Tabulated { x, cdf })
    }

    /// One `(x_θ, p_θ)` draw. Tabulated samplers return `None` for `p_θ`.
    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (T, Option<T>) {
        match self {
            Self::Gaussian { l11, l21, l22 } => {
                let z1 = T::lit(rng.sample::<f64, _>(StandardNormal));
                let z2 = T::lit(rng.sample::<f64, _>(StandardNormal));
                (*l11 * z1, Some(*l21 * z1 + *l22 * z2))
            }
            Self::Tabulated { x, cdf } => {
                let u = T::lit(rng.random::<f64>());
                (invert_cdf(x, cdf, u), None)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        self.sample_pair(rng).0
    }
}

fn invert_cdf<T: Real>(x: &[T], cdf: &[T], u: T) -> T {
    let k = cdf.partition_point(|&c| c < u);
    if k == 0 {
        return x[0];
    }
    if k >= cdf.len() {
        return x[x.len() - 1];
    }
    let (c0, c1) = (cdf[k - 1], cdf[k]);
    let w = if c1 > c0 { (u - c0) / (c1 - c0) } else { T::zero() };
    x[k - 1] + w * (x[k] - x[k - 1])
}

/// `n_shots` i.i.d. samples of `x_θ`. Sample `i` is drawn from its own
/// counter-addressed stream, so the output is independent of thread count.
pub fn sample_quadrature<T: Real>(
    state: &PhaseSpaceState<T>,
    theta: T,
    n_shots: usize,
    rng_seed: u64,
) -> Result<Vec<T>> {
    if n_shots == 0 {
        return Err(Error::invalid("n_shots", "must be >= 1"));
    }
    let sampler = QuadratureSampler::new(state, theta)?;
    let streams = StreamFactory::new(rng_seed);
    Ok((0..n_shots as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = streams.stream(tag::QUADRATURE_SAMPLES, 0, i);
            sampler.sample(&mut rng)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::{GaussianState, StateSpec};
    use std::f64::consts::FRAC_PI_2;

    fn variance(v: &[f64]) -> f64 {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
    }

    #[test]
    fn vacuum_sample_variance() {
        let s = PhaseSpaceState::Gaussian(GaussianState::<f64>::vacuum());
        let xs = sample_quadrature(&s, 0.3, 100_000, 11).unwrap();
        assert!((variance(&xs) - 0.25).abs() < 0.005, "{}", variance(&xs));
    }

    #[test]
    fn squeezed_vacuum_antisqueezed_variance() {
        let s = PhaseSpaceState::Gaussian(GaussianState::<f64>::squeezed_vacuum(1.0, FRAC_PI_2).unwrap());
        let xs = sample_quadrature(&s, 0.0, 100_000, 12).unwrap();
        assert!((variance(&xs) - 1.847).abs() < 0.03, "{}", variance(&xs));
    }

    #[test]
    fn fock_one_second_moment() {
        let s = PhaseSpaceState::from_spec(&StateSpec::<f64>::Fock { n: 1 }, 201, 4.0).unwrap();
        let xs = sample_quadrature(&s, 0.7, 100_000, 13).unwrap();
        let m2 = xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64;
        assert!((m2 - 0.75).abs() < 0.01, "{m2}");
    }

    #[test]
    fn zero_shots_rejected() {
        let s = PhaseSpaceState::Gaussian(GaussianState::<f64>::vacuum());
        assert!(sample_quadrature(&s, 0.0, 0, 1).is_err());
    }

    #[test]
    fn strongly_negative_density_is_an_error() {
        let x = vec![-1.0, 0.0, 1.0];
        assert!(QuadratureSampler::from_density(x.clone(), vec![1.0, -0.5, 1.0]).is_err());
        assert!(QuadratureSampler::from_density(x, vec![1.0, -1e-6, 1.0]).is_ok());
    }

    #[test]
    fn seed_determinism() {
        let s = PhaseSpaceState::Gaussian(GaussianState::<f64>::vacuum());
        let a = sample_quadrature(&s, 0.0, 1000, 5).unwrap();
        let b = sample_quadrature(&s, 0.0, 1000, 5).unwrap();
        assert_eq!(a, b);
    }
}
