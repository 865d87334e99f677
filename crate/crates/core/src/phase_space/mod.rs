//! Phase-space representation of single-mode states.
//!
//! Quadrature units are fixed so that the vacuum has variance 1/4 in every
//! quadrature (`Δx_vac = 0.5`) and `W_vac(x, p) = (2/π) exp(−2(x² + p²))`.

mod gaussian;
mod sampling;
mod wigner;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{linspace, Real};

pub use gaussian::GaussianState;
pub use sampling::{sample_quadrature, QuadratureSampler, MARGINAL_TABLE_POINTS};
pub use wigner::{
    apply_loss_to_grid, build_wigner_grid, wigner_value, Extent, WignerGrid, DEFAULT_GRID_POINTS, DEFAULT_HALF_EXTENT,
    MAX_MASS_OUTSIDE,
};

pub(crate) use gaussian::quadrature_axis;

/// Quadrature variance of the vacuum.
pub const VACUUM_VARIANCE: f64 = 0.25;

/// Photon-number expectation of a zero-mean state, `⟨x²⟩ + ⟨p²⟩ − 1/2`.
pub fn mean_photon_number_of<T: Real>(var_x: T, var_p: T) -> T {
    var_x + var_p - T::lit(0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatParity {
    Even,
    Odd,
}

/// Input states supported by the tomography scheme. All kinds have
/// inversion-symmetric Wigner functions, `W(x, p) = W(−x, −p)`.
///
/// Angles are in radians; `squeeze_angle` is the angle of the squeezed
/// quadrature (`π/2` squeezes `p`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateSpec<T> {
    Vacuum,
    SqueezedVacuum { g_sq: T, squeeze_angle: T },
    Fock { n: u32 },
    SqueezedFock { n: u32, g_sq: T, squeeze_angle: T },
    Cat { amplitude: T, parity: CatParity },
}

impl<T: Real> StateSpec<T> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StateSpec::SqueezedVacuum { g_sq, squeeze_angle }
            | StateSpec::SqueezedFock {
                g_sq, squeeze_angle, ..
            } => {
                if !(g_sq >= T::zero()) || !g_sq.is_finite() {
                    return Err(Error::invalid("g_sq", format!("must be finite and >= 0, got {g_sq}")));
                }
                if !squeeze_angle.is_finite() {
                    return Err(Error::invalid("squeeze_angle", "must be finite"));
                }
            }
            StateSpec::Cat { amplitude, .. } => {
                if !(amplitude > T::zero()) || !amplitude.is_finite() {
                    return Err(Error::invalid(
                        "amplitude",
                        format!("must be finite and > 0, got {amplitude}"),
                    ));
                }
            }
            StateSpec::Fock { n } if n > 40 => {
                return Err(Error::invalid("n", format!("Fock number {n} too large (max 40)")));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, StateSpec::Vacuum | StateSpec::SqueezedVacuum { .. })
    }

    /// Quadrature covariance `[[⟨x²⟩, ⟨xp⟩], [⟨xp⟩, ⟨p²⟩]]` of the state.
    pub fn second_moments(&self) -> [[T; 2]; 2] {
        let two = T::lit(2.0);
        match *self {
            StateSpec::Vacuum => GaussianState::vacuum().cov(),
            StateSpec::SqueezedVacuum { g_sq, squeeze_angle } => GaussianState::squeezed_vacuum(g_sq, squeeze_angle)
                .map(|g| g.cov())
                .unwrap_or([[T::nan(); 2]; 2]),
            StateSpec::Fock { n } => {
                let v = (two * T::lit(n as f64) + T::one()) / T::lit(4.0);
                [[v, T::zero()], [T::zero(), v]]
            }
            StateSpec::SqueezedFock { n, g_sq, squeeze_angle } => {
                let v = (two * T::lit(n as f64) + T::one()) / T::lit(4.0);
                GaussianState::from_principal(v * (-two * g_sq).exp(), v * (two * g_sq).exp(), squeeze_angle).cov()
            }
            StateSpec::Cat { amplitude, parity } => {
                let sign = match parity {
                    CatParity::Even => T::one(),
                    CatParity::Odd => -T::one(),
                };
                let a2 = amplitude * amplitude;
                let ov = (-two * a2).exp();
                // ⟨x²⟩ = 1/4 + α²(1 ± ov)⁻¹·(1 ∓ ...) evaluated from the Wigner integral
                let xx = T::lit(0.25) + a2 / (T::one() + sign * ov);
                let pp = T::lit(0.25) - sign * a2 * ov / (T::one() + sign * ov);
                [[xx, T::zero()], [T::zero(), pp]]
            }
        }
    }

    /// Squeezing parameter used by the amplification-sufficiency check:
    /// `g_sq` for squeezed kinds, otherwise `¼ ln(V_max / V_min)`
    /// from the second moments (zero for rotationally symmetric states).
    pub fn effective_squeezing(&self) -> T {
        match *self {
            StateSpec::SqueezedVacuum { g_sq, .. } | StateSpec::SqueezedFock { g_sq, .. } => g_sq,
            StateSpec::Vacuum | StateSpec::Fock { .. } => T::zero(),
            StateSpec::Cat { .. } => {
                let m = self.second_moments();
                let g = GaussianState::from_principal(m[0][0], m[1][1], T::zero());
                let (lo, hi) = g.principal_variances();
                ((hi / lo).ln() * T::lit(0.25)).max(T::zero())
            }
        }
    }

    /// Half-width of a square window holding all but a negligible fraction of
    /// the state: 6 standard deviations of the widest quadrature, at least 4.
    pub fn suggested_half_extent(&self) -> T {
        let m = self.second_moments();
        let g = GaussianState::from_principal(m[0][0], m[1][1], T::zero());
        let (_, hi) = g.principal_variances();
        let widest = (hi.max(m[0][0]).max(m[1][1])).sqrt();
        (T::lit(6.0) * widest).max(T::lit(DEFAULT_HALF_EXTENT))
    }
}

/// Construct a Gaussian state from a vacuum or squeezed-vacuum spec.
pub fn make_gaussian<T: Real>(spec: &StateSpec<T>) -> Result<GaussianState<T>> {
    match *spec {
        StateSpec::Vacuum => Ok(GaussianState::vacuum()),
        StateSpec::SqueezedVacuum { g_sq, squeeze_angle } => GaussianState::squeezed_vacuum(g_sq, squeeze_angle),
        _ => Err(Error::invalid(
            "state",
            "make_gaussian accepts vacuum or squeezed_vacuum only",
        )),
    }
}

/// A state either in closed Gaussian form or tabulated on a grid.
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseSpaceState<T> {
    Gaussian(GaussianState<T>),
    Grid(WignerGrid<T>),
}

impl<T: Real> PhaseSpaceState<T> {
    /// Gaussian specs become closed-form states; the rest are tabulated on a
    /// `points × points` grid of half-width `half_extent`.
    pub fn from_spec(spec: &StateSpec<T>, points: usize, half_extent: T) -> Result<Self> {
        if spec.is_gaussian() {
            Ok(Self::Gaussian(make_gaussian(spec)?))
        } else {
            Ok(Self::Grid(build_wigner_grid(
                spec,
                points,
                points,
                Extent::square(half_extent),
            )?))
        }
    }

    /// Marginal density of `x_θ` on `x_grid`, unit integral.
    pub fn marginal_density(&self, theta: T, x_grid: &[T]) -> Vec<T> {
        marginal_density(self, theta, x_grid)
    }

    /// Pre-amplification loss with transmission `eta`.
    pub fn apply_pre_amp_loss(&self, eta: T) -> Result<Self> {
        apply_pre_amp_loss(self, eta)
    }

    pub fn quadrature_variance(&self, theta: T) -> T {
        match self {
            Self::Gaussian(g) => g.quadrature_variance(theta),
            Self::Grid(w) => {
                let m = w.second_moments();
                let (c, s) = quadrature_axis(theta);
                m[0][0] * c * c + T::lit(2.0) * m[0][1] * c * s + m[1][1] * s * s
            }
        }
    }

    /// Tabulate on a grid (closed-form Gaussians are evaluated exactly).
    pub fn to_grid(&self, nx: usize, np: usize, extent: Extent<T>) -> Result<WignerGrid<T>> {
        match self {
            Self::Gaussian(g) => WignerGrid::tabulate(nx, np, extent, |x, p| g.wigner(x, p))?.normalized(),
            Self::Grid(w) if w.nx() == nx && w.np() == np && w.extent() == extent => Ok(w.clone()),
            Self::Grid(w) => WignerGrid::tabulate(nx, np, extent, |x, p| w.value_at(x, p))?.normalized(),
        }
    }
}

/// Forward Radon projection `P(x_θ) = ∫ W(x_θ cos θ − s sin θ, x_θ sin θ + s cos θ) ds`.
///
/// Gaussian states use the closed-form normal density; grids are projected
/// numerically. The result is normalized to unit integral over `x_grid`.
pub fn marginal_density<T: Real>(state: &PhaseSpaceState<T>, theta: T, x_grid: &[T]) -> Vec<T> {
    match state {
        PhaseSpaceState::Gaussian(g) => {
            let raw: Vec<T> = x_grid.iter().map(|&x| g.marginal_at(theta, x)).collect();
            let norm = crate::scalar::trapezoid(x_grid, &raw);
            raw.into_iter().map(|v| v / norm).collect()
        }
        PhaseSpaceState::Grid(w) => w.project(theta, x_grid),
    }
}

pub fn apply_pre_amp_loss<T: Real>(state: &PhaseSpaceState<T>, eta: T) -> Result<PhaseSpaceState<T>> {
    match state {
        PhaseSpaceState::Gaussian(g) => Ok(PhaseSpaceState::Gaussian(g.apply_loss(eta)?)),
        PhaseSpaceState::Grid(w) => Ok(PhaseSpaceState::Grid(apply_loss_to_grid(w, eta)?)),
    }
}

/// Uniform symmetric abscissa `[-half, half]` with `n` nodes.
pub fn symmetric_grid<T: Real>(half: T, n: usize) -> Vec<T> {
    linspace(-half, half, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn convention_vacuum_photon_number_is_zero() {
        assert_eq!(mean_photon_number_of(0.25_f64, 0.25), 0.0);
        // single photon: ⟨x²⟩ = ⟨p²⟩ = 3/4
        let m = StateSpec::<f64>::Fock { n: 1 }.second_moments();
        assert_relative_eq!(mean_photon_number_of(m[0][0], m[1][1]), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn ideal_antisqueezing_in_db() {
        let g = make_gaussian(&StateSpec::SqueezedVacuum {
            g_sq: 1.0_f64,
            squeeze_angle: FRAC_PI_2,
        })
        .unwrap();
        let db = 10.0 * (g.quadrature_variance(0.0) / VACUUM_VARIANCE).log10();
        assert_relative_eq!(db, 20.0 / std::f64::consts::LN_10, epsilon = 1e-12);
        assert_relative_eq!(db, 8.686, epsilon = 1e-3);
    }

    #[test]
    fn make_gaussian_rejects_non_gaussian() {
        assert!(make_gaussian(&StateSpec::<f64>::Fock { n: 1 }).is_err());
        assert!(make_gaussian(&StateSpec::SqueezedVacuum {
            g_sq: -1.0_f64,
            squeeze_angle: 0.0
        })
        .is_err());
    }

    #[test]
    fn cat_moments_match_grid() {
        for parity in [CatParity::Even, CatParity::Odd] {
            let spec = StateSpec::Cat {
                amplitude: 1.2_f64,
                parity,
            };
            let grid = build_wigner_grid(&spec, 201, 201, Extent::square(5.0)).unwrap();
            let m = grid.second_moments();
            let a = spec.second_moments();
            assert_relative_eq!(m[0][0], a[0][0], max_relative = 1e-4);
            assert_relative_eq!(m[1][1], a[1][1], max_relative = 1e-4);
            assert!(spec.effective_squeezing() > 0.0);
        }
    }

    #[test]
    fn vacuum_marginal_variance() {
        let state = PhaseSpaceState::Gaussian(GaussianState::<f64>::vacuum());
        let xs = symmetric_grid(4.0, 801);
        for theta in [0.0, 0.4, PI / 2.0, 2.9] {
            let m = state.marginal_density(theta, &xs);
            let var: f64 =
                crate::scalar::trapezoid(&xs, &xs.iter().zip(&m).map(|(x, p)| x * x * p).collect::<Vec<_>>());
            assert_relative_eq!(var, 0.25, epsilon = 1e-6);
        }
    }

    #[test]
    fn spec_round_trips_through_toml() {
        #[derive(Serialize, Deserialize, PartialEq, Debug)]
        struct Wrap {
            state: StateSpec<f64>,
        }
        let w = Wrap {
            state: StateSpec::Cat {
                amplitude: 1.25,
                parity: CatParity::Odd,
            },
        };
        let text = toml::to_string(&w).unwrap();
        assert!(text.contains("kind = \"cat\""));
        let back: Wrap = toml::from_str(&text).unwrap();
        assert_eq!(back, w);
    }
}
