//! Zero-mean single-mode Gaussian states described by their quadrature
//! covariance matrix.

use crate::error::{Error, Result};
use crate::phase_space::VACUUM_VARIANCE;
use crate::scalar::Real;

/// Zero-mean Gaussian state. `cov` is the symmetric 2×2 covariance of `(x, p)`
/// in units where the vacuum is `diag(1/4, 1/4)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState<T> {
    cov: [[T; 2]; 2],
}

/// Unit vector selecting the quadrature `x_θ = x cos θ + p sin θ`.
#[inline]
pub(crate) fn quadrature_axis<T: Real>(theta: T) -> (T, T) {
    (theta.cos(), theta.sin())
}

impl<T: Real> GaussianState<T> {
    pub fn vacuum() -> Self {
        let v = T::lit(VACUUM_VARIANCE);
        Self {
            cov: [[v, T::zero()], [T::zero(), v]],
        }
    }

    /// Squeezed vacuum with squeezing parameter `g_sq`; the quadrature
    /// `x_{squeeze_angle}` carries variance `e^{-2 g_sq}/4` and its conjugate
    /// `e^{2 g_sq}/4`.
    pub fn squeezed_vacuum(g_sq: T, squeeze_angle: T) -> Result<Self> {
        if !(g_sq >= T::zero()) || !g_sq.is_finite() {
            return Err(Error::invalid("g_sq", format!("must be finite and >= 0, got {g_sq}")));
        }
        let quarter = T::lit(VACUUM_VARIANCE);
        let two = T::lit(2.0);
        let squeezed = quarter * (-two * g_sq).exp();
        let anti = quarter * (two * g_sq).exp();
        Ok(Self::from_principal(squeezed, anti, squeeze_angle))
    }

    /// State with variance `var_axis` along `x_angle` and `var_conj` along the
    /// conjugate quadrature `x_{angle+π/2}`.
    pub fn from_principal(var_axis: T, var_conj: T, angle: T) -> Self {
        let (c, s) = quadrature_axis(angle);
        let xx = var_axis * c * c + var_conj * s * s;
        let pp = var_axis * s * s + var_conj * c * c;
        let xp = (var_axis - var_conj) * c * s;
        Self {
            cov: [[xx, xp], [xp, pp]],
        }
    }

    /// Build from a covariance matrix, checking symmetry and the uncertainty
    /// bound `det(cov) >= 1/16`.
    pub fn from_cov(cov: [[T; 2]; 2]) -> Result<Self> {
        let asym = (cov[0][1] - cov[1][0]).abs();
        let scale = cov[0][0].abs() + cov[1][1].abs();
        if asym > T::lit(1e-9) * scale {
            return Err(Error::invalid("cov", "matrix is not symmetric"));
        }
        if !(cov[0][0] > T::zero() && cov[1][1] > T::zero()) {
            return Err(Error::invalid("cov", "diagonal must be positive"));
        }
        let st = Self { cov };
        let bound = T::lit(1.0 / 16.0);
        if st.det() < bound * (T::one() - T::lit(1e-9)) {
            return Err(Error::invalid(
                "cov",
                format!("det {} violates the uncertainty bound 1/16", st.det()),
            ));
        }
        Ok(st)
    }

    pub fn cov(&self) -> [[T; 2]; 2] {
        self.cov
    }

    pub fn det(&self) -> T {
        self.cov[0][0] * self.cov[1][1] - self.cov[0][1] * self.cov[1][0]
    }

    /// `Var(x_θ) = uᵀ cov u` with `u = (cos θ, sin θ)`.
    pub fn quadrature_variance(&self, theta: T) -> T {
        let (c, s) = quadrature_axis(theta);
        self.cov[0][0] * c * c + T::lit(2.0) * self.cov[0][1] * c * s + self.cov[1][1] * s * s
    }

    /// Covariance of the rotated pair `(x_θ, p_θ)`, `p_θ = x_{θ+π/2}`.
    pub fn rotated_cov(&self, theta: T) -> [[T; 2]; 2] {
        let half_pi = T::FRAC_PI_2();
        let vx = self.quadrature_variance(theta);
        let vp = self.quadrature_variance(theta + half_pi);
        let (c, s) = quadrature_axis(theta);
        // cov(x_θ, p_θ) with p_θ = -x sinθ + p cosθ
        let xp = (self.cov[1][1] - self.cov[0][0]) * c * s + self.cov[0][1] * (c * c - s * s);
        [[vx, xp], [xp, vp]]
    }

    /// The state rotated in phase space by `angle` (counter-clockwise).
    pub fn rotate(&self, angle: T) -> Self {
        // Rotating the state by φ maps quadrature x_θ of the result onto x_{θ-φ}.
        let r = self.rotated_cov(-angle);
        Self { cov: r }
    }

    /// Pre-amplification loss channel with transmission `eta`.
    pub fn apply_loss(&self, eta: T) -> Result<Self> {
        check_transmission(eta)?;
        let mix = (T::one() - eta) * T::lit(VACUUM_VARIANCE);
        let mut cov = self.cov;
        for (i, row) in cov.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = eta * *v + if i == j { mix } else { T::zero() };
            }
        }
        Ok(Self { cov })
    }

    /// Purity `Tr ρ² = 1/(4 √det cov)`.
    pub fn purity(&self) -> T {
        T::one() / (T::lit(4.0) * self.det().sqrt())
    }

    /// Wigner function value at `(x, p)`.
    pub fn wigner(&self, x: T, p: T) -> T {
        let det = self.det();
        let (a, b, d) = (self.cov[0][0], self.cov[0][1], self.cov[1][1]);
        // rᵀ cov⁻¹ r
        let q = (d * x * x - T::lit(2.0) * b * x * p + a * p * p) / det;
        (-(q * T::lit(0.5))).exp() / (T::lit(2.0) * T::PI() * det.sqrt())
    }

    /// Closed-form marginal density of `x_θ` at `x`.
    pub fn marginal_at(&self, theta: T, x: T) -> T {
        let var = self.quadrature_variance(theta);
        (-(x * x) / (T::lit(2.0) * var)).exp() / (T::lit(2.0) * T::PI() * var).sqrt()
    }

    /// Principal variances `(min, max)` of the covariance matrix.
    pub fn principal_variances(&self) -> (T, T) {
        let tr = self.cov[0][0] + self.cov[1][1];
        let disc = ((self.cov[0][0] - self.cov[1][1]).powi(2) + T::lit(4.0) * self.cov[0][1] * self.cov[0][1]).sqrt();
        ((tr - disc) * T::lit(0.5), (tr + disc) * T::lit(0.5))
    }
}

pub(crate) fn check_transmission<T: Real>(eta: T) -> Result<()> {
    if eta >= T::zero() && eta <= T::one() {
        Ok(())
    } else {
        Err(Error::invalid(
            "eta",
            format!("transmission must lie in [0, 1], got {eta}"),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{E, FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn vacuum_is_identity_quarter() {
        let v = GaussianState::<f64>::squeezed_vacuum(0.0, 0.3).unwrap();
        assert_relative_eq!(v.cov()[0][0], 0.25, epsilon = 1e-15);
        assert_relative_eq!(v.cov()[1][1], 0.25, epsilon = 1e-15);
        assert_relative_eq!(v.cov()[0][1], 0.0, epsilon = 1e-15);
        assert_relative_eq!(v.purity(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn squeezed_along_half_pi() {
        let s = GaussianState::<f64>::squeezed_vacuum(1.0, FRAC_PI_2).unwrap();
        assert_relative_eq!(s.quadrature_variance(FRAC_PI_2), (-2.0f64).exp() / 4.0, epsilon = 1e-12);
        assert_relative_eq!(s.quadrature_variance(0.0), E * E / 4.0, epsilon = 1e-12);
        assert_relative_eq!(s.quadrature_variance(FRAC_PI_2), 0.033834, epsilon = 1e-6);
        assert_relative_eq!(s.quadrature_variance(0.0), 1.847264, epsilon = 1e-6);
        // pure
        assert_relative_eq!(s.det(), 1.0 / 16.0, epsilon = 1e-12);
    }

    #[test]
    fn negative_squeezing_rejected() {
        assert!(GaussianState::<f64>::squeezed_vacuum(-0.1, 0.0).is_err());
    }

    #[test]
    fn loss_endpoints_and_reference_value() {
        let s = GaussianState::<f64>::squeezed_vacuum(1.0, FRAC_PI_2).unwrap();
        assert_eq!(s.apply_loss(1.0).unwrap(), s);
        let vac = s.apply_loss(0.0).unwrap();
        assert_relative_eq!(vac.cov()[0][0], 0.25, epsilon = 1e-15);
        assert_relative_eq!(vac.cov()[1][1], 0.25, epsilon = 1e-15);
        let lossy = s.apply_loss(0.941).unwrap();
        let var = lossy.quadrature_variance(FRAC_PI_2);
        assert_relative_eq!(var, 0.941 * 0.033834 + 0.059 * 0.25, epsilon = 1e-6);
        assert_relative_eq!(var / 0.25, 0.1863, epsilon = 1e-4);
        assert_relative_eq!(10.0 * (var / 0.25).log10(), -7.30, epsilon = 5e-3);
        assert!(s.apply_loss(1.2).is_err());
        assert!(s.apply_loss(-0.01).is_err());
    }

    #[test]
    fn rotation_moves_the_squeezed_axis() {
        let s = GaussianState::<f64>::squeezed_vacuum(0.7, 0.0).unwrap();
        let r = s.rotate(FRAC_PI_4);
        assert_relative_eq!(
            r.quadrature_variance(FRAC_PI_4),
            s.quadrature_variance(0.0),
            epsilon = 1e-12
        );
        let rc = s.rotated_cov(0.3);
        let direct = s.rotate(-0.3).cov();
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(rc[i][j], direct[i][j], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn from_cov_checks_uncertainty() {
        assert!(GaussianState::<f64>::from_cov([[0.1, 0.0], [0.0, 0.1]]).is_err());
        assert!(GaussianState::<f64>::from_cov([[0.25, 0.1], [0.0, 0.25]]).is_err());
        assert!(GaussianState::<f64>::from_cov([[0.5, 0.0], [0.0, 0.5]]).is_ok());
    }

    #[test]
    fn wigner_peak_and_principal_axes() {
        let v = GaussianState::<f64>::vacuum();
        assert_relative_eq!(v.wigner(0.0, 0.0), 2.0 / std::f64::consts::PI, epsilon = 1e-14);
        let s = GaussianState::<f64>::squeezed_vacuum(0.5, 0.4).unwrap();
        let (lo, hi) = s.principal_variances();
        assert_relative_eq!(lo, (-1.0f64).exp() / 4.0, epsilon = 1e-12);
        assert_relative_eq!(hi, (1.0f64).exp() / 4.0, epsilon = 1e-12);
    }
}
