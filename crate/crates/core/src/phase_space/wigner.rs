//! Wigner functions sampled on a uniform `(x, p)` grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase_space::gaussian::{check_transmission, quadrature_axis, GaussianState};
use crate::phase_space::{CatParity, StateSpec, VACUUM_VARIANCE};
use crate::scalar::{linspace, trapezoid, Real};

/// Half-width of the default square grid, in quadrature units.
pub const DEFAULT_HALF_EXTENT: f64 = 4.0;
/// Default number of nodes per axis.
pub const DEFAULT_GRID_POINTS: usize = 201;
/// Largest probability mass allowed outside a constructed grid.
pub const MAX_MASS_OUTSIDE: f64 = 1e-3;

/// Rectangular phase-space window `[x_min, x_max] × [p_min, p_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extent<T> {
    pub x_min: T,
    pub x_max: T,
    pub p_min: T,
    pub p_max: T,
}

impl<T: Real> Extent<T> {
    pub fn square(half_width: T) -> Self {
        Self {
            x_min: -half_width,
            x_max: half_width,
            p_min: -half_width,
            p_max: half_width,
        }
    }

    /// Largest distance from the origin to a corner.
    pub fn radius(&self) -> T {
        let x = self.x_min.abs().max(self.x_max.abs());
        let p = self.p_min.abs().max(self.p_max.abs());
        (x * x + p * p).sqrt()
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.x_max > self.x_min && self.p_max > self.p_min) {
            return Err(Error::invalid("extent", "max must exceed min on both axes"));
        }
        Ok(())
    }
}

/// Wigner function on an `nx × np` grid. Values are stored row-major with the
/// `p` index outermost: `values[j * nx + i] = W(x_i, p_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid<T> {
    nx: usize,
    np: usize,
    extent: Extent<T>,
    values: Vec<T>,
}

impl<T: Real> WignerGrid<T> {
    pub fn from_values(nx: usize, np: usize, extent: Extent<T>, values: Vec<T>) -> Result<Self> {
        extent.validate()?;
        if nx < 2 || np < 2 {
            return Err(Error::invalid("grid", "need at least 2 nodes per axis"));
        }
        if values.len() != nx * np {
            return Err(Error::invalid(
                "values",
                format!("expected {} values, got {}", nx * np, values.len()),
            ));
        }
        Ok(Self { nx, np, extent, values })
    }

    /// Tabulate `f(x, p)` on the grid nodes.
    pub fn tabulate<F>(nx: usize, np: usize, extent: Extent<T>, f: F) -> Result<Self>
    where
        F: Fn(T, T) -> T + Sync,
    {
        extent.validate()?;
        if nx < 2 || np < 2 {
            return Err(Error::invalid("grid", "need at least 2 nodes per axis"));
        }
        let xs = linspace(extent.x_min, extent.x_max, nx);
        let ps = linspace(extent.p_min, extent.p_max, np);
        let values: Vec<T> = ps
            .par_iter()
            .flat_map_iter(|&p| xs.iter().map(move |&x| (x, p)).collect::<Vec<_>>())
            .map(|(x, p)| f(x, p))
            .collect();
        Ok(Self { nx, np, extent, values })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn np(&self) -> usize {
        self.np
    }

    pub fn extent(&self) -> Extent<T> {
        self.extent
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn dx(&self) -> T {
        (self.extent.x_max - self.extent.x_min) / T::from_usize_lossy(self.nx - 1)
    }

    pub fn dp(&self) -> T {
        (self.extent.p_max - self.extent.p_min) / T::from_usize_lossy(self.np - 1)
    }

    pub fn x_nodes(&self) -> Vec<T> {
        linspace(self.extent.x_min, self.extent.x_max, self.nx)
    }

    pub fn p_nodes(&self) -> Vec<T> {
        linspace(self.extent.p_min, self.extent.p_max, self.np)
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.values[j * self.nx + i]
    }

    pub fn min_value(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// Trapezoidal integral of `g(x, p, W)` over the grid.
    fn integrate_with<F: Fn(T, T, T) -> T>(&self, g: F) -> T {
        let xs = self.x_nodes();
        let ps = self.p_nodes();
        let half = T::lit(0.5);
        let mut total = T::zero();
        for (j, &p) in ps.iter().enumerate() {
            let wp = if j == 0 || j == self.np - 1 { half } else { T::one() };
            let mut row = T::zero();
            for (i, &x) in xs.iter().enumerate() {
                let wx = if i == 0 || i == self.nx - 1 { half } else { T::one() };
                row = row + wx * g(x, p, self.at(i, j));
            }
            total = total + wp * row;
        }
        total * self.dx() * self.dp()
    }

    /// `∬ W dx dp`.
    pub fn integral(&self) -> T {
        self.integrate_with(|_, _, w| w)
    }

    /// `∬ W² dx dp`.
    pub fn integral_of_square(&self) -> T {
        self.integrate_with(|_, _, w| w * w)
    }

    /// `∬ W·V dx dp` for two grids on the same nodes.
    pub fn overlap(&self, other: &Self) -> Result<T> {
        if self.nx != other.nx || self.np != other.np || self.extent != other.extent {
            return Err(Error::invalid("grid", "overlap requires identical grids"));
        }
        let shadow = Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| *a * *b).collect(),
            ..self.clone()
        };
        Ok(shadow.integral())
    }

    /// Second moments `[[⟨x²⟩, ⟨xp⟩], [⟨xp⟩, ⟨p²⟩]]` of the (normalized) grid.
    pub fn second_moments(&self) -> [[T; 2]; 2] {
        let norm = self.integral();
        let xx = self.integrate_with(|x, _, w| x * x * w) / norm;
        let pp = self.integrate_with(|_, p, w| p * p * w) / norm;
        let xp = self.integrate_with(|x, p, w| x * p * w) / norm;
        [[xx, xp], [xp, pp]]
    }

    /// Returns a copy scaled to unit integral.
    pub fn normalized(&self) -> Result<Self> {
        let integral = self.integral();
        if !(integral.abs() > T::zero()) || !integral.is_finite() {
            return Err(Error::NotNormalized {
                integral: integral.as_f64(),
            });
        }
        Ok(self.map(|w| w / integral))
    }

    pub(crate) fn map<F: Fn(T) -> T>(&self, f: F) -> Self {
        Self {
            values: self.values.iter().map(|&w| f(w)).collect(),
            ..self.clone()
        }
    }

    /// Bilinear interpolation at an arbitrary point; zero outside the grid.
    pub fn value_at(&self, x: T, p: T) -> T {
        let e = &self.extent;
        if x < e.x_min || x > e.x_max || p < e.p_min || p > e.p_max {
            return T::zero();
        }
        let fx = (x - e.x_min) / self.dx();
        let fp = (p - e.p_min) / self.dp();
        let i0 = fx.floor().to_usize().unwrap_or(0).min(self.nx - 2);
        let j0 = fp.floor().to_usize().unwrap_or(0).min(self.np - 2);
        let tx = fx - T::from_usize_lossy(i0);
        let tp = fp - T::from_usize_lossy(j0);
        let one = T::one();
        let w00 = self.at(i0, j0);
        let w10 = self.at(i0 + 1, j0);
        let w01 = self.at(i0, j0 + 1);
        let w11 = self.at(i0 + 1, j0 + 1);
        (one - tx) * (one - tp) * w00 + tx * (one - tp) * w10 + (one - tx) * tp * w01 + tx * tp * w11
    }

    /// Largest `|W(x,p) − W(−x,−p)|` over the grid. Exact node pairing requires
    /// an extent symmetric about the origin.
    pub fn inversion_asymmetry(&self) -> T {
        let mut worst = T::zero();
        for j in 0..self.np {
            for i in 0..self.nx {
                let d = (self.at(i, j) - self.at(self.nx - 1 - i, self.np - 1 - j)).abs();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Forward Radon projection onto `x_θ`, evaluated at `x_grid`, normalized to
    /// unit integral over `x_grid`.
    pub fn project(&self, theta: T, x_grid: &[T]) -> Vec<T> {
        let raw = self.project_raw(theta, x_grid);
        let norm = trapezoid(x_grid, &raw);
        if norm > T::zero() {
            raw.into_iter().map(|v| v / norm).collect()
        } else {
            raw
        }
    }

    /// Unnormalized line integrals `∫ W(t u + s u⊥) ds`.
    pub fn project_raw(&self, theta: T, x_grid: &[T]) -> Vec<T> {
        let (c, s) = quadrature_axis(theta);
        let radius = self.extent.radius();
        let step = self.dx().min(self.dp());
        let n_s = (T::lit(2.0) * radius / step).ceil().to_usize().unwrap_or(1).max(1) + 1;
        let s_nodes = linspace(-radius, radius, n_s);
        let ds = s_nodes[1] - s_nodes[0];
        x_grid
            .par_iter()
            .map(|&t| {
                let mut acc = T::zero();
                for &sv in &s_nodes {
                    // point t·u + s·u⊥ with u⊥ = (−sin θ, cos θ)
                    acc = acc + self.value_at(t * c - sv * s, t * s + sv * c);
                }
                // endpoints lie outside the grid, so plain sum × ds is the trapezoid rule
                acc * ds
            })
            .collect()
    }
}

/// Laguerre polynomial `L_n(y)` by upward recurrence.
pub(crate) fn laguerre<T: Real>(n: u32, y: T) -> T {
    let mut prev = T::one();
    if n == 0 {
        return prev;
    }
    let mut cur = T::one() - y;
    for k in 1..n {
        let kf = T::lit(k as f64);
        let next = ((T::lit(2.0) * kf + T::one() - y) * cur - kf * prev) / (kf + T::one());
        prev = cur;
        cur = next;
    }
    cur
}

/// Fock-state Wigner function as a function of `r² = x² + p²`.
pub(crate) fn fock_wigner_r2<T: Real>(n: u32, r2: T) -> T {
    let sign = if n.is_multiple_of(2) { T::one() } else { -T::one() };
    let two = T::lit(2.0);
    sign * two / T::PI() * laguerre(n, T::lit(4.0) * r2) * (-two * r2).exp()
}

/// Closed-form Wigner function of `spec` at `(x, p)`.
pub fn wigner_value<T: Real>(spec: &StateSpec<T>, x: T, p: T) -> T {
    match *spec {
        StateSpec::Vacuum => GaussianState::vacuum().wigner(x, p),
        StateSpec::SqueezedVacuum { g_sq, squeeze_angle } => {
            let r2 = squeezed_radius2(x, p, g_sq, squeeze_angle);
            fock_wigner_r2(0, r2)
        }
        StateSpec::Fock { n } => fock_wigner_r2(n, x * x + p * p),
        StateSpec::SqueezedFock { n, g_sq, squeeze_angle } => {
            fock_wigner_r2(n, squeezed_radius2(x, p, g_sq, squeeze_angle))
        }
        StateSpec::Cat { amplitude, parity } => cat_wigner(amplitude, parity, x, p),
    }
}

/// `|S⁻¹ r|²` where `S` squeezes `x_φ` by `e^{-G}` and stretches its conjugate.
fn squeezed_radius2<T: Real>(x: T, p: T, g_sq: T, angle: T) -> T {
    let (c, s) = quadrature_axis(angle);
    let a = x * c + p * s;
    let b = -x * s + p * c;
    let two = T::lit(2.0);
    (two * g_sq).exp() * a * a + (-two * g_sq).exp() * b * b
}

fn cat_wigner<T: Real>(alpha: T, parity: CatParity, x: T, p: T) -> T {
    let two = T::lit(2.0);
    let sign = match parity {
        CatParity::Even => T::one(),
        CatParity::Odd => -T::one(),
    };
    let overlap = (-two * alpha * alpha).exp();
    let norm = T::one() / (two * (T::one() + sign * overlap));
    let g = |dx: T| two / T::PI() * (-two * (dx * dx + p * p)).exp();
    let fringe = T::lit(4.0) / T::PI() * (-two * (x * x + p * p)).exp() * (T::lit(4.0) * alpha * p).cos();
    norm * (g(x - alpha) + g(x + alpha) + sign * fringe)
}

/// Sample the Wigner function of `spec` on a grid and normalize it.
///
/// Fails with [`Error::ExtentTooSmall`] when more than 10⁻³ of the state's
/// probability lies outside the window.
pub fn build_wigner_grid<T: Real>(
    spec: &StateSpec<T>,
    nx: usize,
    np: usize,
    extent: Extent<T>,
) -> Result<WignerGrid<T>> {
    spec.validate()?;
    let grid = WignerGrid::tabulate(nx, np, extent, |x, p| wigner_value(spec, x, p))?;
    let integral = grid.integral();
    let mass_outside = (T::one() - integral).as_f64();
    if mass_outside > MAX_MASS_OUTSIDE {
        return Err(Error::ExtentTooSmall { mass_outside });
    }
    grid.normalized()
}

/// Loss channel applied to a tabulated Wigner function: coordinates contract
/// by `√η`, then the result is convolved with a vacuum Gaussian of variance
/// `(1-η)/4` per axis.
pub fn apply_loss_to_grid<T: Real>(grid: &WignerGrid<T>, eta: T) -> Result<WignerGrid<T>> {
    check_transmission(eta)?;
    if eta == T::one() {
        return Ok(grid.clone());
    }
    if eta == T::zero() {
        let vac = GaussianState::<T>::vacuum();
        return WignerGrid::tabulate(grid.nx, grid.np, grid.extent, |x, p| vac.wigner(x, p))?.normalized();
    }
    let root = eta.sqrt();
    let scaled = WignerGrid::tabulate(grid.nx, grid.np, grid.extent, |x, p| {
        grid.value_at(x / root, p / root) / eta
    })?;
    let var = (T::one() - eta) * T::lit(VACUUM_VARIANCE);
    let kx = gaussian_kernel(var, scaled.dx());
    let kp = gaussian_kernel(var, scaled.dp());
    let (nx, np) = (scaled.nx, scaled.np);
    let mut tmp = vec![T::zero(); nx * np];
    // along x
    tmp.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
        convolve_line(|i| scaled.at(i, j), nx, &kx, row);
    });
    let mut out = vec![T::zero(); nx * np];
    let mut col = vec![T::zero(); np];
    for i in 0..nx {
        convolve_line(|j| tmp[j * nx + i], np, &kp, &mut col);
        for j in 0..np {
            out[j * nx + i] = col[j];
        }
    }
    WignerGrid::from_values(nx, np, grid.extent, out)?.normalized()
}

/// Discrete normalized Gaussian kernel with variance `var` on spacing `h`.
fn gaussian_kernel<T: Real>(var: T, h: T) -> Vec<T> {
    let sigma = var.sqrt();
    let half = (T::lit(6.0) * sigma / h).ceil().to_usize().unwrap_or(0);
    if half == 0 {
        return vec![T::one()];
    }
    let mut k: Vec<T> = (0..=2 * half)
        .map(|m| {
            let d = (T::from_usize_lossy(m) - T::from_usize_lossy(half)) * h;
            (-(d * d) / (T::lit(2.0) * var)).exp()
        })
        .collect();
    let sum: T = k.iter().copied().sum();
    k.iter_mut().for_each(|v| *v = *v / sum);
    k
}

fn convolve_line<T: Real, F: Fn(usize) -> T>(src: F, n: usize, kernel: &[T], out: &mut [T]) {
    let half = kernel.len() / 2;
    for (i, o) in out.iter_mut().enumerate().take(n) {
        let mut acc = T::zero();
        for (m, &k) in kernel.iter().enumerate() {
            let idx = i as isize + m as isize - half as isize;
            if idx >= 0 && (idx as usize) < n {
                acc = acc + k * src(idx as usize);
            }
        }
        *o = acc;
    }
}
