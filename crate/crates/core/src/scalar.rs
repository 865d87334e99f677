//! Scalar abstraction shared by the numerical modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable throughout the phase-space, reconstruction and
/// metrics code. Implemented for `f32` and `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + rustfft::FftNum
    + Default
    + Debug
    + Display
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from `f64` literals and intermediate results.
    #[inline]
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 is representable")
    }

    #[inline]
    fn from_usize_lossy(v: usize) -> Self {
        <Self as FromPrimitive>::from_usize(v).expect("usize is representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).expect("finite scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Trapezoidal rule on an arbitrary increasing abscissa.
pub(crate) fn trapezoid<T: Real>(x: &[T], y: &[T]) -> T {
    debug_assert_eq!(x.len(), y.len());
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xw, yw)| (xw[1] - xw[0]) * (yw[0] + yw[1]) * T::lit(0.5))
        .sum()
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub(crate) fn linspace<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / T::from_usize_lossy(n - 1);
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        hi
                    } else {
                        lo + step * T::from_usize_lossy(i)
                    }
                })
                .collect()
        }
    }
}

/// Piecewise-linear interpolation of `(xs, ys)` at `x`; zero outside the
/// abscissa range. `xs` must be increasing.
pub(crate) fn interp_linear<T: Real>(xs: &[T], ys: &[T], x: T) -> T {
    let n = xs.len();
    if n == 0 || x < xs[0] || x > xs[n - 1] {
        return T::zero();
    }
    if n == 1 {
        return ys[0];
    }
    // first index with xs[idx] > x
    let idx = xs.partition_point(|&v| v <= x);
    if idx == 0 {
        return ys[0];
    }
    if idx >= n {
        return ys[n - 1];
    }
    let (x0, x1) = (xs[idx - 1], xs[idx]);
    let w = if x1 > x0 { (x - x0) / (x1 - x0) } else { T::zero() };
    ys[idx - 1] * (T::one() - w) + ys[idx] * w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_matches_polynomial_integral() {
        let x = linspace(0.0_f64, 1.0, 1001);
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        assert!((trapezoid(&x, &y) - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn interp_is_zero_outside_and_exact_at_nodes() {
        let xs = [0.0_f64, 1.0, 3.0];
        let ys = [1.0, 2.0, 0.0];
        assert_eq!(interp_linear(&xs, &ys, -0.1), 0.0);
        assert_eq!(interp_linear(&xs, &ys, 3.1), 0.0);
        assert_eq!(interp_linear(&xs, &ys, 1.0), 2.0);
        assert_eq!(interp_linear(&xs, &ys, 3.0), 0.0);
        assert!((interp_linear(&xs, &ys, 2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn linspace_hits_both_ends() {
        let v = linspace(-4.0_f32, 4.0, 201);
        assert_eq!(v[0], -4.0);
        assert_eq!(v[200], 4.0);
        assert!((v[100]).abs() < 1e-6);
    }
}
