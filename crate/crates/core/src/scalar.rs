//! Scalar abstraction shared by the numerical kernels.
//!
//! Everything below the experiment layer is written against [`Real`], so the
//! same code runs in `f32` for quick sweeps and `f64` for certification.

use core::fmt::{Debug, Display};
use core::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Never fails for the supported types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over a [`Real`].
pub type Cx<T> = Complex<T>;

#[inline]
pub(crate) fn cx<T: Real>(re: T, im: T) -> Cx<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn cis<T: Real>(theta: T) -> Cx<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// Pairwise (cascade) summation. The result depends only on the order of
/// `values`, never on how the caller produced them.
pub fn pairwise_sum<T: Real>(values: &[T]) -> T {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        let mut acc = T::zero();
        for &v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Pairwise summation of complex values.
pub fn pairwise_sum_cx<T: Real>(values: &[Cx<T>]) -> Cx<T> {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        let mut acc = Cx::new(T::zero(), T::zero());
        for &v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum_cx(&values[..mid]) + pairwise_sum_cx(&values[mid..])
}

/// `ln C(n, k)` via `ln Γ`-free log-factorial accumulation.
pub(crate) fn ln_binomial<T: Real>(n: usize, k: usize) -> T {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    let mut acc = 0.0f64;
    for i in 0..k {
        acc += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
    }
    T::lit(acc)
}

/// Table of `sqrt(C(n, k))` for `k = 0..=n`, built by the multiplicative
/// recurrence. Overflows for `n` beyond a few thousand; callers switch to the
/// logarithmic path before that.
pub(crate) fn sqrt_binomials<T: Real>(n: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(n + 1);
    let mut c = 1.0f64;
    out.push(T::one());
    for k in 0..n {
        c *= ((n - k) as f64) / ((k + 1) as f64);
        out.push(T::lit(c.sqrt()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let v: Vec<f64> = (0..1000).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let naive: f64 = v.iter().sum();
        assert!((pairwise_sum(&v) - naive).abs() < 1e-12);
    }

    #[test]
    fn ln_binomial_small_values() {
        let v: f64 = ln_binomial(10, 3);
        assert!((v.exp() - 120.0).abs() < 1e-9);
        let s: Vec<f64> = sqrt_binomials(4);
        assert!((s[2] - 6f64.sqrt()).abs() < 1e-15);
    }
}
