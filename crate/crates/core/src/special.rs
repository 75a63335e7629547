//! Gauss rules and binomial/beta helpers.

use crate::scalar::{ln_binomial, Real};

/// Gauss–Legendre nodes and weights on `[0, 1]`, nodes ascending, weights
/// summing to one.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1, "Gauss-Legendre needs at least one node");
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let half = T::lit(0.5);
    let m = n.div_ceil(2);
    let nf = T::from_usize_lossy(n);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (T::PI() * (T::from_usize_lossy(i) + T::lit(0.75)) / (nf + half)).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= T::epsilon() * T::lit(2.0) {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
        // x runs from +1 downwards; map to [0,1] ascending
        nodes[i] = half * (T::one() - x);
        nodes[n - 1 - i] = half * (T::one() + x);
        weights[i] = half * w;
        weights[n - 1 - i] = half * w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = half;
    }
    (nodes, weights)
}

fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = T::from_usize_lossy(k);
        let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (T::one(), T::zero());
    }
    let nf = T::from_usize_lossy(n);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// Gauss–Laguerre nodes and weights for `∫₀^∞ g(t) e^{-t} dt`.
pub fn gauss_laguerre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Laguerre needs at least one node");
    let nf = n as f64;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let mut z = 0.0f64;
    for i in 0..n {
        z = match i {
            0 => 3.0 / (1.0 + 2.4 * nf),
            1 => z + 15.0 / (1.0 + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                z + ((1.0 + 2.55 * ai) / (1.9 * ai)) * (z - nodes[i - 2])
            }
        };
        let mut pp = 1.0;
        let mut p2 = 0.0;
        for _ in 0..200 {
            let mut p1 = 1.0f64;
            p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0 - z) * p2 - jf * p3) / (jf + 1.0);
            }
            pp = nf * (p1 - p2) / z;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        nodes[i] = z;
        weights[i] = -1.0 / (pp * nf * p2);
    }
    (nodes, weights)
}

/// Binomial probabilities `C(n,j) s^j (1-s)^{n-j}`, `j = 0..=n`.
pub fn binomial_pmf<T: Real>(n: usize, s: T) -> Vec<T> {
    if s <= T::zero() {
        let mut v = vec![T::zero(); n + 1];
        v[0] = T::one();
        return v;
    }
    if s >= T::one() {
        let mut v = vec![T::zero(); n + 1];
        v[n] = T::one();
        return v;
    }
    let ls = s.ln();
    let l1s = (-s).ln_1p();
    (0..=n)
        .map(|j| {
            let e = ln_binomial::<T>(n, j)
                + T::from_usize_lossy(j) * ls
                + T::from_usize_lossy(n - j) * l1s;
            e.exp()
        })
        .collect()
}

/// Regularized incomplete beta `I_s(a, b)` for positive integers, through the
/// binomial tail `Σ_{j=a}^{a+b-1} C(a+b-1, j) s^j (1-s)^{a+b-1-j}`.
pub fn incomplete_beta_int<T: Real>(a: usize, b: usize, s: T) -> T {
    assert!(a >= 1 && b >= 1);
    let n = a + b - 1;
    let pmf = binomial_pmf(n, s);
    let upper: T = pmf[a..].iter().copied().sum();
    if upper <= T::lit(0.5) {
        upper
    } else {
        let lower: T = pmf[..a].iter().copied().sum();
        T::one() - lower
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        for n in 1..40 {
            let (x, w) = gauss_legendre::<f64>(n);
            let total: f64 = w.iter().sum();
            assert!((total - 1.0).abs() < 1e-14, "n={n}");
            for p in 0..(2 * n) {
                let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
                assert!((v - 1.0 / (p as f64 + 1.0)).abs() < 1e-13, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn legendre_large_n_weights() {
        let (x, w) = gauss_legendre::<f64>(2000);
        let total: f64 = w.iter().sum();
        assert!((total - 1.0).abs() < 1e-13);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * (1.0 - x).powi(1500)).sum();
        assert!((v - 1.0 / 1501.0).abs() < 1e-15);
    }

    #[test]
    fn laguerre_moments() {
        let (t, w) = gauss_laguerre(30);
        let mut fact = 1.0;
        for k in 0..40 {
            if k > 0 {
                fact *= k as f64;
            }
            let v: f64 = t.iter().zip(&w).map(|(t, w)| w * t.powi(k)).sum();
            assert!(((v - fact) / fact).abs() < 1e-11, "k={k}");
        }
    }

    #[test]
    fn incomplete_beta_matches_statrs() {
        for &(a, b) in &[(1usize, 1usize), (1, 2), (2, 1), (3, 7), (9, 9), (17, 1), (1, 17)] {
            for &s in &[0.01, 0.3, 0.5, 0.77, 0.999] {
                let ours: f64 = incomplete_beta_int(a, b, s);
                let theirs = statrs::function::beta::beta_reg(a as f64, b as f64, s);
                assert!((ours - theirs).abs() < 1e-13, "a={a} b={b} s={s}");
            }
        }
        assert!((incomplete_beta_int(1, 2, 0.5f64) - 0.75).abs() < 1e-16);
        assert!((incomplete_beta_int(2, 1, 0.5f64) - 0.25).abs() < 1e-16);
    }
}
