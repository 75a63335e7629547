//! The optimality family `p_ε = (1+εz)/√(1+ε²/N)` and fits of
//! `D_N(p_ε)² ≈ (N-1)/(2N³) ε⁴` and `S_N(p_ε) - S_N(1) ≈ ε⁴/(2N²)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::polyspace::{kernel_distance_from_max, sup_weighted_modulus_seeded, Poly};
use crate::quadrature::{build_rule, Purpose};
use crate::scalar::Cx;
use crate::sphere::SpherePoint;
use crate::wehrl::{entropy, entropy_reference, PhiSpec};

pub const DEFAULT_EPS: [f64; 3] = [0.05, 0.02, 0.01];
/// Successive-difference target for the node-doubled entropy.
pub const GAP_TOL: f64 = 1e-12;
/// Acceptance band on the fitted exponent.
pub const EXPONENT_BAND: (f64, f64) = (3.9, 4.1);
pub const CONSTANT_REL_TOL: f64 = 0.02;
pub const RATIO_REL_TOL: f64 = 0.05;

/// Unit-norm `p_ε` in `𝒫_N`.
pub fn sharpness_family(n: usize, eps: f64) -> Result<Poly<f64>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("sharpness family needs N ≥ 2, got {n}")));
    }
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::InvalidArgument(format!("ε = {eps} outside (0, 0.5]")));
    }
    let nf = n as f64;
    let c = (1.0 + eps * eps / nf).sqrt();
    let mut q = vec![Cx::new(0.0, 0.0); n + 1];
    q[0] = Cx::new(1.0 / c, 0.0);
    q[1] = Cx::new(eps / (nf.sqrt() * c), 0.0);
    Poly::new(n, q)
}

/// Maximizer of `u_ε`, the positive root of `ε(N-1)x² + Nx - ε = 0`.
pub fn z0_closed_form(n: usize, eps: f64) -> f64 {
    let nf = n as f64;
    // rationalized to avoid cancellation in √(N²+4ε²(N-1)) - N
    2.0 * eps / ((nf * nf + 4.0 * eps * eps * (nf - 1.0)).sqrt() + nf)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SharpnessRow {
    pub n: usize,
    pub eps: f64,
    pub d_sq: f64,
    pub gap: f64,
    pub d_sq_over_eps4: f64,
    pub gap_over_eps4: f64,
    pub argmax: f64,
    pub z0: f64,
    pub entropy_error: f64,
    /// Maximization uncertified or entropy doubling not converged.
    pub flagged: bool,
}

pub fn sharpness_row(n: usize, eps: f64) -> Result<SharpnessRow> {
    let p = sharpness_family(n, eps)?;
    let z0 = z0_closed_form(n, eps);
    let max = sup_weighted_modulus_seeded(&p, &[SpherePoint::new(z0, 0.0)?], true)?;
    let kd = kernel_distance_from_max(&p, max);
    let argmax = match kd.center {
        SpherePoint::Finite(z) => z.re,
        SpherePoint::Infinity => f64::INFINITY,
    };
    let rule = build_rule(n, Purpose::Entropy)?.with_tolerance(GAP_TOL);
    let est = entropy(&p, &PhiSpec::XLogX, &rule)?;
    let gap = est.value - entropy_reference(n, &PhiSpec::XLogX)?;
    let d_sq = kd.distance * kd.distance;
    let e4 = eps.powi(4);
    Ok(SharpnessRow {
        n,
        eps,
        d_sq,
        gap,
        d_sq_over_eps4: d_sq / e4,
        gap_over_eps4: gap / e4,
        argmax,
        z0,
        entropy_error: est.error,
        flagged: !max.certified || !est.converged,
    })
}

/// `(exponent, prefactor)` of `y ≈ C εᵏ` by least squares on logs.
pub fn loglog_fit(eps: &[f64], y: &[f64]) -> (f64, f64) {
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, (my - slope * mx).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpnessFit {
    pub n: usize,
    pub rows: Vec<SharpnessRow>,
    pub d_exponent: f64,
    pub d_prefactor: f64,
    pub gap_exponent: f64,
    pub gap_prefactor: f64,
    /// `(N-1)/(2N³)`.
    pub d_target: f64,
    /// `1/(2N²)`.
    pub gap_target: f64,
    /// Relative error of `D²/ε⁴` at the smallest ε.
    pub d_rel_error: f64,
    pub gap_rel_error: f64,
    /// `gap/D²` at the smallest ε, against `N/(N-1)`.
    pub ratio: f64,
    pub ratio_target: f64,
}

impl SharpnessFit {
    pub fn passes(&self) -> bool {
        let band = |k: f64| k >= EXPONENT_BAND.0 && k <= EXPONENT_BAND.1;
        band(self.d_exponent)
            && band(self.gap_exponent)
            && self.d_rel_error <= CONSTANT_REL_TOL
            && self.gap_rel_error <= CONSTANT_REL_TOL
            && (self.ratio / self.ratio_target - 1.0).abs() <= RATIO_REL_TOL
            && self.rows.iter().all(|r| !r.flagged)
    }
}

pub fn asymptotic_fit(n: usize, eps_list: &[f64]) -> Result<SharpnessFit> {
    if eps_list.len() < 3 {
        return Err(Error::InvalidArgument("need at least 3 values of ε".into()));
    }
    if let Some(e) = eps_list.iter().find(|e| !(**e > 0.0 && **e <= 0.1)) {
        return Err(Error::InvalidArgument(format!("ε = {e} outside (0, 0.1]")));
    }
    let rows = eps_list
        .par_iter()
        .map(|&e| sharpness_row(n, e))
        .collect::<Result<Vec<_>>>()?;
    let eps: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let (d_exponent, d_prefactor) = loglog_fit(&eps, &rows.iter().map(|r| r.d_sq).collect::<Vec<_>>());
    let (gap_exponent, gap_prefactor) = loglog_fit(&eps, &rows.iter().map(|r| r.gap).collect::<Vec<_>>());
    let nf = n as f64;
    let d_target = (nf - 1.0) / (2.0 * nf.powi(3));
    let gap_target = 1.0 / (2.0 * nf * nf);
    let smallest = rows
        .iter()
        .min_by(|a, b| a.eps.total_cmp(&b.eps))
        .expect("at least three rows");
    Ok(SharpnessFit {
        n,
        d_exponent,
        d_prefactor,
        gap_exponent,
        gap_prefactor,
        d_target,
        gap_target,
        d_rel_error: (smallest.d_sq_over_eps4 / d_target - 1.0).abs(),
        gap_rel_error: (smallest.gap_over_eps4 / gap_target - 1.0).abs(),
        ratio: smallest.gap / smallest.d_sq,
        ratio_target: nf / (nf - 1.0),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_is_unit_and_tends_to_one() {
        for n in [2usize, 5, 9] {
            for eps in [0.5, 0.1, 1e-6] {
                let p = sharpness_family(n, eps).unwrap();
                assert!((p.norm() - 1.0).abs() < 1e-15);
            }
            let p = sharpness_family(n, 1e-9).unwrap();
            assert!((p.coeffs()[0].re - 1.0).abs() < 1e-15 && p.coeffs()[1].norm() < 1e-9);
        }
        assert!(sharpness_family(1, 0.1).is_err());
        assert!(sharpness_family(3, 0.0).is_err());
        assert!(sharpness_family(3, 0.6).is_err());
    }

    #[test]
    fn maximizer_matches_closed_form() {
        for n in [2usize, 4, 8] {
            for eps in [0.05, 0.1] {
                let z0 = z0_closed_form(n, eps);
                let nf = n as f64;
                // stationarity of (1+εx)²/(1+x²)ᴺ on the real axis
                assert!((eps * (nf - 1.0) * z0 * z0 + nf * z0 - eps).abs() < 1e-15);
                let r = sharpness_row(n, eps).unwrap();
                assert!((r.argmax - z0).abs() < 1e-8, "{n} {eps}: {} vs {z0}", r.argmax);
            }
        }
        assert!((sharpness_row(2, 0.1).unwrap().argmax - 0.05).abs() < 2e-4);
    }

    #[test]
    fn constants_for_n2() {
        let f = asymptotic_fit(2, &DEFAULT_EPS).unwrap();
        assert!((f.d_target - 0.0625).abs() < 1e-15 && (f.gap_target - 0.125).abs() < 1e-15);
        assert!(f.d_rel_error < 0.02, "{f:?}");
        assert!(f.gap_rel_error < 0.02, "{f:?}");
        assert!(f.passes(), "{f:?}");
    }

    #[test]
    fn exponents_for_n4_and_monotone() {
        let eps = [0.1, 0.05, 0.02, 0.01];
        let f = asymptotic_fit(4, &eps).unwrap();
        assert!((f.d_exponent - 4.0).abs() < 0.1 && (f.gap_exponent - 4.0).abs() < 0.1, "{f:?}");
        for w in f.rows.windows(2) {
            assert!(w[0].d_sq > w[1].d_sq && w[0].gap > w[1].gap);
        }
        assert!((f.ratio / f.ratio_target - 1.0).abs() < 0.05);
    }

    #[test]
    fn invalid_fit_inputs() {
        assert!(asymptotic_fit(2, &[0.05, 0.02]).is_err());
        assert!(asymptotic_fit(2, &[0.2, 0.05, 0.02]).is_err());
        assert!(asymptotic_fit(1, &DEFAULT_EPS).is_err());
    }

    #[test]
    fn loglog_recovers_power() {
        let e = [0.3, 0.1, 0.03];
        let y: Vec<f64> = e.iter().map(|x: &f64| 0.7 * x.powf(3.5)).collect();
        let (k, c) = loglog_fit(&e, &y);
        assert!((k - 3.5).abs() < 1e-12 && (c - 0.7).abs() < 1e-12);
    }
}
