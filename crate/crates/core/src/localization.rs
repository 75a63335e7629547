//! The localization operator `L_Ω = Π χ_Ω` on `𝒫_N`.
//!
//! Matrices act on coefficient vectors in the orthonormal basis:
//! `A_{mn} = ⟨L_Ω e_n, e_m⟩ = (N+1) ∫_Ω e_n conj(e_m) (1+|z|²)^{-N} dm`, so
//! that `q† A q = (N+1) ∫_Ω u_P dm` and eigenvectors are polynomials.
//!
//! A cap centered at `0` is diagonal with entries
//! `λ_n = (N+1) C(N,n) ∫₀ˢ tⁿ (1-t)^{N-n} dt = I_s(n+1, N-n+1)`; other caps
//! are conjugates `U† D U` of it by the rotation matrix.

use rayon::prelude::*;

use crate::eigen::{hermitian_eigen, CMatrix};
use crate::error::{Error, Result};
use crate::polyspace::{su2_matrix, Poly};
use crate::quadrature::{region_nodes, Node, QuadRule, RuleKind};
use crate::region::{region_contains, region_measure, Region};
use crate::scalar::{cx, pairwise_sum, Cx, Real};
use crate::special::{binomial_pmf, gauss_legendre, incomplete_beta_int};
use crate::sphere::{Cap, SpherePoint, Su2};

/// Eigenvalues below this are treated as broken quadrature.
pub const NEGATIVE_EIGENVALUE_FLOOR: f64 = -1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assembly {
    /// Caps by Gauss radial integration and rotation, combined exactly.
    CapAlgebra,
    /// Weighted sums over the rule's region nodes.
    Quadrature(RuleKind),
}

#[derive(Debug, Clone)]
pub struct LocalizationMatrix<T> {
    pub n: usize,
    pub measure: T,
    pub matrix: CMatrix<T>,
    pub assembly: Assembly,
}

/// `λ_n = I_s(n+1, N-n+1)`, `n = 0..=N`.
pub fn cap_spectrum_closed_form<T: Real>(n: usize, s: T) -> Vec<T> {
    (0..=n).map(|k| incomplete_beta_int(k + 1, n - k + 1, s)).collect()
}

/// Diagonal of the centered cap of measure `s`, by Gauss–Legendre on
/// `[0, s]`; exact since the integrands are polynomials of degree `N`.
pub fn centered_cap_diagonal<T: Real>(n: usize, s: T) -> Vec<T> {
    let nodes = n / 2 + 1;
    let (x, w) = gauss_legendre::<T>(nodes);
    let np1 = T::from_usize_lossy(n + 1);
    let mut diag = vec![T::zero(); n + 1];
    let mut terms: Vec<Vec<T>> = vec![Vec::with_capacity(nodes); n + 1];
    for (xi, wi) in x.iter().zip(&w) {
        let pmf = binomial_pmf(n, s * *xi);
        for (k, p) in pmf.iter().enumerate() {
            terms[k].push(np1 * s * *wi * *p);
        }
    }
    for (d, t) in diag.iter_mut().zip(&terms) {
        *d = pairwise_sum(t);
    }
    diag
}

fn cap_matrix<T: Real>(n: usize, c: &Cap<T>) -> CMatrix<T> {
    let d = centered_cap_diagonal(n, c.measure());
    if c.measure() >= T::one() {
        return CMatrix::identity(n + 1);
    }
    if let SpherePoint::Finite(z) = c.center() {
        if z.norm_sqr() == T::zero() {
            return CMatrix::from_diagonal(&d);
        }
    }
    let u = su2_matrix(n, &Su2::moving_to_origin(&c.center()));
    u.adjoint().matmul(&CMatrix::from_diagonal(&d)).matmul(&u)
}

fn cap_algebra_matrix<T: Real>(n: usize, r: &Region<T>) -> CMatrix<T> {
    match r {
        Region::Cap(c) => cap_matrix(n, c),
        Region::Complement(x) => CMatrix::identity(n + 1).sub(&cap_algebra_matrix(n, x)),
        Region::Union(xs) => {
            let mut acc = CMatrix::zeros(n + 1);
            for x in xs {
                let m = cap_algebra_matrix(n, x);
                acc = CMatrix::from_rows(n + 1, acc.data().iter().zip(m.data()).map(|(a, b)| a + b).collect());
            }
            acc
        }
        Region::Sampled(_) => unreachable!("cap algebra only"),
    }
}

/// Coherent vector `v_n(z) = √C(N,n) zⁿ (1+|z|²)^{-N/2}` (conjugate of the
/// coefficients of `κ_{N,z}`).
pub(crate) fn coherent_vector<T: Real>(n: usize, z: &SpherePoint<T>) -> Vec<Cx<T>> {
    crate::polyspace::reproducing_kernel(n, z)
        .coeffs()
        .iter()
        .map(|c| c.conj())
        .collect()
}

fn quadrature_matrix<T: Real>(n: usize, nodes: &[Node<T>]) -> CMatrix<T> {
    let np1 = T::from_usize_lossy(n + 1);
    let vecs: Vec<(T, Vec<Cx<T>>)> = nodes
        .par_iter()
        .map(|nd| (nd.weight, coherent_vector(n, &nd.point)))
        .collect();
    let mut m = CMatrix::zeros(n + 1);
    for row in 0..=n {
        for col in 0..=n {
            let terms_re: Vec<T> = vecs.iter().map(|(w, v)| *w * (v[col] * v[row].conj()).re).collect();
            let terms_im: Vec<T> = vecs.iter().map(|(w, v)| *w * (v[col] * v[row].conj()).im).collect();
            m[(row, col)] = cx(pairwise_sum(&terms_re), pairwise_sum(&terms_im)) * np1;
        }
    }
    m
}

/// Assembles `L_Ω`. Cap-algebra regions are exact; sampled indicators use
/// the rule.
pub fn assemble<T: Real>(n: usize, region: &Region<T>, rule: &QuadRule) -> Result<LocalizationMatrix<T>> {
    rule.validate()?;
    let measure = region_measure(region).value;
    if region.is_cap_algebra() {
        return Ok(LocalizationMatrix {
            n,
            measure,
            matrix: cap_algebra_matrix(n, region),
            assembly: Assembly::CapAlgebra,
        });
    }
    assemble_by_quadrature(n, region, rule)
}

/// Assembles `L_Ω` from the rule's node set, for any region.
pub fn assemble_by_quadrature<T: Real>(
    n: usize,
    region: &Region<T>,
    rule: &QuadRule,
) -> Result<LocalizationMatrix<T>> {
    rule.validate()?;
    let measure = region_measure(region).value;
    let nodes: Vec<Node<T>> = match rule.kind {
        RuleKind::TensorProduct { n_s, n_theta } => region_nodes(region, n_s, n_theta),
        RuleKind::MonteCarlo { n: count, seed } => {
            let w = T::one() / T::from_usize_lossy(count);
            crate::quadrature::monte_carlo_points::<T>(count, seed)
                .into_iter()
                .filter(|z| region_contains(region, z))
                .map(|point| Node { point, weight: w })
                .collect()
        }
    };
    Ok(LocalizationMatrix {
        n,
        measure,
        matrix: quadrature_matrix(n, &nodes),
        assembly: Assembly::Quadrature(rule.kind),
    })
}

impl<T: Real> LocalizationMatrix<T> {
    /// Ascending eigenvalues, rejecting values below the round-off floor.
    pub fn spectrum(&self) -> Result<Vec<T>> {
        let vals = hermitian_eigen(&self.matrix).values;
        if let Some(&v) = vals.iter().find(|&&v| v.to_f64_lossy() < NEGATIVE_EIGENVALUE_FLOOR) {
            return Err(Error::NegativeEigenvalue { value: v.to_f64_lossy() });
        }
        Ok(vals)
    }

    pub fn trace(&self) -> T {
        self.matrix.trace().re
    }

    /// Schatten `p`-norm; `p = ∞` is the operator norm.
    pub fn schatten_norm(&self, p: f64) -> Result<T> {
        schatten_norm(&self.spectrum()?, p)
    }

    /// Dominant eigenpair `(λ_max, φ)`, `φ` of unit norm.
    pub fn top_eigenfunction(&self) -> Result<(T, Poly<T>)> {
        let e = hermitian_eigen(&self.matrix);
        let last = e.values.len() - 1;
        let mut v = e.vectors[last].clone();
        // fix the phase: largest coefficient real positive
        let k = (0..v.len())
            .max_by(|&a, &b| v[a].norm_sqr().partial_cmp(&v[b].norm_sqr()).unwrap_or(core::cmp::Ordering::Equal))
            .expect("nonempty");
        let ph = v[k] / v[k].norm();
        for c in v.iter_mut() {
            *c = *c / ph;
        }
        Ok((e.values[last], Poly::new(self.n, v)?.normalized()?))
    }
}

/// `(Σ λ_i^p)^{1/p}` with round-off negatives clamped.
pub fn schatten_norm<T: Real>(spectrum: &[T], p: f64) -> Result<T> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("Schatten exponent {p} below 1")));
    }
    if let Some(&v) = spectrum.iter().find(|&&v| v.to_f64_lossy() < NEGATIVE_EIGENVALUE_FLOOR) {
        return Err(Error::NegativeEigenvalue { value: v.to_f64_lossy() });
    }
    let clamped: Vec<T> = spectrum.iter().map(|v| v.max(T::zero())).collect();
    if p.is_infinite() {
        return Ok(clamped.iter().copied().fold(T::zero(), T::max));
    }
    let pt = T::lit(p);
    let terms: Vec<T> = clamped.iter().map(|v| v.powf(pt)).collect();
    Ok(pairwise_sum(&terms).powf(pt.recip()))
}

/// `(N+1)² ∬_{Ω×Ω} |⟨κ_z, κ_w⟩|² dm dm`, computed with the signed region
/// nodes of the rule. `|⟨κ_z, κ_w⟩|² = ((1 + X·Y)/2)^N` for the unit
/// vectors `X, Y` of the two points.
pub fn hs_double_integral<T: Real>(n: usize, region: &Region<T>, rule: &QuadRule) -> Result<T> {
    rule.validate()?;
    let nodes = match rule.kind {
        RuleKind::TensorProduct { n_s, n_theta } => region_nodes(region, n_s, n_theta),
        RuleKind::MonteCarlo { .. } => {
            return Err(Error::InvalidArgument("double integral needs a tensor rule".into()))
        }
    };
    let vecs: Vec<(T, [T; 3])> = nodes.iter().map(|nd| (nd.weight, nd.point.to_unit_vector())).collect();
    let half = T::lit(0.5);
    let ni = n as i32;
    let rows: Vec<T> = vecs
        .par_iter()
        .map(|(wi, xi)| {
            let terms: Vec<T> = vecs
                .iter()
                .map(|(wj, xj)| {
                    let dot = xi[0] * xj[0] + xi[1] * xj[1] + xi[2] * xj[2];
                    *wj * ((T::one() + dot) * half).max(T::zero()).powi(ni)
                })
                .collect();
            *wi * pairwise_sum(&terms)
        })
        .collect();
    let np1 = T::from_usize_lossy(n + 1);
    Ok(np1 * np1 * pairwise_sum(&rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concentration::concentrate;
    use crate::polyspace::reproducing_kernel;
    use crate::quadrature::{build_rule, Purpose};
    use crate::random::{random_point, random_region, random_unit_poly};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cap0(m: f64) -> Region<f64> {
        Region::Cap(Cap::with_measure(SpherePoint::origin(), m).unwrap())
    }

    #[test]
    fn full_sphere_is_identity() {
        let rule = build_rule(5, Purpose::ExactPoly).unwrap();
        let l = assemble(5, &Region::<f64>::full_sphere(), &rule).unwrap();
        assert_eq!(l.matrix, CMatrix::identity(6));
        let q = assemble_by_quadrature(5, &Region::<f64>::full_sphere(), &rule).unwrap();
        assert!(q.matrix.sub(&CMatrix::identity(6)).data().iter().all(|v| v.norm() < 1e-13));
    }

    #[test]
    fn centered_cap_is_diagonal() {
        let rule = build_rule(6, Purpose::ExactPoly).unwrap();
        let q = assemble_by_quadrature(6, &cap0(0.37), &rule).unwrap();
        let closed = cap_spectrum_closed_form(6, 0.37);
        for i in 0..=6 {
            for j in 0..=6 {
                let v = q.matrix[(i, j)];
                if i == j {
                    assert!((v.re - closed[i]).abs() < 1e-13);
                } else {
                    assert!(v.norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn small_examples() {
        let d = centered_cap_diagonal(1, 0.5f64);
        assert!((d[0] - 0.75).abs() < 1e-15 && (d[1] - 0.25).abs() < 1e-15);
        let eigs = cap_spectrum_closed_form(3, 0.25f64);
        let s1 = schatten_norm(&eigs, 1.0).unwrap();
        assert!((s1 - 1.0).abs() < 1e-14);
        let s2 = schatten_norm(&[0.75, 0.25], 2.0).unwrap();
        assert!((s2 - 10f64.sqrt() / 4.0).abs() < 1e-15);
        let sinf = schatten_norm(&eigs, f64::INFINITY).unwrap();
        assert!((sinf - (1.0 - 0.75f64.powi(4))).abs() < 1e-14);
        assert!(schatten_norm(&eigs, 0.5).is_err());
        assert!(matches!(schatten_norm(&[-1e-6, 1.0], 1.0), Err(Error::NegativeEigenvalue { .. })));
        assert_eq!(schatten_norm(&[-1e-12, 1.0], 1.0).unwrap(), 1.0);
        let eigs = cap_spectrum_closed_form(4, 1.0f64 - 1e-15);
        assert!(eigs.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn hs_examples() {
        let rule = build_rule(1, Purpose::ExactPoly).unwrap();
        let v = hs_double_integral::<f64>(1, &cap0(0.5), &rule).unwrap();
        assert!((v - 0.625).abs() < 1e-14);
        let rule = build_rule(4, Purpose::ExactPoly).unwrap();
        let v = hs_double_integral::<f64>(4, &Region::full_sphere(), &rule).unwrap();
        assert!((v - 5.0).abs() < 1e-12);
    }

    #[test]
    fn off_center_caps_agree_with_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let r = random_region::<f64>(&mut rng);
            let rule = build_rule(7, Purpose::ExactPoly).unwrap();
            let exact = assemble(7, &r, &rule).unwrap();
            let quad = assemble_by_quadrature(7, &r, &rule).unwrap();
            let err = exact.matrix.sub(&quad.matrix).data().iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!(err < 1e-12, "{err}");
            assert!(exact.matrix.hermitian_defect() < 1e-12);
            assert!((exact.trace() - 8.0 * exact.measure).abs() < 1e-10);
        }
    }

    #[test]
    fn top_eigenfunction_of_cap_is_kernel() {
        let a = SpherePoint::new(0.3, -0.9).unwrap();
        let c = Region::Cap(Cap::with_measure(a, 0.2).unwrap());
        let rule = build_rule(6, Purpose::ExactPoly).unwrap();
        let l = assemble(6, &c, &rule).unwrap();
        let (lam, phi) = l.top_eigenfunction().unwrap();
        assert!((lam - (1.0 - 0.8f64.powi(7))).abs() < 1e-12);
        let k = reproducing_kernel(6, &a);
        let ip = crate::polyspace::inner_product(&phi, &k).unwrap();
        assert!((ip.norm() - 1.0).abs() < 1e-10);
        let conc = concentrate(&phi, &c, &rule).unwrap();
        assert!((conc - lam).abs() < 1e-10);
    }

    #[test]
    fn operator_norm_bounds_concentration() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let r = random_region::<f64>(&mut rng);
        let rule = build_rule(5, Purpose::ExactPoly).unwrap();
        let l = assemble(5, &r, &rule).unwrap();
        let lmax = l.schatten_norm(f64::INFINITY).unwrap();
        for _ in 0..50 {
            let p = random_unit_poly::<f64>(5, &mut rng);
            assert!(concentrate(&p, &r, &rule).unwrap() <= lmax + 1e-9);
        }
        let _ = random_point::<f64>(&mut rng);
    }
}
