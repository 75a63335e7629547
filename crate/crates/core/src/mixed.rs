//! Density operators on `𝒫_N` and their Husimi functions.
//!
//! `ρ` is stored both as a matrix in the `e`-basis and as its eigen-ensemble
//! `Σ w_j Π_{P_j}`, which is what every functional actually uses.

use rayon::prelude::*;
use serde::Serialize;

use crate::concentration::{concentrate, fraenkel_asymmetry, max_disc_concentration, Ratio, NEAR_KERNEL, NEAR_ZERO_DEFICIT};
use crate::eigen::{hermitian_eigen, hermitian_eigenvalues, CMatrix};
use crate::error::{Error, Result};
use crate::optimize::nelder_mead;
use crate::polyspace::{maximize_landscape, reproducing_kernel, Poly, PolyEvaluator, WeightedMax};
use crate::quadrature::{build_rule, Purpose, QuadRule};
use crate::region::{region_measure, Region};
use crate::scalar::{cx, pairwise_sum, Cx};
use crate::sphere::{SpherePoint, Su2};
use crate::wehrl::{entropy_reference, landscape_entropy, PhiSpec, GAP_SLACK, NEAR_ZERO_GAP};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
/// Equal-measure seed grid for `D_N[ρ]`: 8 bands × 16 angles.
pub const DISTANCE_SEEDS: (usize, usize) = (8, 16);
/// Seeds refined by Nelder–Mead, besides the Husimi maximizer.
const REFINED_SEEDS: usize = 4;

#[derive(Debug, Clone)]
pub struct DensityOp {
    n: usize,
    matrix: CMatrix<f64>,
    weights: Vec<f64>,
    states: Vec<Poly<f64>>,
    evals: Vec<(f64, PolyEvaluator<f64>)>,
}

impl DensityOp {
    /// Validates and eigen-decomposes `matrix`.
    pub fn from_matrix(n: usize, matrix: CMatrix<f64>) -> Result<Self> {
        if matrix.dim() != n + 1 {
            return Err(Error::DegreeMismatch { left: matrix.dim(), right: n + 1 });
        }
        if matrix.data().iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("density matrix"));
        }
        let defect = matrix.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::InvalidArgument(format!("density matrix not Hermitian (defect {defect:e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidArgument(format!("density matrix trace {tr} is not 1")));
        }
        let eig = hermitian_eigen(&matrix);
        if let Some(&low) = eig.values.first() {
            if low < -PSD_TOL {
                return Err(Error::InvalidArgument(format!("density matrix has eigenvalue {low:e}")));
            }
        }
        let mut weights = Vec::new();
        let mut states = Vec::new();
        // descending; eigenvalues within round-off of 0 are dropped
        for (w, v) in eig.values.iter().zip(&eig.vectors).rev() {
            if *w > PSD_TOL {
                weights.push(*w);
                states.push(Poly::new(n, v.clone())?);
            }
        }
        let total = pairwise_sum(&weights);
        weights.iter_mut().for_each(|w| *w /= total);
        let evals = weights.iter().zip(&states).map(|(w, p)| (*w, p.evaluator())).collect();
        Ok(Self { n, matrix, weights, states, evals })
    }

    pub fn pure(p: &Poly<f64>) -> Result<Self> {
        density_from_ensemble(&[1.0], std::slice::from_ref(p))
    }

    /// `I / (N+1)`.
    pub fn maximally_mixed(n: usize) -> Self {
        let w = 1.0 / (n + 1) as f64;
        Self::from_matrix(n, CMatrix::from_diagonal(&vec![w; n + 1])).expect("scaled identity is a density")
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix<f64> {
        &self.matrix
    }

    /// Positive eigenvalues, descending.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Unit eigenvectors matching [`Self::weights`].
    pub fn states(&self) -> &[Poly<f64>] {
        &self.states
    }

    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    /// `u(z) = ⟨κ_z, ρ κ_z⟩`.
    pub fn husimi(&self, z: &SpherePoint<f64>) -> f64 {
        let v: f64 = self.evals.iter().map(|(w, e)| w * e.u(z)).sum();
        v.clamp(0.0, 1.0)
    }

    /// `sup u` and where it is attained.
    pub fn husimi_max(&self) -> Result<WeightedMax<f64>> {
        maximize_landscape(self.evals.as_slice(), self.n, &[], true)
    }
}

/// `ρ = Σ w_j Π_{P_j}` for unit `P_j`, not necessarily orthogonal.
pub fn density_from_ensemble(weights: &[f64], polys: &[Poly<f64>]) -> Result<DensityOp> {
    if weights.is_empty() || weights.len() != polys.len() {
        return Err(Error::InvalidArgument("ensemble needs one weight per state".into()));
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::InvalidArgument("ensemble weights must be nonnegative".into()));
    }
    let total = pairwise_sum(weights);
    if (total - 1.0).abs() > TRACE_TOL {
        return Err(Error::InvalidArgument(format!("ensemble weights sum to {total}")));
    }
    let n = polys[0].degree_bound();
    let mut m = CMatrix::zeros(n + 1);
    for (w, p) in weights.iter().zip(polys) {
        if p.degree_bound() != n {
            return Err(Error::DegreeMismatch { left: p.degree_bound(), right: n });
        }
        p.require_unit(1e-10)?;
        let q = p.coeffs();
        for i in 0..=n {
            for j in 0..=n {
                m[(i, j)] += q[i] * q[j].conj() * *w;
            }
        }
    }
    DensityOp::from_matrix(n, m)
}

fn projector(q: &[Cx<f64>]) -> CMatrix<f64> {
    let n = q.len();
    let mut m = CMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = q[i] * q[j].conj();
        }
    }
    m
}

/// `‖ρ - Π_{κ_a}‖₁` from the eigenvalues of the difference.
pub fn trace_distance_to_coherent(rho: &DensityOp, a: &SpherePoint<f64>) -> f64 {
    let k = reproducing_kernel(rho.n, a);
    let diff = rho.matrix.sub(&projector(k.coeffs()));
    let vals = hermitian_eigenvalues(&diff);
    pairwise_sum(&vals.iter().map(|v| v.abs()).collect::<Vec<_>>())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoherentDistance {
    /// `D_N[ρ] = min_a ‖ρ - Π_{κ_a}‖₁`.
    pub distance: f64,
    pub center: SpherePoint<f64>,
    /// `2√(1 - sup u)`, the bound at the Husimi maximizer.
    pub bound: f64,
    pub t_max: f64,
}

/// `D_N[ρ]`, multi-started from the Husimi maximizer and the best of an
/// equal-measure seed grid.
pub fn coherent_distance(rho: &DensityOp) -> Result<CoherentDistance> {
    let wm = rho.husimi_max()?;
    let bound = 2.0 * (1.0 - wm.t).max(0.0).sqrt();
    let (bands, angles) = DISTANCE_SEEDS;
    let grid: Vec<SpherePoint<f64>> = (0..bands * angles)
        .map(|k| {
            let s = ((k / angles) as f64 + 0.5) / bands as f64;
            let th = (k % angles) as f64 * std::f64::consts::TAU / angles as f64;
            SpherePoint::from_s_theta(s, th)
        })
        .collect();
    let mut scored: Vec<(f64, SpherePoint<f64>)> =
        grid.par_iter().map(|z| (trace_distance_to_coherent(rho, z), *z)).collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut starts = vec![(trace_distance_to_coherent(rho, &wm.argmax), wm.argmax)];
    starts.extend(scored.into_iter().take(REFINED_SEEDS));
    let refined: Vec<(f64, SpherePoint<f64>)> = starts
        .par_iter()
        .map(|(v0, seed)| {
            let g = Su2::moving_origin_to(seed);
            let at = |x: &[f64]| g.apply(&SpherePoint::Finite(cx(x[0], x[1])));
            let r = nelder_mead(|x| trace_distance_to_coherent(rho, &at(x)), &[0.0, 0.0], 0.05, 1e-14, 1e-10, 1000);
            if r.value < *v0 {
                (r.value, at(&r.x))
            } else {
                (*v0, *seed)
            }
        })
        .collect();
    // first minimum wins, so the maximizer start is preferred on ties
    let (distance, center) = refined
        .into_iter()
        .reduce(|a, b| if b.0 < a.0 { b } else { a })
        .expect("at least one start");
    Ok(CoherentDistance { distance, center, bound, t_max: wm.t })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixedReport {
    pub n: usize,
    pub rank: usize,
    pub m_omega: f64,
    pub c_value: f64,
    pub c_max: f64,
    pub deficit: f64,
    pub phi: PhiSpec,
    pub entropy: f64,
    pub reference: f64,
    pub gap: f64,
    pub d_n: f64,
    pub d_bound: f64,
    pub t_max: f64,
    /// `δ (1-m)^{-(N+1)} / D²`.
    pub ratio_concentration: Ratio,
    /// `𝒜 m (1-m)^{3(N+1)/2} / √δ`.
    pub ratio_asymmetry: Ratio,
    /// `D² / gap`.
    pub ratio_entropy: Ratio,
    /// `δ ≥ -GAP_SLACK`.
    pub concentration_holds: bool,
    /// `gap ≥ -GAP_SLACK`.
    pub entropy_holds: bool,
}

/// Concentration, entropy and distance functionals of `ρ`. `rule` is used
/// for the concentration; the entropy uses the entropy-purpose rule.
pub fn mixed_functionals(rho: &DensityOp, region: &Region<f64>, phi: &PhiSpec, rule: &QuadRule) -> Result<MixedReport> {
    let n = rho.n;
    let m = region_measure(region).value;
    if !(m > 0.0 && m < 1.0) {
        return Err(Error::InvalidArgument("mixed functionals need 0 < m(Ω) < 1".into()));
    }
    // C is linear in ρ
    let parts = rho
        .weights
        .iter()
        .zip(&rho.states)
        .map(|(w, p)| Ok(w * concentrate(p, region, rule)?))
        .collect::<Result<Vec<f64>>>()?;
    let c_value = pairwise_sum(&parts).clamp(0.0, 1.0);
    let c_max = max_disc_concentration(n, m);
    let deficit = 1.0 - c_value / c_max;
    let ent = landscape_entropy(rho.evals.as_slice(), n, phi, &build_rule(n, Purpose::Entropy)?)?;
    let reference = entropy_reference(n, phi)?;
    let gap = ent.value - reference;
    let dist = coherent_distance(rho)?;
    let d = dist.distance;
    let np1 = (n + 1) as f64;
    let asymmetry = fraenkel_asymmetry(region)?.value;
    Ok(MixedReport {
        n,
        rank: rho.rank(),
        m_omega: m,
        c_value,
        c_max,
        deficit,
        phi: *phi,
        entropy: ent.value,
        reference,
        gap,
        d_n: d,
        d_bound: dist.bound,
        t_max: dist.t_max,
        ratio_concentration: if d < NEAR_KERNEL {
            Ratio::Exact
        } else {
            Ratio::Value(deficit * (1.0 - m).powf(-np1) / (d * d))
        },
        ratio_asymmetry: if deficit < NEAR_ZERO_DEFICIT {
            Ratio::Exact
        } else {
            Ratio::Value(asymmetry * m * (1.0 - m).powf(1.5 * np1) / deficit.sqrt())
        },
        ratio_entropy: if gap < NEAR_ZERO_GAP {
            Ratio::Exact
        } else {
            Ratio::Value(d * d / gap)
        },
        concentration_holds: deficit >= -GAP_SLACK,
        entropy_holds: gap >= -GAP_SLACK,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concentration::deficit;
    use crate::polyspace::{kernel_distance, sup_weighted_modulus};
    use crate::quadrature::integrate_dm;
    use crate::random::{random_cap, random_point, random_unit_poly, trial_rng};
    use crate::sphere::Cap;
    use crate::wehrl::entropy;

    fn random_rank(n: usize, rank: usize, rng: &mut rand_chacha::ChaCha8Rng) -> DensityOp {
        use rand::Rng;
        let polys: Vec<Poly<f64>> = (0..rank).map(|_| random_unit_poly(n, rng)).collect();
        let raw: Vec<f64> = (0..rank).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let mut w: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let rest: f64 = w[1..].iter().sum();
        w[0] = 1.0 - rest;
        density_from_ensemble(&w, &polys).unwrap()
    }

    #[test]
    fn ensembles() {
        let mut rng = trial_rng(31, 0);
        let p = random_unit_poly::<f64>(4, &mut rng);
        let rho = DensityOp::pure(&p).unwrap();
        assert_eq!(rho.rank(), 1);
        let z = random_point(&mut rng);
        assert!((rho.husimi(&z) - p.u(&z)).abs() < 1e-12);

        let basis: Vec<Poly<f64>> = (0..=4).map(|k| Poly::basis(4, k)).collect();
        let mm = density_from_ensemble(&[0.2; 5], &basis).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 0.2 } else { 0.0 };
                assert!((mm.matrix()[(i, j)] - cx(want, 0.0)).norm() < 1e-15);
            }
        }
        assert!((mm.husimi(&z) - 0.2).abs() < 1e-12);

        // two nonorthogonal states: eigenvalues checked against nalgebra
        let q = random_unit_poly::<f64>(4, &mut rng);
        let rho = density_from_ensemble(&[0.3, 0.7], &[p.clone(), q]).unwrap();
        let na = nalgebra::DMatrix::from_fn(5, 5, |i, j| {
            let c = rho.matrix()[(i, j)];
            nalgebra::Complex::new(c.re, c.im)
        });
        let mut ev: Vec<f64> = na.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        assert_eq!(rho.rank(), 2);
        assert!((rho.weights()[0] - ev[0]).abs() < 1e-12 && (rho.weights()[1] - ev[1]).abs() < 1e-12);
        assert!(ev[2..].iter().all(|v| v.abs() < 1e-12));
        assert!((rho.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_inputs() {
        let p = Poly::one(2);
        assert!(density_from_ensemble(&[0.5], &[p.clone()]).is_err());
        assert!(density_from_ensemble(&[1.5, -0.5], &[p.clone(), p.clone()]).is_err());
        let bad = CMatrix::from_diagonal(&[1.5, -0.5, 0.0]);
        assert!(DensityOp::from_matrix(2, bad).is_err());
        let mut m = CMatrix::from_diagonal(&[0.5, 0.5, 0.0]);
        m[(0, 1)] = cx(0.1, 0.0);
        assert!(DensityOp::from_matrix(2, m).is_err());
    }

    #[test]
    fn husimi_normalization_and_coherent_value() {
        let mut rng = trial_rng(32, 0);
        for n in [2usize, 5, 8] {
            let rho = random_rank(n, 3, &mut rng);
            let total = integrate_dm(|z| rho.husimi(z), &build_rule(n, Purpose::ExactPoly).unwrap()).unwrap().value;
            assert!((total * (n + 1) as f64 - 1.0).abs() < 1e-10);
            let a = random_point(&mut rng);
            let k = DensityOp::pure(&reproducing_kernel(n, &a)).unwrap();
            assert!((k.husimi(&a) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_distance_formulas() {
        for i in 0..20u64 {
            let mut rng = trial_rng(33, i);
            let n = 1 + (i as usize % 8);
            let p = random_unit_poly::<f64>(n, &mut rng);
            let a = random_point(&mut rng);
            let rho = DensityOp::pure(&p).unwrap();
            let want = 2.0 * (1.0 - p.u(&a)).max(0.0).sqrt();
            assert!((trace_distance_to_coherent(&rho, &a) - want).abs() < 1e-10);
            let mm = DensityOp::maximally_mixed(n);
            let nf = n as f64;
            assert!((trace_distance_to_coherent(&mm, &a) - 2.0 * nf / (nf + 1.0)).abs() < 1e-12);
        }
        let a = SpherePoint::Finite(cx(0.3, -0.2));
        let k = DensityOp::pure(&reproducing_kernel(5, &a)).unwrap();
        assert!(trace_distance_to_coherent(&k, &a) < 1e-7);
    }

    #[test]
    fn distance_of_pure_state_is_two_sqrt_one_minus_t() {
        let mut rng = trial_rng(34, 0);
        for n in [2usize, 6] {
            let p = random_unit_poly::<f64>(n, &mut rng);
            let t = sup_weighted_modulus(&p).unwrap().t;
            let d = coherent_distance(&DensityOp::pure(&p).unwrap()).unwrap();
            assert!((d.distance - 2.0 * (1.0 - t).sqrt()).abs() < 1e-8, "{d:?} {t}");
        }
    }

    #[test]
    fn mixed_distance_below_bound() {
        let mut rng = trial_rng(35, 0);
        for _ in 0..5 {
            let rho = random_rank(5, 3, &mut rng);
            let d = coherent_distance(&rho).unwrap();
            assert!(d.distance <= d.bound + 1e-8);
            assert!((rho.husimi_max().unwrap().t - d.t_max).abs() < 1e-15);
        }
    }

    #[test]
    fn rank_one_matches_pure_modules() {
        let mut rng = trial_rng(36, 0);
        let n = 4;
        let p = random_unit_poly::<f64>(n, &mut rng);
        let cap = Region::Cap(random_cap(&mut rng, 0.1, 0.6));
        let rule = build_rule(n, Purpose::ExactPoly).unwrap();
        let r = mixed_functionals(&DensityOp::pure(&p).unwrap(), &cap, &PhiSpec::XLogX, &rule).unwrap();
        assert!((r.deficit - deficit(&p, &cap, &rule).unwrap()).abs() < 1e-9);
        let e = entropy(&p, &PhiSpec::XLogX, &build_rule(n, Purpose::Entropy).unwrap()).unwrap().value;
        assert!((r.entropy - e).abs() < 1e-9);
        let kd = kernel_distance(&p).unwrap();
        // D_N(P) = √(2(1-√T)) and D_N[Π_P] = 2√(1-T)
        let t = (1.0 - kd.distance * kd.distance / 2.0).powi(2);
        assert!((r.d_n - 2.0 * (1.0 - t).sqrt()).abs() < 1e-8);
    }

    #[test]
    fn extremal_and_maximally_mixed() {
        let a = SpherePoint::Finite(cx(-0.4, 0.9));
        let n = 4;
        let k = DensityOp::pure(&reproducing_kernel(n, &a)).unwrap();
        let cap = Region::Cap(Cap::with_measure(a, 0.3).unwrap());
        let rule = build_rule(n, Purpose::ExactPoly).unwrap();
        let r = mixed_functionals(&k, &cap, &PhiSpec::XLogX, &rule).unwrap();
        assert!(r.deficit.abs() < 1e-10 && r.gap.abs() < 1e-9 && r.d_n < 1e-6);

        let mm = DensityOp::maximally_mixed(n);
        let half = Region::Cap(Cap::with_measure(SpherePoint::Finite(cx(0.0, 0.0)), 0.5).unwrap());
        let r = mixed_functionals(&mm, &half, &PhiSpec::XLogX, &rule).unwrap();
        // u ≡ 1/(N+1): S = -(N+1) Φ(1/(N+1)) = ln(N+1)
        let want = ((n + 1) as f64).ln() - n as f64 / (n + 1) as f64;
        assert!(r.gap > 0.0 && (r.gap - want).abs() < 1e-6);
        assert!((r.c_value - 0.5).abs() < 1e-12);
        assert!(r.concentration_holds && r.entropy_holds);
    }
}
