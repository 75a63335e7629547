//! Integration against `dm` in the flattened coordinates `(s, θ)`.
//!
//! Under `s = |z|²/(1+|z|²)` the measure becomes `ds dθ / 2π` on
//! `[0,1] × [0,2π)`. A tensor rule of Gauss–Legendre in `s` and the
//! trapezoid rule in `θ` is exact for polynomials of degree `≤ 2n_s - 1` in
//! `s` times trigonometric polynomials of degree `≤ n_θ - 1`, which covers
//! every `|P|²(1+|z|²)^{-N}` with `P ∈ 𝒫_N`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::region::{region_contains, Measure, Region};
use crate::scalar::{pairwise_sum, Real};
use crate::special::gauss_legendre;
use crate::sphere::{Cap, SpherePoint, Su2};

/// Value with standard error; the error is zero for deterministic rules.
pub type Estimate<T> = Measure<T>;

/// Node multipliers per [`Purpose`], on `(n_s, n_θ)` of the exact rule.
pub const ENTROPY_MULTIPLIERS: (usize, usize) = (8, 4);
pub const LEVEL_SET_MULTIPLIERS: (usize, usize) = (4, 4);
pub const GENERIC_MULTIPLIERS: (usize, usize) = (2, 2);

/// Below this many nodes evaluation stays on the calling thread.
const PARALLEL_THRESHOLD: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RuleKind {
    TensorProduct { n_s: usize, n_theta: usize },
    MonteCarlo { n: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadRule {
    pub kind: RuleKind,
    pub target_abs_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purpose {
    ExactPoly,
    LevelSet,
    Entropy,
    Generic,
}

impl QuadRule {
    pub fn tensor(n_s: usize, n_theta: usize) -> Result<Self> {
        if n_s == 0 || n_theta == 0 {
            return Err(Error::InvalidArgument("node counts must be positive".into()));
        }
        Ok(Self {
            kind: RuleKind::TensorProduct { n_s, n_theta },
            target_abs_tol: 1e-12,
        })
    }

    pub fn monte_carlo(n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("sample count must be positive".into()));
        }
        Ok(Self {
            kind: RuleKind::MonteCarlo { n, seed },
            target_abs_tol: 1e-3,
        })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.target_abs_tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            RuleKind::TensorProduct { n_s, n_theta } if n_s == 0 || n_theta == 0 => {
                Err(Error::InvalidArgument("node counts must be positive".into()))
            }
            RuleKind::MonteCarlo { n: 0, .. } => {
                Err(Error::InvalidArgument("sample count must be positive".into()))
            }
            _ if !(self.target_abs_tol > 0.0) => {
                Err(Error::InvalidArgument("target tolerance must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    /// Tensor rule with both node counts doubled; Monte Carlo rules quadruple
    /// their sample count.
    pub fn refined(&self) -> Self {
        let kind = match self.kind {
            RuleKind::TensorProduct { n_s, n_theta } => RuleKind::TensorProduct {
                n_s: 2 * n_s,
                n_theta: 2 * n_theta,
            },
            RuleKind::MonteCarlo { n, seed } => RuleKind::MonteCarlo { n: 4 * n, seed },
        };
        Self { kind, ..*self }
    }
}

/// Node counts for integrands built from `𝒫_N`.
pub fn build_rule(n: usize, purpose: Purpose) -> Result<QuadRule> {
    if n == 0 {
        return Err(Error::InvalidArgument("degree must be at least 1".into()));
    }
    let (ms, mt) = match purpose {
        Purpose::ExactPoly => (1, 1),
        Purpose::LevelSet => LEVEL_SET_MULTIPLIERS,
        Purpose::Entropy => ENTROPY_MULTIPLIERS,
        Purpose::Generic => GENERIC_MULTIPLIERS,
    };
    let tol = match purpose {
        Purpose::ExactPoly => 1e-12,
        Purpose::Entropy => 1e-8,
        Purpose::LevelSet => 1e-4,
        Purpose::Generic => 1e-6,
    };
    Ok(QuadRule::tensor(ms * (n + 1), mt * (2 * n + 1))?.with_tolerance(tol))
}

/// A weighted quadrature node. Weights may be negative in region rules
/// built from complements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node<T> {
    pub point: SpherePoint<T>,
    pub weight: T,
}

/// Tensor nodes on the centered cap `{s ≤ s_max}`.
pub fn centered_cap_nodes<T: Real>(n_s: usize, n_theta: usize, s_max: T) -> Vec<Node<T>> {
    let (x, w) = gauss_legendre::<T>(n_s);
    let nt = T::from_usize_lossy(n_theta);
    let mut out = Vec::with_capacity(n_s * n_theta);
    for (xi, wi) in x.iter().zip(&w) {
        let s = s_max * *xi;
        let wt = s_max * *wi / nt;
        for j in 0..n_theta {
            let th = T::TAU() * T::from_usize_lossy(j) / nt;
            out.push(Node {
                point: SpherePoint::from_s_theta(s, th),
                weight: wt,
            });
        }
    }
    out
}

/// Tensor nodes for the whole sphere.
pub fn sphere_nodes<T: Real>(n_s: usize, n_theta: usize) -> Vec<Node<T>> {
    centered_cap_nodes(n_s, n_theta, T::one())
}

/// Tensor nodes for a cap, pulled back from the centered cap by rotation.
pub fn cap_nodes<T: Real>(c: &Cap<T>, n_s: usize, n_theta: usize) -> Vec<Node<T>> {
    let m = c.measure();
    let base = centered_cap_nodes(n_s, n_theta, m);
    if m >= T::one() {
        return base;
    }
    let g = Su2::moving_origin_to(&c.center());
    base.into_iter()
        .map(|nd| Node {
            point: g.apply(&nd.point),
            weight: nd.weight,
        })
        .collect()
}

/// Signed node list whose weighted sums integrate over `Ω`.
///
/// Caps use the rotated centered rule, complements the full-sphere rule
/// minus the inner nodes, and unions concatenate. Sampled indicators fall
/// back to equal-measure cells with one level of boundary refinement.
pub fn region_nodes<T: Real>(r: &Region<T>, n_s: usize, n_theta: usize) -> Vec<Node<T>> {
    match r {
        Region::Cap(c) => cap_nodes(c, n_s, n_theta),
        Region::Complement(inner) => {
            let mut out = sphere_nodes(n_s, n_theta);
            out.extend(region_nodes(inner, n_s, n_theta).into_iter().map(|nd| Node {
                point: nd.point,
                weight: -nd.weight,
            }));
            out
        }
        Region::Union(rs) => rs.iter().flat_map(|x| region_nodes(x, n_s, n_theta)).collect(),
        Region::Sampled(_) => indicator_cell_nodes(r, n_s, n_theta),
    }
}

fn indicator_cell_nodes<T: Real>(r: &Region<T>, n_s: usize, n_theta: usize) -> Vec<Node<T>> {
    let ns = T::from_usize_lossy(n_s);
    let nt = T::from_usize_lossy(n_theta);
    let cell_w = T::one() / (ns * nt);
    let half = T::lit(0.5);
    let quarter = T::lit(0.25);
    let mut out = Vec::new();
    for i in 0..n_s {
        for j in 0..n_theta {
            let s0 = T::from_usize_lossy(i) / ns;
            let t0 = T::from_usize_lossy(j) / nt;
            let ds = T::one() / ns;
            let dt = T::one() / nt;
            let at = |fs: T, ft: T| SpherePoint::from_s_theta(s0 + fs * ds, T::TAU() * (t0 + ft * dt));
            let center = at(half, half);
            let probes = [at(T::zero(), T::zero()), at(T::one(), T::zero()), at(T::zero(), T::one()), at(T::one(), T::one())];
            let c_in = region_contains(r, &center);
            let mixed = probes.iter().any(|p| region_contains(r, p) != c_in);
            if !mixed {
                if c_in {
                    out.push(Node { point: center, weight: cell_w });
                }
                continue;
            }
            for (fs, ft) in [(quarter, quarter), (T::lit(0.75), quarter), (quarter, T::lit(0.75)), (T::lit(0.75), T::lit(0.75))] {
                let p = at(fs, ft);
                if region_contains(r, &p) {
                    out.push(Node { point: p, weight: cell_w * quarter });
                }
            }
        }
    }
    out
}

/// `Σ wᵢ f(zᵢ)` with a non-finite check and order-independent reduction.
pub fn sum_nodes<T, F>(nodes: &[Node<T>], f: F) -> Result<T>
where
    T: Real,
    F: Fn(&SpherePoint<T>) -> T + Sync,
{
    let eval = |nd: &Node<T>| -> Result<T> {
        let v = f(&nd.point);
        if !v.is_finite() {
            let (s, th) = nd.point.to_s_theta();
            return Err(Error::NonFiniteNode {
                s: s.to_f64_lossy(),
                theta: th.to_f64_lossy(),
            });
        }
        Ok(nd.weight * v)
    };
    let terms: Vec<T> = if nodes.len() >= PARALLEL_THRESHOLD {
        nodes.par_iter().map(eval).collect::<Result<_>>()?
    } else {
        nodes.iter().map(eval).collect::<Result<_>>()?
    };
    Ok(pairwise_sum(&terms))
}

/// Seeded Monte Carlo sample of `dm`.
pub fn monte_carlo_points<T: Real>(n: usize, seed: u64) -> Vec<SpherePoint<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let s: f64 = rng.random();
            let th: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            SpherePoint::from_s_theta(T::lit(s), T::lit(th))
        })
        .collect()
}

fn monte_carlo_mean<T, F>(points: &[SpherePoint<T>], f: F) -> Result<Estimate<T>>
where
    T: Real,
    F: Fn(&SpherePoint<T>) -> T + Sync,
{
    let eval = |z: &SpherePoint<T>| -> Result<T> {
        let v = f(z);
        if !v.is_finite() {
            let (s, th) = z.to_s_theta();
            return Err(Error::NonFiniteNode {
                s: s.to_f64_lossy(),
                theta: th.to_f64_lossy(),
            });
        }
        Ok(v)
    };
    let vals: Vec<T> = if points.len() >= PARALLEL_THRESHOLD {
        points.par_iter().map(eval).collect::<Result<_>>()?
    } else {
        points.iter().map(eval).collect::<Result<_>>()?
    };
    let n = T::from_usize_lossy(vals.len());
    let mean = pairwise_sum(&vals) / n;
    let sq: Vec<T> = vals.iter().map(|v| (*v - mean) * (*v - mean)).collect();
    let var = if vals.len() > 1 {
        pairwise_sum(&sq) / (n - T::one())
    } else {
        T::zero()
    };
    Ok(Measure {
        value: mean,
        std_error: (var / n).sqrt(),
    })
}

/// `∫ f dm`.
pub fn integrate_dm<T, F>(f: F, rule: &QuadRule) -> Result<Estimate<T>>
where
    T: Real,
    F: Fn(&SpherePoint<T>) -> T + Sync,
{
    rule.validate()?;
    match rule.kind {
        RuleKind::TensorProduct { n_s, n_theta } => {
            Ok(Measure::exact(sum_nodes(&sphere_nodes(n_s, n_theta), f)?))
        }
        RuleKind::MonteCarlo { n, seed } => monte_carlo_mean(&monte_carlo_points(n, seed), f),
    }
}

/// `∫_Ω f dm`.
pub fn integrate_region<T, F>(f: F, region: &Region<T>, rule: &QuadRule) -> Result<Estimate<T>>
where
    T: Real,
    F: Fn(&SpherePoint<T>) -> T + Sync,
{
    rule.validate()?;
    match rule.kind {
        RuleKind::TensorProduct { n_s, n_theta } => {
            Ok(Measure::exact(sum_nodes(&region_nodes(region, n_s, n_theta), f)?))
        }
        RuleKind::MonteCarlo { n, seed } => monte_carlo_mean(&monte_carlo_points(n, seed), |z| {
            if region_contains(region, z) {
                f(z)
            } else {
                T::zero()
            }
        }),
    }
}
