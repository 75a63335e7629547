//! The space `𝒫_N` of polynomials of degree at most `N`.
//!
//! Coefficients live in the orthonormal basis `e_n(z) = √C(N,n) zⁿ`, so the
//! inner product is the plain coefficient sum. The weighted modulus
//! `u(z) = |P(z)|² (1+|z|²)^{-N}` is evaluated in scaled form: for `|z| ≤ 1`
//! directly, for `|z| > 1` through the reversed polynomial
//! `P̃(w) = Σ q_{N-n} e_n(w)` at `w = 1/z`, using `u_P(z) = u_P̃(1/z)`.

use rayon::prelude::*;

use crate::eigen::CMatrix;
use crate::error::{Error, Result};
use crate::scalar::{cis, cx, ln_binomial, sqrt_binomials, Cx, Real};
use crate::sphere::{chordal_distance, SpherePoint, Su2};

#[derive(Debug, Clone, PartialEq)]
pub struct Poly<T> {
    n: usize,
    coeffs: Vec<Cx<T>>,
}

impl<T: Real> Poly<T> {
    /// Polynomial from orthonormal-basis coefficients `q_0..q_N`.
    pub fn new(n: usize, coeffs: Vec<Cx<T>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("degree bound must be at least 1".into()));
        }
        if coeffs.len() != n + 1 {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients for N = {n}, got {}",
                n + 1,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("polynomial coefficients"));
        }
        Ok(Self { n, coeffs })
    }

    /// Polynomial from monomial coefficients `c_n` of `zⁿ`.
    pub fn from_monomial(n: usize, monomial: &[Cx<T>]) -> Result<Self> {
        if monomial.len() > n + 1 {
            return Err(Error::InvalidArgument(format!(
                "degree {} exceeds bound {n}",
                monomial.len() - 1
            )));
        }
        let mut q = vec![cx(T::zero(), T::zero()); n + 1];
        for (k, c) in monomial.iter().enumerate() {
            let scale = (T::lit(0.5) * ln_binomial::<T>(n, k)).exp();
            q[k] = c / scale;
        }
        Self::new(n, q)
    }

    pub fn one(n: usize) -> Self {
        Self::basis(n, 0)
    }

    /// The basis vector `e_k`.
    pub fn basis(n: usize, k: usize) -> Self {
        assert!(k <= n);
        let mut q = vec![cx(T::zero(), T::zero()); n + 1];
        q[k] = cx(T::one(), T::zero());
        Self { n, coeffs: q }
    }

    pub fn degree_bound(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[Cx<T>] {
        &self.coeffs
    }

    /// Coefficients of `zⁿ`.
    pub fn to_monomial(&self) -> Vec<Cx<T>> {
        let sb = sqrt_binomials::<T>(self.n);
        self.coeffs.iter().zip(&sb).map(|(q, s)| q * *s).collect()
    }

    pub fn norm_sq(&self) -> T {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm_sqr() == T::zero())
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == T::zero() {
            return Err(Error::ZeroPolynomial);
        }
        Ok(self.scale(cx(n.recip(), T::zero())))
    }

    pub fn scale(&self, c: Cx<T>) -> Self {
        Self {
            n: self.n,
            coeffs: self.coeffs.iter().map(|q| q * c).collect(),
        }
    }

    /// `P̃`, with `u_P(z) = u_P̃(1/z)`.
    pub fn reversed(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        Self { n: self.n, coeffs }
    }

    /// Rejects polynomials whose norm is not one within `tol`.
    pub fn require_unit(&self, tol: T) -> Result<()> {
        let norm = self.norm();
        if (norm - T::one()).abs() > tol {
            return Err(Error::NotNormalized {
                norm: norm.to_f64_lossy(),
            });
        }
        Ok(())
    }

    /// `P(z)` itself; overflows for large `N|z|`, use [`Poly::u`] for the
    /// weighted modulus.
    pub fn eval(&self, z: Cx<T>) -> Cx<T> {
        let m = self.to_monomial();
        let mut acc = cx(T::zero(), T::zero());
        for c in m.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn evaluator(&self) -> PolyEvaluator<T> {
        PolyEvaluator::new(self)
    }

    /// The weighted modulus `u(z)`.
    pub fn u(&self, z: &SpherePoint<T>) -> T {
        self.evaluator().u(z)
    }
}

/// `⟨P, Q⟩_N = Σ q_n(P) conj(q_n(Q))`.
pub fn inner_product<T: Real>(p: &Poly<T>, q: &Poly<T>) -> Result<Cx<T>> {
    if p.n != q.n {
        return Err(Error::DegreeMismatch {
            left: p.n,
            right: q.n,
        });
    }
    Ok(p
        .coeffs
        .iter()
        .zip(&q.coeffs)
        .fold(cx(T::zero(), T::zero()), |acc, (a, b)| acc + a * b.conj()))
}

pub fn evaluate_u<T: Real>(p: &Poly<T>, z: &SpherePoint<T>) -> T {
    p.u(z)
}

/// Largest `N` for which scaled Horner evaluation cannot overflow.
fn horner_limit<T: Real>() -> usize {
    (T::max_value().ln() / (T::lit(2.0) * T::LN_2()))
        .floor()
        .to_f64_lossy() as usize
        - 2
}

/// Evaluates `A(w) = Q(w) (1+|w|²)^{-N/2}` and its scaled derivatives in
/// one chart.
#[derive(Debug, Clone)]
struct ChartEval<T> {
    n: usize,
    q: Vec<Cx<T>>,
    /// `q_n √C(N,n)` when Horner is safe.
    horner: Option<Vec<Cx<T>>>,
    half_ln_binom: Vec<T>,
}

/// Scaled value and derivatives: `A = Q S^{-N/2}`, `A1 = Q' S^{-(N-1)/2}`,
/// `A2 = Q'' S^{-(N-2)/2}` with `S = 1+|w|²`.
#[derive(Debug, Clone, Copy)]
struct Scaled<T> {
    a: Cx<T>,
    a1: Cx<T>,
    a2: Cx<T>,
}

impl<T: Real> ChartEval<T> {
    fn new(q: &[Cx<T>]) -> Self {
        let n = q.len() - 1;
        let half_ln_binom: Vec<T> = (0..=n).map(|k| T::lit(0.5) * ln_binomial::<T>(n, k)).collect();
        let horner = (n <= horner_limit::<T>()).then(|| {
            let sb = sqrt_binomials::<T>(n);
            q.iter().zip(&sb).map(|(c, s)| c * *s).collect()
        });
        Self {
            n,
            q: q.to_vec(),
            horner,
            half_ln_binom,
        }
    }

    fn value(&self, w: Cx<T>) -> Cx<T> {
        let nf = T::from_usize_lossy(self.n);
        let s = T::one() + w.norm_sqr();
        match &self.horner {
            Some(d) => {
                let mut acc = cx(T::zero(), T::zero());
                for c in d.iter().rev() {
                    acc = acc * w + c;
                }
                acc * s.powf(-nf * T::lit(0.5))
            }
            None => {
                let r = w.norm();
                if r == T::zero() {
                    return self.q[0];
                }
                let (lr, ls) = (r.ln(), s.ln());
                let phi = w.im.atan2(w.re);
                let mut acc = cx(T::zero(), T::zero());
                for (k, c) in self.q.iter().enumerate() {
                    if c.norm_sqr() == T::zero() {
                        continue;
                    }
                    let kf = T::from_usize_lossy(k);
                    let mag = (self.half_ln_binom[k] + kf * lr - T::lit(0.5) * nf * ls).exp();
                    acc += c * cis(kf * phi) * mag;
                }
                acc
            }
        }
    }

    fn derivs(&self, w: Cx<T>) -> Scaled<T> {
        let n = self.n;
        let nf = T::from_usize_lossy(n);
        let half = T::lit(0.5);
        let s = T::one() + w.norm_sqr();
        let zero = cx(T::zero(), T::zero());
        match &self.horner {
            Some(d) => {
                let (mut p, mut p1, mut p2) = (zero, zero, zero);
                for c in d.iter().rev() {
                    p2 = p2 * w + p1 * T::lit(2.0);
                    p1 = p1 * w + p;
                    p = p * w + c;
                }
                Scaled {
                    a: p * s.powf(-nf * half),
                    a1: p1 * s.powf(-(nf - T::one()) * half),
                    a2: p2 * s.powf(-(nf - T::lit(2.0)) * half),
                }
            }
            None => {
                let r = w.norm();
                let at = |k: usize| if k <= n { self.q[k] * self.half_ln_binom[k].exp() } else { zero };
                if r == T::zero() {
                    return Scaled {
                        a: at(0),
                        a1: at(1),
                        a2: at(2) * T::lit(2.0),
                    };
                }
                let (lr, ls) = (r.ln(), s.ln());
                let phi = w.im.atan2(w.re);
                let (mut a, mut a1, mut a2) = (zero, zero, zero);
                for (k, c) in self.q.iter().enumerate() {
                    if c.norm_sqr() == T::zero() {
                        continue;
                    }
                    let kf = T::from_usize_lossy(k);
                    let h = self.half_ln_binom[k];
                    a += c * cis(kf * phi) * (h + kf * lr - half * nf * ls).exp();
                    if k >= 1 {
                        let e = h + (kf - T::one()) * lr - half * (nf - T::one()) * ls;
                        a1 += c * cis((kf - T::one()) * phi) * (kf * e.exp());
                    }
                    if k >= 2 {
                        let e = h + (kf - T::lit(2.0)) * lr - half * (nf - T::lit(2.0)) * ls;
                        a2 += c * cis((kf - T::lit(2.0)) * phi) * (kf * (kf - T::one()) * e.exp());
                    }
                }
                Scaled { a, a1, a2 }
            }
        }
    }
}

/// Precomputed evaluation of `u` for one polynomial.
#[derive(Debug, Clone)]
pub struct PolyEvaluator<T> {
    n: usize,
    direct: ChartEval<T>,
    reversed: ChartEval<T>,
}

impl<T: Real> PolyEvaluator<T> {
    pub fn new(p: &Poly<T>) -> Self {
        Self {
            n: p.n,
            direct: ChartEval::new(&p.coeffs),
            reversed: ChartEval::new(&p.reversed().coeffs),
        }
    }

    pub fn degree_bound(&self) -> usize {
        self.n
    }

    pub fn u(&self, z: &SpherePoint<T>) -> T {
        match *z {
            SpherePoint::Infinity => self.direct.q[self.n].norm_sqr(),
            SpherePoint::Finite(z) if z.norm_sqr() <= T::one() => self.direct.value(z).norm_sqr(),
            SpherePoint::Finite(z) => self.reversed.value(z.inv()).norm_sqr(),
        }
    }

    /// `u` at equal-measure coordinates, without forming huge `|z|`.
    pub fn u_s_theta(&self, s: T, theta: T) -> T {
        let half = T::lit(0.5);
        if s <= half {
            let r = (s / (T::one() - s)).sqrt();
            self.direct.value(cis(theta) * r).norm_sqr()
        } else {
            let r = ((T::one() - s) / s).sqrt();
            self.reversed.value(cis(-theta) * r).norm_sqr()
        }
    }

    fn chart(&self, reversed: bool) -> &ChartEval<T> {
        if reversed {
            &self.reversed
        } else {
            &self.direct
        }
    }
}

/// Result of maximizing `u` over the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedMax<T> {
    /// `T = sup u`.
    pub t: T,
    pub argmax: SpherePoint<T>,
    /// Gradient norm of `u` at `argmax` in the local chart.
    pub gradient_norm: T,
    pub certified: bool,
    /// Two near-maximal points more than `1e-3` apart were found.
    pub degenerate: bool,
}

const NEWTON_STEPS: usize = 50;
const TOP_SEEDS: usize = 8;

struct Refined<T> {
    point: SpherePoint<T>,
    u: T,
    grad: T,
}

/// `u`, the complex gradient `G = ∂_w̄ u`, and the Hessian pieces
/// `a = ∂_w G` (real) and `b = ∂_w̄ G` at `w`.
fn local_model<T: Real>(e: &ChartEval<T>, w: Cx<T>) -> (T, Cx<T>, T, Cx<T>) {
    let nf = T::from_usize_lossy(e.n);
    let s = T::one() + w.norm_sqr();
    let rs = s.sqrt();
    let Scaled { a, a1, a2 } = e.derivs(w);
    let b = a1.conj() * rs - w * a.conj() * nf;
    let bz = w.conj() * a1.conj() / rs - a.conj() * nf;
    let bzb = a2.conj() - w * a1.conj() * ((nf - T::one()) / rs);
    let g = a * b / s;
    let np1 = nf + T::one();
    let hz = -(w.conj() * a * b) * (np1 / (s * s)) + a1 * b / (s * rs) + a * bz / s;
    let hzb = -(w * a * b) * (np1 / (s * s)) + a * bzb / s;
    (a.norm_sqr(), g, hz.re, hzb)
}

fn to_chart<T: Real>(z: &SpherePoint<T>) -> (bool, Cx<T>) {
    match *z {
        SpherePoint::Infinity => (true, cx(T::zero(), T::zero())),
        SpherePoint::Finite(z) if z.norm_sqr() <= T::one() => (false, z),
        SpherePoint::Finite(z) => (true, z.inv()),
    }
}

fn from_chart<T: Real>(reversed: bool, w: Cx<T>) -> SpherePoint<T> {
    if !reversed {
        SpherePoint::Finite(w)
    } else if w.norm_sqr() == T::zero() {
        SpherePoint::Infinity
    } else {
        SpherePoint::Finite(w.inv())
    }
}

/// A density on the sphere with a local second-order model in either chart.
pub(crate) trait Landscape<T: Real>: Sync {
    fn u(&self, z: &SpherePoint<T>) -> T;
    fn u_s_theta(&self, s: T, theta: T) -> T;
    fn chart_u(&self, reversed: bool, w: Cx<T>) -> T;
    fn model(&self, reversed: bool, w: Cx<T>) -> (T, Cx<T>, T, Cx<T>);
}

impl<T: Real> Landscape<T> for PolyEvaluator<T> {
    fn u(&self, z: &SpherePoint<T>) -> T {
        PolyEvaluator::u(self, z)
    }

    fn u_s_theta(&self, s: T, theta: T) -> T {
        PolyEvaluator::u_s_theta(self, s, theta)
    }

    fn chart_u(&self, reversed: bool, w: Cx<T>) -> T {
        self.chart(reversed).value(w).norm_sqr()
    }

    fn model(&self, reversed: bool, w: Cx<T>) -> (T, Cx<T>, T, Cx<T>) {
        local_model(self.chart(reversed), w)
    }
}

/// `Σ w_j u_j`, the Husimi function of a mixture.
impl<T: Real> Landscape<T> for [(T, PolyEvaluator<T>)] {
    fn u(&self, z: &SpherePoint<T>) -> T {
        self.iter().fold(T::zero(), |acc, (w, e)| acc + *w * e.u(z))
    }

    fn u_s_theta(&self, s: T, theta: T) -> T {
        self.iter().fold(T::zero(), |acc, (w, e)| acc + *w * e.u_s_theta(s, theta))
    }

    fn chart_u(&self, reversed: bool, z: Cx<T>) -> T {
        self.iter().fold(T::zero(), |acc, (w, e)| acc + *w * e.chart_u(reversed, z))
    }

    fn model(&self, reversed: bool, z: Cx<T>) -> (T, Cx<T>, T, Cx<T>) {
        let zero = cx(T::zero(), T::zero());
        self.iter().fold((T::zero(), zero, T::zero(), zero), |(u, g, a, b), (w, e)| {
            let (u1, g1, a1, b1) = e.model(reversed, z);
            (u + *w * u1, g + g1 * *w, a + *w * a1, b + b1 * *w)
        })
    }
}

/// Damped Newton ascent on `u`, switching charts when `|w| > 1`.
fn refine<T: Real, L: Landscape<T> + ?Sized>(ev: &L, start: &SpherePoint<T>) -> Refined<T> {
    let (mut rev, mut w) = to_chart(start);
    let tol = T::lit(1e-12);
    let max_step = T::lit(0.5);
    let mut grad = T::infinity();
    let mut u = ev.chart_u(rev, w);
    for _ in 0..NEWTON_STEPS {
        let (u0, g, a, b) = ev.model(rev, w);
        u = u0;
        grad = T::lit(2.0) * g.norm();
        if grad <= tol {
            break;
        }
        let det = a * a - b.norm_sqr();
        let newton = a < T::zero() && det > T::epsilon() * a * a;
        let mut delta = if newton {
            (-(g * a) + b * g.conj()) / det
        } else {
            g * (T::one().min(T::lit(0.25) / g.norm()))
        };
        if delta.norm() > max_step {
            delta = delta * (max_step / delta.norm());
        }
        let mut accepted = false;
        for _ in 0..60 {
            let cand = w + delta;
            let uc = ev.chart_u(rev, cand);
            // Near the maximum a Newton step changes u below rounding.
            let slack = if newton { T::epsilon() * T::lit(64.0) * u } else { T::zero() };
            if uc >= u - slack {
                w = cand;
                u = uc;
                accepted = true;
                break;
            }
            delta = delta * T::lit(0.5);
        }
        if !accepted {
            break;
        }
        if w.norm_sqr() > T::one() {
            w = w.inv();
            rev = !rev;
        }
    }
    let (u_final, g, _, _) = ev.model(rev, w);
    grad = grad.min(T::lit(2.0) * g.norm());
    Refined {
        point: from_chart(rev, w),
        u: u_final.max(u),
        grad,
    }
}

/// Equal-measure seed grid of `(2N+2) × (2N+1)` points plus `∞`, in
/// lexicographic `(s, θ)` order.
pub fn seed_grid<T: Real>(n: usize) -> Vec<SpherePoint<T>> {
    let ns = 2 * n + 2;
    let nt = 2 * n + 1;
    let mut out = Vec::with_capacity(ns * nt + 1);
    for i in 0..ns {
        let s = (T::from_usize_lossy(i) + T::lit(0.5)) / T::from_usize_lossy(ns);
        for j in 0..nt {
            let th = T::TAU() * T::from_usize_lossy(j) / T::from_usize_lossy(nt);
            out.push(SpherePoint::from_s_theta(s, th));
        }
    }
    out.push(SpherePoint::Infinity);
    out
}

/// `sup u` over the sphere, seeded from the equal-measure grid.
pub fn sup_weighted_modulus<T: Real>(p: &Poly<T>) -> Result<WeightedMax<T>> {
    sup_weighted_modulus_seeded(p, &[], true)
}

/// `sup u` refined from the best grid points (when `use_grid`) and from
/// the caller's seeds.
pub fn sup_weighted_modulus_seeded<T: Real>(
    p: &Poly<T>,
    seeds: &[SpherePoint<T>],
    use_grid: bool,
) -> Result<WeightedMax<T>> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    maximize_landscape(&p.evaluator(), p.n, seeds, use_grid)
}

/// Multi-start maximization of any [`Landscape`] of degree `n`.
pub(crate) fn maximize_landscape<T: Real, L: Landscape<T> + ?Sized>(
    ev: &L,
    n: usize,
    seeds: &[SpherePoint<T>],
    use_grid: bool,
) -> Result<WeightedMax<T>> {
    let mut starts: Vec<SpherePoint<T>> = Vec::new();
    let mut grid_best: Option<(SpherePoint<T>, T)> = None;
    if use_grid {
        let grid = seed_grid::<T>(n);
        let vals: Vec<T> = grid.par_iter().map(|z| ev.u(z)).collect();
        let mut order: Vec<usize> = (0..grid.len()).collect();
        // stable: ties keep lexicographic (s, θ) order
        order.sort_by(|&i, &j| vals[j].partial_cmp(&vals[i]).unwrap_or(core::cmp::Ordering::Equal));
        grid_best = Some((grid[order[0]], vals[order[0]]));
        starts.extend(order.iter().take(TOP_SEEDS).map(|&i| grid[i]));
    }
    starts.extend_from_slice(seeds);
    if starts.is_empty() {
        return Err(Error::InvalidArgument("no seeds for maximization".into()));
    }
    let refined: Vec<Refined<T>> = starts.par_iter().map(|z| refine(ev, z)).collect();
    let mut best = 0;
    for (i, r) in refined.iter().enumerate() {
        if r.u > refined[best].u {
            best = i;
        }
    }
    let t = refined[best].u;
    let near = T::lit(1e-8);
    let spread = T::lit(1e-3);
    let degenerate = refined.iter().any(|r| {
        r.u >= t - near
            && refined
                .iter()
                .any(|q| q.u >= t - near && chordal_distance(&r.point, &q.point) > spread)
    });
    let certified = refined[best].grad <= T::lit(1e-10);
    if !certified {
        if let Some((z, v)) = grid_best {
            if v >= t {
                return Ok(WeightedMax {
                    t: v,
                    argmax: z,
                    gradient_norm: refined[best].grad,
                    certified: false,
                    degenerate,
                });
            }
        }
    }
    Ok(WeightedMax {
        t,
        argmax: refined[best].point,
        gradient_norm: refined[best].grad,
        certified,
        degenerate,
    })
}

/// Normalized reproducing kernel `κ_{N,a}`; `κ_{N,∞} = e_N`.
pub fn reproducing_kernel<T: Real>(n: usize, a: &SpherePoint<T>) -> Poly<T> {
    match *a {
        SpherePoint::Infinity => Poly::basis(n, n),
        SpherePoint::Finite(a) => {
            let r2 = a.norm_sqr();
            if r2 == T::zero() {
                return Poly::one(n);
            }
            let nf = T::from_usize_lossy(n);
            let lr = a.norm().ln();
            let ls = (T::one() + r2).ln();
            let phi = a.im.atan2(a.re);
            let coeffs = (0..=n)
                .map(|k| {
                    let kf = T::from_usize_lossy(k);
                    let mag = (T::lit(0.5) * ln_binomial::<T>(n, k) + kf * lr - T::lit(0.5) * nf * ls).exp();
                    cis(-kf * phi) * mag
                })
                .collect();
            Poly { n, coeffs }
        }
    }
}

/// Matrix of the action `(gP)(z) = (β̄z+α)^N P((ᾱz-β)/(β̄z+α))` in the
/// orthonormal basis, so that `u_{gP}(g·z) = u_P(z)`.
///
/// Column `n` holds the coefficients of `g·e_n`. Row `k` is recovered by a
/// discrete Fourier transform on the circle of radius `√(k/(N-k))`, where
/// the `k`-th term dominates, which keeps the computation well conditioned
/// for large `N`.
pub fn su2_matrix<T: Real>(n: usize, g: &Su2<T>) -> CMatrix<T> {
    let (alpha, beta) = (g.alpha(), g.beta());
    let zero = cx(T::zero(), T::zero());
    let hl: Vec<T> = (0..=n).map(|k| T::lit(0.5) * ln_binomial::<T>(n, k)).collect();
    let mut u = CMatrix::zeros(n + 1);
    let powers = |base: Cx<T>| -> Vec<Cx<T>> {
        let mut v = Vec::with_capacity(n + 1);
        let mut acc = cx(T::one(), T::zero());
        for _ in 0..=n {
            v.push(acc);
            acc = acc * base;
        }
        v
    };
    // k = 0: value at z = 0; k = N: leading coefficient
    let (mb, al) = (powers(-beta), powers(alpha));
    let (ac, bc) = (powers(alpha.conj()), powers(beta.conj()));
    for col in 0..=n {
        let c = hl[col].exp();
        u[(0, col)] = mb[col] * al[n - col] * c;
        u[(n, col)] = ac[col] * bc[n - col] * c;
    }
    let m = n + 1;
    let mf = T::from_usize_lossy(m);
    let rows: Vec<(usize, Vec<Cx<T>>)> = (1..n)
        .into_par_iter()
        .map(|k| {
            let kf = T::from_usize_lossy(k);
            let ln_rho = T::lit(0.5) * (kf / (T::from_usize_lossy(n) - kf)).ln();
            let mut row = vec![zero; n + 1];
            for j in 0..m {
                let ang = T::TAU() * T::from_usize_lossy(j) / mf;
                let z = cis(ang) * ln_rho.exp();
                let x = alpha.conj() * z - beta;
                let y = beta.conj() * z + alpha;
                let (lx, ly) = (x.ln(), y.ln());
                let twiddle = cis(-ang * kf);
                for (col, slot) in row.iter_mut().enumerate() {
                    let (pc, qc) = (col, n - col);
                    if (pc > 0 && x.norm_sqr() == T::zero()) || (qc > 0 && y.norm_sqr() == T::zero()) {
                        continue;
                    }
                    let mut e = cx(hl[col] - hl[k] - kf * ln_rho, T::zero());
                    if pc > 0 {
                        e += lx * T::from_usize_lossy(pc);
                    }
                    if qc > 0 {
                        e += ly * T::from_usize_lossy(qc);
                    }
                    *slot += e.exp() * twiddle;
                }
            }
            for v in row.iter_mut() {
                *v = *v / mf;
            }
            (k, row)
        })
        .collect();
    for (k, row) in rows {
        for (col, v) in row.into_iter().enumerate() {
            u[(k, col)] = v;
        }
    }
    u
}

/// `g·P`; unitary, with `u_{gP}(g·z) = u_P(z)`.
pub fn su2_rotate<T: Real>(p: &Poly<T>, g: &Su2<T>) -> Poly<T> {
    let u = su2_matrix(p.n, g);
    Poly {
        n: p.n,
        coeffs: u.mul_vec(&p.coeffs),
    }
}

/// `D_N(P) = min ‖P - e^{iθ} κ_{N,a}‖` with its minimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelDistance<T> {
    pub distance: T,
    pub max: WeightedMax<T>,
    pub center: SpherePoint<T>,
    pub phase: T,
}

/// `D_N(P) = √(2(1-√T))` for a unit-norm `P`.
pub fn kernel_distance<T: Real>(p: &Poly<T>) -> Result<KernelDistance<T>> {
    p.require_unit(T::lit(1e-10))?;
    let max = sup_weighted_modulus(p)?;
    Ok(kernel_distance_from_max(p, max))
}

pub fn kernel_distance_from_max<T: Real>(p: &Poly<T>, max: WeightedMax<T>) -> KernelDistance<T> {
    let gap = (T::one() - max.t.sqrt()).max(T::zero());
    let kappa = reproducing_kernel(p.n, &max.argmax);
    let ip = inner_product(p, &kappa).expect("same degree");
    KernelDistance {
        distance: (T::lit(2.0) * gap).sqrt(),
        max,
        center: max.argmax,
        phase: ip.im.atan2(ip.re),
    }
}
