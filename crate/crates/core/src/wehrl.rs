//! Generalized Wehrl entropies `S_{N,Φ}(P) = -(N+1) ∫ Φ(u) dm`.
//!
//! Coherent states minimize every `S_{N,Φ}` with `Φ` convex and `Φ(0) = 0`,
//! so the gap to `S_{N,Φ}(1)` is a second measure of distance to a kernel.
//!
//! `Φ(u)` is not a polynomial in `(s, θ)`, and zeros of `u` at the poles
//! produce endpoint singularities like `(1-s) ln(1-s)`. The radial variable
//! is therefore graded, `s = x³(10 - 15x + 6x²)`, which flattens both ends
//! before Gauss–Legendre in `x` is applied.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::concentration::Ratio;
use crate::error::{Error, Result};
use crate::levelsets::LevelSets;
use crate::polyspace::{kernel_distance, su2_rotate, sup_weighted_modulus, Landscape, Poly};
use crate::sphere::Su2;
use crate::quadrature::{monte_carlo_points, QuadRule, RuleKind};
use crate::scalar::pairwise_sum;
use crate::special::gauss_legendre;

/// `u` is clamped to this before taking logarithms.
pub const U_FLOOR: f64 = 1e-300;
/// Most node doublings tried by [`entropy`].
pub const MAX_DOUBLINGS: u32 = 4;
/// Gaps below this report the ratio sentinel.
pub const NEAR_ZERO_GAP: f64 = 1e-12;
/// Slack on `gap ≥ 0`.
pub const GAP_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSpec {
    XLogX,
    Power { p: f64 },
    Hinge { tau: f64 },
}

impl PhiSpec {
    /// The three families at their default parameters.
    pub fn builtin() -> [PhiSpec; 3] {
        [PhiSpec::XLogX, PhiSpec::Power { p: 2.0 }, PhiSpec::Hinge { tau: 0.5 }]
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PhiSpec::XLogX => Ok(()),
            PhiSpec::Power { p } if p > 1.0 && p <= 4.0 => Ok(()),
            PhiSpec::Hinge { tau } if tau > 0.0 && tau < 1.0 => Ok(()),
            PhiSpec::Power { p } => Err(Error::InvalidArgument(format!("power exponent {p} not in (1, 4]"))),
            PhiSpec::Hinge { tau } => Err(Error::InvalidArgument(format!("hinge point {tau} not in (0, 1)"))),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            PhiSpec::XLogX => "xlogx",
            PhiSpec::Power { .. } => "power",
            PhiSpec::Hinge { .. } => "hinge",
        }
    }

    /// `p` or `τ`; `NaN` for `XLogX`.
    pub fn param(&self) -> f64 {
        match *self {
            PhiSpec::XLogX => f64::NAN,
            PhiSpec::Power { p } => p,
            PhiSpec::Hinge { tau } => tau,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            PhiSpec::XLogX if t <= 0.0 => 0.0,
            PhiSpec::XLogX => t * t.max(U_FLOOR).ln(),
            PhiSpec::Power { p } => t.max(0.0).powf(p),
            PhiSpec::Hinge { tau } => (t - tau).max(0.0),
        }
    }

    /// `Φ′(t)` for `t > 0` (right derivative at the hinge).
    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            PhiSpec::XLogX => t.max(U_FLOOR).ln() + 1.0,
            PhiSpec::Power { p } => p * t.powf(p - 1.0),
            PhiSpec::Hinge { tau } => {
                if t >= tau {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Graded radial nodes `s(x)` with weights `s′(x) w(x)`, then angles.
pub(crate) fn graded_rule(n_s: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre::<f64>(n_s);
    x.iter()
        .zip(&w)
        .map(|(&x, &w)| {
            let (s, ds) = grade(x);
            (s, w * ds)
        })
        .unzip()
}

fn graded_integral<L: Landscape<f64> + ?Sized>(ev: &L, phi: &PhiSpec, n_s: usize, n_theta: usize) -> Result<f64> {
    if let PhiSpec::Hinge { tau } = *phi {
        return hinge_sum(ev, tau, &[0.0, 1.0], n_s, n_theta);
    }
    let (s, w) = graded_rule(n_s);
    tensor_sum(ev, phi, &s, &w, n_theta)
}

/// `∫∫ Φ(u) ds dθ/2π` with radial nodes `s`, weights `w` and a uniform angle grid.
fn tensor_sum<L: Landscape<f64> + ?Sized>(ev: &L, phi: &PhiSpec, s: &[f64], w: &[f64], n_theta: usize) -> Result<f64> {
    let dth = std::f64::consts::TAU / n_theta as f64;
    let rows: Vec<Result<f64>> = s
        .par_iter()
        .zip(w)
        .map(|(&s, &w)| {
            let vals: Vec<f64> = (0..n_theta).map(|j| phi.eval(ev.u_s_theta(s, j as f64 * dth))).collect();
            if let Some(j) = vals.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteNode { s, theta: j as f64 * dth });
            }
            Ok(w * pairwise_sum(&vals) / n_theta as f64)
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&rows))
}

/// Samples per ray, shared among panels, when bracketing crossings of the hinge level.
const HINGE_SAMPLES: usize = 256;

/// `s = g(x)` and `g′(x)`; `g(1-x) = 1 - g(x)` keeps `s ≤ 1` near the top.
fn grade(x: f64) -> (f64, f64) {
    let g = |x: f64| x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
    let s = if x <= 0.5 { g(x) } else { 1.0 - g(1.0 - x) };
    (s, 30.0 * x * x * (1.0 - x) * (1.0 - x))
}

/// `∫∫ (u - τ)₊ ds dθ/2π`. Each ray is split at the crossings of `u = τ`
/// inside each panel, and `per_panel` Gauss nodes are used on every piece
/// where `u > τ`, so the kink never sits inside a rule.
fn hinge_sum<L: Landscape<f64> + ?Sized>(ev: &L, tau: f64, breaks: &[f64], per_panel: usize, n_theta: usize) -> Result<f64> {
    let dth = std::f64::consts::TAU / n_theta as f64;
    let (x, wx) = gauss_legendre::<f64>(per_panel);
    let samples = (HINGE_SAMPLES / (breaks.len() - 1)).max(32);
    let rays: Vec<Result<f64>> = (0..n_theta)
        .into_par_iter()
        .map(|j| {
            let parts = breaks
                .windows(2)
                .map(|b| hinge_ray(ev, tau, j as f64 * dth, b[0], b[1], samples, &x, &wx))
                .collect::<Result<Vec<_>>>()?;
            Ok(pairwise_sum(&parts))
        })
        .collect();
    let rays = rays.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&rays) / n_theta as f64)
}

/// `∫ (u(s,θ) - τ)₊ ds` over `s ∈ [lo, hi]` along one ray, in the graded variable.
#[allow(clippy::too_many_arguments)]
fn hinge_ray<L: Landscape<f64> + ?Sized>(
    ev: &L,
    tau: f64,
    theta: f64,
    lo: f64,
    hi: f64,
    k: usize,
    x: &[f64],
    wx: &[f64],
) -> Result<f64> {
    let at = |x: f64| -> f64 {
        let (s, _) = grade(x);
        ev.u_s_theta(lo + (hi - lo) * s, theta) - tau
    };
    let root = |mut a: f64, mut b: f64, mut fa: f64| -> f64 {
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            let fm = at(m);
            if (fm > 0.0) == (fa > 0.0) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
            if b - a < 1e-16 {
                break;
            }
        }
        0.5 * (a + b)
    };
    let mut pieces = Vec::new();
    let mut start = None;
    let mut prev = (0.0, at(0.0));
    if prev.1 > 0.0 {
        start = Some(0.0);
    }
    for i in 1..=k {
        let xi = i as f64 / k as f64;
        let fi = at(xi);
        if !fi.is_finite() {
            return Err(Error::NonFiniteNode { s: lo + (hi - lo) * grade(xi).0, theta });
        }
        if (fi > 0.0) != (prev.1 > 0.0) {
            let r = root(prev.0, xi, prev.1);
            match start.take() {
                Some(a) => pieces.push((a, r)),
                None => start = Some(r),
            }
        }
        prev = (xi, fi);
    }
    if let Some(a) = start {
        pieces.push((a, 1.0));
    }
    let mut terms = Vec::with_capacity(pieces.len() * x.len());
    for (a, b) in pieces {
        let h = b - a;
        for (x, w) in x.iter().zip(wx) {
            let (_, ds) = grade(a + h * x);
            terms.push(h * w * ds * at(a + h * x).max(0.0));
        }
    }
    Ok((hi - lo) * pairwise_sum(&terms))
}

/// Entropy with the graded rule applied on each radial panel `[b_k, b_{k+1}]`.
/// Suited to densities concentrated near `s = 0` at large `N`. Nodes per
/// panel and angles are doubled until successive values differ by less
/// than `tol`.
pub(crate) fn panel_entropy<L: Landscape<f64> + ?Sized>(
    ev: &L,
    n: usize,
    phi: &PhiSpec,
    breaks: &[f64],
    per_panel: usize,
    n_theta: usize,
    tol: f64,
) -> Result<EntropyEstimate> {
    phi.validate()?;
    if breaks.len() < 2 || breaks.windows(2).any(|b| !(b[0] < b[1])) {
        return Err(Error::InvalidArgument("panel breaks must increase".into()));
    }
    let scale = -((n + 1) as f64);
    let run = |k: usize, m: usize| -> Result<f64> {
        let (x, wx) = graded_rule(k);
        let mut s = Vec::with_capacity(k * (breaks.len() - 1));
        let mut w = Vec::with_capacity(s.capacity());
        for b in breaks.windows(2) {
            let h = b[1] - b[0];
            for (x, wx) in x.iter().zip(&wx) {
                s.push(b[0] + h * x);
                w.push(h * wx);
            }
        }
        if let PhiSpec::Hinge { tau } = *phi {
            return Ok(scale * hinge_sum(ev, tau, breaks, k, m)?);
        }
        Ok(scale * tensor_sum(ev, phi, &s, &w, m)?)
    };
    let (mut k, mut m) = (per_panel, n_theta);
    let mut prev = run(k, m)?;
    let mut error = f64::INFINITY;
    for _ in 0..MAX_DOUBLINGS {
        k *= 2;
        m *= 2;
        let value = run(k, m)?;
        error = (value - prev).abs();
        prev = value;
        if error < tol {
            break;
        }
    }
    Ok(EntropyEstimate {
        value: prev,
        error,
        rule: QuadRule::tensor(k * (breaks.len() - 1), m)?.with_tolerance(tol),
        converged: error < tol,
    })
}

/// Entropy together with the rule that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyEstimate {
    pub value: f64,
    /// Last successive difference, or the Monte Carlo standard error.
    pub error: f64,
    /// Final rule after node doubling.
    pub rule: QuadRule,
    pub converged: bool,
}

/// `S_{N,Φ}(P)` for `P` normalized internally. Tensor rules are doubled until
/// successive values differ by less than `rule.target_abs_tol`.
pub fn entropy(p: &Poly<f64>, phi: &PhiSpec, rule: &QuadRule) -> Result<EntropyEstimate> {
    let p = p.normalized()?;
    // Maximum to s = 0: level curves then meet each ray transversally for
    // nearly coherent P, and for N = 1 the zero lands on the graded pole.
    let top = sup_weighted_modulus(&p)?.argmax;
    let p = su2_rotate(&p, &Su2::moving_to_origin(&top));
    landscape_entropy(&p.evaluator(), p.degree_bound(), phi, rule)
}

/// Entropy of any density `u` of degree `n` with `∫ u dm = 1/(n+1)`.
pub(crate) fn landscape_entropy<L: Landscape<f64> + ?Sized>(
    ev: &L,
    n: usize,
    phi: &PhiSpec,
    rule: &QuadRule,
) -> Result<EntropyEstimate> {
    phi.validate()?;
    rule.validate()?;
    let scale = -((n + 1) as f64);
    match rule.kind {
        RuleKind::TensorProduct { n_s, n_theta } => {
            let mut cur = *rule;
            let mut prev = scale * graded_integral(ev, phi, n_s, n_theta)?;
            let mut error = f64::INFINITY;
            for _ in 0..MAX_DOUBLINGS {
                let next = cur.refined();
                let RuleKind::TensorProduct { n_s, n_theta } = next.kind else { unreachable!() };
                let value = scale * graded_integral(ev, phi, n_s, n_theta)?;
                error = (value - prev).abs();
                cur = next;
                prev = value;
                if error < rule.target_abs_tol {
                    break;
                }
            }
            Ok(EntropyEstimate { value: prev, error, rule: cur, converged: error < rule.target_abs_tol })
        }
        RuleKind::MonteCarlo { n, seed } => {
            let vals: Vec<f64> = monte_carlo_points::<f64>(n, seed).iter().map(|z| phi.eval(ev.u(z))).collect();
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("Φ(u) at a Monte Carlo sample"));
            }
            let nf = n as f64;
            let mean = pairwise_sum(&vals) / nf;
            let var = pairwise_sum(&vals.iter().map(|v| (v - mean) * (v - mean)).collect::<Vec<_>>()) / (nf - 1.0).max(1.0);
            let error = -scale * (var / nf).sqrt();
            Ok(EntropyEstimate { value: scale * mean, error, rule: *rule, converged: true })
        }
    }
}

/// `S_{N,Φ}(1) = -(N+1) ∫₀¹ Φ((1-s)ᴺ) ds`.
pub fn entropy_reference(n: usize, phi: &PhiSpec) -> Result<f64> {
    phi.validate()?;
    if n == 0 {
        return Err(Error::InvalidArgument("degree must be at least 1".into()));
    }
    let nf = n as f64;
    Ok(match *phi {
        PhiSpec::XLogX => nf / (nf + 1.0),
        PhiSpec::Power { p } => -(nf + 1.0) / (nf * p + 1.0),
        PhiSpec::Hinge { tau } => {
            // polynomial of degree N on [0, a], so ⌈(N+1)/2⌉ Gauss nodes are exact
            let a = 1.0 - tau.powf(1.0 / nf);
            let (x, w) = gauss_legendre::<f64>(n / 2 + 1);
            let terms: Vec<f64> = x.iter().zip(&w).map(|(x, w)| w * ((1.0 - a * x).powi(n as i32) - tau)).collect();
            -(nf + 1.0) * a * pairwise_sum(&terms)
        }
    })
}

/// `-(N+1) ∫₀ᵀ Φ′(t) μ(t) dt`, the entropy written through the level profile.
pub fn layer_cake_entropy(ls: &LevelSets, phi: &PhiSpec) -> Result<f64> {
    phi.validate()?;
    let np1 = (ls.degree() + 1) as f64;
    let t_max = ls.t_max();
    let integral = match *phi {
        PhiSpec::Hinge { tau } => ls.integral_mu(tau, t_max),
        _ => ls.integral_weighted(0.0, t_max, |t| phi.derivative(t)),
    };
    Ok(-np1 * integral)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WehrlReport {
    pub n: usize,
    pub phi: PhiSpec,
    pub entropy: f64,
    /// Last successive difference of the node-doubled entropy.
    pub entropy_error: f64,
    pub reference: f64,
    pub gap: f64,
    pub d_n: f64,
    /// `D_N² / gap`, or `exact` when the gap is below [`NEAR_ZERO_GAP`].
    pub ratio: Ratio,
    /// `gap ≥ -GAP_SLACK`.
    pub minimal: bool,
    pub converged: bool,
    pub rule: QuadRule,
}

pub fn wehrl_stability_report(p: &Poly<f64>, phi: &PhiSpec, rule: &QuadRule) -> Result<WehrlReport> {
    p.require_unit(1e-10)?;
    let n = p.degree_bound();
    let est = entropy(p, phi, rule)?;
    let reference = entropy_reference(n, phi)?;
    let gap = est.value - reference;
    let d_n = kernel_distance(p)?.distance;
    let ratio = if gap < NEAR_ZERO_GAP {
        Ratio::Exact
    } else {
        Ratio::Value(d_n * d_n / gap)
    };
    Ok(WehrlReport {
        n,
        phi: *phi,
        entropy: est.value,
        entropy_error: est.error,
        reference,
        gap,
        d_n,
        ratio,
        minimal: gap >= -GAP_SLACK,
        converged: est.converged,
        rule: est.rule,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyspace::{reproducing_kernel, su2_rotate};
    use crate::quadrature::{build_rule, Purpose};
    use crate::random::{random_point, random_su2, random_unit_poly, trial_rng};
    use crate::scalar::Cx;

    fn rule(n: usize) -> QuadRule {
        build_rule(n, Purpose::Entropy).unwrap()
    }

    fn p_eps(n: usize, eps: f64) -> Poly<f64> {
        let c = (1.0 + eps * eps / n as f64).sqrt();
        let mut q = vec![Cx::new(0.0, 0.0); n + 1];
        q[0] = Cx::new(1.0 / c, 0.0);
        q[1] = Cx::new(eps / ((n as f64).sqrt() * c), 0.0);
        Poly::new(n, q).unwrap()
    }

    #[test]
    fn reference_values() {
        for n in [1usize, 2, 5, 32] {
            let nf = n as f64;
            let s = entropy(&Poly::one(n), &PhiSpec::XLogX, &rule(n).with_tolerance(1e-12)).unwrap();
            assert!((s.value - nf / (nf + 1.0)).abs() < 1e-10, "{n}: {s:?}");
            let s = entropy(&Poly::one(n), &PhiSpec::Power { p: 2.0 }, &rule(n)).unwrap();
            assert!((s.value + (nf + 1.0) / (2.0 * nf + 1.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn hinge_reference_against_closed_form_and_dense_rule() {
        for (n, tau) in [(2usize, 0.5f64), (7, 0.1), (16, 0.9)] {
            let nf = n as f64;
            let a = 1.0 - tau.powf(1.0 / nf);
            // ∫₀ᵃ (1-s)ᴺ ds = (1 - (1-a)^{N+1}) / (N+1)
            let closed = -(nf + 1.0) * ((1.0 - (1.0 - a).powf(nf + 1.0)) / (nf + 1.0) - tau * a);
            let (x, w) = gauss_legendre::<f64>(10 * (n / 2 + 1));
            let dense: f64 = x.iter().zip(&w).map(|(x, w)| w * ((1.0 - a * x).powi(n as i32) - tau)).sum::<f64>() * a;
            let got = entropy_reference(n, &PhiSpec::Hinge { tau }).unwrap();
            assert!((got - closed).abs() < 1e-13);
            assert!((got + (nf + 1.0) * dense).abs() < 1e-13);
            // the kink at u = τ limits the tensor rule to second order
            let q = entropy(&Poly::one(n), &PhiSpec::Hinge { tau }, &rule(n)).unwrap();
            assert!((q.value - got).abs() < 5.0 * q.error.max(1e-8), "{} {got} {}", q.value, q.error);
        }
    }

    #[test]
    fn kernels_have_zero_gap() {
        let mut rng = trial_rng(3, 0);
        for n in [2usize, 6] {
            let a = random_point(&mut rng);
            let k = reproducing_kernel(n, &a).normalized().unwrap();
            for phi in PhiSpec::builtin() {
                let r = wehrl_stability_report(&k, &phi, &rule(n)).unwrap();
                // the hinge kink keeps its error near 1e-6
                assert!(r.gap.abs() < 1e-8 + 5.0 * r.entropy_error, "{phi:?} {}", r.gap);
                assert!(r.d_n < 1e-6);
            }
        }
    }

    #[test]
    fn p_eps_gap_matches_expansion() {
        let r = wehrl_stability_report(&p_eps(2, 0.1), &PhiSpec::XLogX, &rule(2).with_tolerance(1e-12)).unwrap();
        let target = 0.1f64.powi(4) / 8.0;
        assert!((r.gap / target - 1.0).abs() < 0.02, "{}", r.gap);
        assert!(r.converged);
    }

    #[test]
    fn su2_invariance_and_minimality() {
        for i in 0..6u64 {
            let mut rng = trial_rng(21, i);
            let n = 2 + (i as usize % 5);
            let p = random_unit_poly::<f64>(n, &mut rng);
            let q = su2_rotate(&p, &random_su2(&mut rng));
            for phi in PhiSpec::builtin() {
                let a = entropy(&p, &phi, &rule(n)).unwrap();
                let b = entropy(&q, &phi, &rule(n)).unwrap();
                assert!((a.value - b.value).abs() < 1e-8 + 5.0 * (a.error + b.error), "{phi:?}");
                let r = wehrl_stability_report(&p, &phi, &rule(n)).unwrap();
                assert!(r.minimal && r.gap > 0.0);
                assert!(matches!(r.ratio, Ratio::Value(v) if v.is_finite()));
            }
        }
    }

    #[test]
    fn layer_cake_agrees_with_quadrature() {
        let mut rng = trial_rng(22, 0);
        let p = random_unit_poly::<f64>(4, &mut rng);
        let ls = LevelSets::new(&p).unwrap();
        for phi in PhiSpec::builtin() {
            let q = entropy(&p, &phi, &rule(4)).unwrap().value;
            let l = layer_cake_entropy(&ls, &phi).unwrap();
            assert!((q - l).abs() < 1e-3, "{phi:?}: {q} vs {l}");
        }
    }

    #[test]
    fn monte_carlo_is_close() {
        let p = Poly::one(3);
        let e = entropy(&p, &PhiSpec::XLogX, &QuadRule::monte_carlo(20000, 5).unwrap()).unwrap();
        assert!((e.value - 0.75).abs() < 5.0 * e.error);
    }

    #[test]
    fn invalid_phi() {
        assert!(PhiSpec::Power { p: 1.0 }.validate().is_err());
        assert!(PhiSpec::Power { p: 4.5 }.validate().is_err());
        assert!(PhiSpec::Hinge { tau: 1.0 }.validate().is_err());
        assert!(entropy(&Poly::new(2, vec![Cx::new(0.0, 0.0); 3]).unwrap(), &PhiSpec::XLogX, &rule(2)).is_err());
    }
}
