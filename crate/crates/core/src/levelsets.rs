//! Distribution function `μ(t) = m({u > t})` of the weighted modulus and the
//! checks built on it.
//!
//! Level sets are measured on equal-measure `(s, θ)` cells. A cell whose
//! four corners and center agree is classified whole; otherwise it is split
//! dyadically up to [`MAX_DEPTH`] times. At the last level the cell is cut
//! into four triangles through its center and `u` is interpolated linearly
//! on each.
//!
//! Samples alone miss small islands. Every component of `{u > t}` holds a
//! local maximum and every component of `{u ≤ t}` holds a zero of `P`
//! (`log u` is superharmonic off the zeros), so cells containing one of
//! these on the other side of `t` are always split.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::polyspace::{sup_weighted_modulus, sup_weighted_modulus_seeded, Poly, PolyEvaluator, WeightedMax};
use crate::scalar::Cx;
use crate::sphere::SpherePoint;
use crate::quadrature::{build_rule, Purpose, RuleKind};
use crate::scalar::pairwise_sum;
use crate::special::gauss_legendre;

pub const MAX_DEPTH: u32 = 4;
/// Absolute error target for `μ(t)`.
pub const MU_BUDGET: f64 = 1e-4;
/// Differences `|μ - μ₀|` below this carry no sign information.
pub const SIGN_BUDGET: f64 = 2e-4;
/// Profiles start at this fraction of `T`.
pub const PROFILE_START: f64 = 1e-4;
/// `T` above `1 - KERNEL_TOL` means `P` is numerically a kernel.
pub const KERNEL_TOL: f64 = 1e-8;

/// Cells whose samples come within this fraction of their spread of `t`
/// are split.
const NEAR_LEVEL: f64 = 0.5;
const PANELS: usize = 32;
const PANEL_NODES: usize = 6;

/// `μ₀(t) = 1 - t^{1/N}`.
pub fn reference_profile(n: usize, t: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        1.0 - t.powf(1.0 / n as f64)
    }
}

/// `∫₀ᵗ μ₀ = t - N/(N+1) t^{1+1/N}`.
fn reference_antiderivative(n: usize, t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    let nf = n as f64;
    t - nf / (nf + 1.0) * t.powf(1.0 + 1.0 / nf)
}

/// Area fraction of a triangle where the linear interpolant of `v` exceeds `t`.
fn triangle_fraction(mut v: [f64; 3], t: f64) -> f64 {
    v.sort_by(f64::total_cmp);
    let [a, b, c] = v;
    if t >= c {
        0.0
    } else if t < a {
        1.0
    } else if t < b {
        1.0 - (t - a) * (t - a) / ((b - a) * (c - a))
    } else {
        (c - t) * (c - t) / ((c - a) * (c - b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelValue {
    pub mu: f64,
    /// Cells visited below the base grid.
    pub refined_cells: usize,
}

/// Cached base grid for one unit-norm polynomial.
#[derive(Debug, Clone)]
pub struct LevelSets {
    poly: Poly<f64>,
    ev: PolyEvaluator<f64>,
    max: WeightedMax<f64>,
    n_s: usize,
    n_theta: usize,
    /// `(n_s + 1) × n_theta` corner values, row `i` at `s = i / n_s`.
    corners: Vec<f64>,
    /// `n_s × n_theta` center values.
    centers: Vec<f64>,
    features: Vec<Feature>,
}

/// A local maximum or a zero of `u`, in `(s, θ)` coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Feature {
    s: f64,
    th: f64,
    value: f64,
}

const POLE_EPS: f64 = 1e-12;
const BOX_EPS: f64 = 1e-9;

impl Feature {
    fn at(z: &SpherePoint<f64>, value: f64) -> Self {
        let (s, th) = z.to_s_theta();
        Self { s, th, value }
    }

    fn inside(&self, c: &Cell) -> bool {
        let (s0, s1) = (c.phi0.sin().powi(2), (c.phi0 + c.dphi).sin().powi(2));
        if self.s < s0 - BOX_EPS || self.s > s1 + BOX_EPS {
            return false;
        }
        if self.s < POLE_EPS || self.s > 1.0 - POLE_EPS {
            return true;
        }
        let tau = std::f64::consts::TAU;
        let rel = (self.th - c.th0).rem_euclid(tau);
        rel <= c.dth + BOX_EPS || rel >= tau - BOX_EPS
    }
}

fn horner(c: &[Cx<f64>], z: Cx<f64>) -> (Cx<f64>, Cx<f64>) {
    let mut f = Cx::new(0.0, 0.0);
    let mut df = Cx::new(0.0, 0.0);
    for a in c.iter().rev() {
        df = df * z + f;
        f = f * z + a;
    }
    (f, df)
}

/// Newton for a zero of `P` from `z`, in the chart `|z| ≤ 1` or `|1/z| ≤ 1`.
fn polish_zero(mono: &[Cx<f64>], mono_rev: &[Cx<f64>], z: SpherePoint<f64>) -> Option<SpherePoint<f64>> {
    // (chart coordinate, reversed chart)
    let (mut w, mut flip) = match z {
        SpherePoint::Infinity => (Cx::new(0.0, 0.0), true),
        SpherePoint::Finite(z) if z.norm_sqr() > 1.0 => (z.inv(), true),
        SpherePoint::Finite(z) => (z, false),
    };
    for _ in 0..60 {
        let (f, df) = horner(if flip { mono_rev } else { mono }, w);
        if df.norm_sqr() == 0.0 {
            return None;
        }
        let step = f / df;
        w -= step;
        if !w.re.is_finite() || !w.im.is_finite() {
            return None;
        }
        if w.norm_sqr() > 1.0 {
            w = w.inv();
            flip = !flip;
        }
        if step.norm() < 1e-15 {
            break;
        }
    }
    Some(if flip {
        if w.norm_sqr() == 0.0 {
            SpherePoint::Infinity
        } else {
            SpherePoint::Finite(w.inv())
        }
    } else {
        SpherePoint::Finite(w)
    })
}

fn find_features(p: &Poly<f64>, ev: &PolyEvaluator<f64>, corners: &[f64], ns: usize, nt: usize) -> Vec<Feature> {
    let mut out = vec![
        Feature { s: 0.0, th: 0.0, value: corners[0] },
        Feature { s: 1.0, th: 0.0, value: corners[ns * nt] },
    ];
    let tau = std::f64::consts::TAU;
    // the pole rows are not scanned; seed from both poles instead
    let mut maxima = vec![SpherePoint::origin(), SpherePoint::Infinity];
    let mut minima = vec![SpherePoint::origin(), SpherePoint::Infinity];
    for i in 1..ns {
        for j in 0..nt {
            let v = corners[i * nt + j];
            let mut is_max = true;
            let mut is_min = true;
            for di in [i - 1, i, i + 1] {
                for dj in [nt - 1, 0, 1] {
                    let jj = (j + dj) % nt;
                    if di == i && jj == j {
                        continue;
                    }
                    let w = corners[di * nt + jj];
                    is_max &= v >= w;
                    is_min &= v <= w;
                }
            }
            let z = SpherePoint::from_s_theta(i as f64 / ns as f64, j as f64 * tau / nt as f64);
            if is_max {
                maxima.push(z);
            }
            if is_min {
                minima.push(z);
            }
        }
    }
    let found: Vec<Feature> = maxima
        .par_iter()
        .filter_map(|z| sup_weighted_modulus_seeded(p, &[*z], false).ok())
        .map(|m| Feature::at(&m.argmax, m.t))
        .collect();
    out.extend(found);
    let mono = p.to_monomial();
    let mono_rev = p.reversed().to_monomial();
    for z in minima {
        if let Some(r) = polish_zero(&mono, &mono_rev, z) {
            let v = ev.u(&r);
            if v < 1e-20 {
                out.push(Feature::at(&r, v));
            }
        }
    }
    out
}

// cells live in (φ, θ) with s = sin²φ, where u is smooth at the poles
fn row_phi(i: usize, n_s: usize) -> f64 {
    (i as f64 / n_s as f64).sqrt().asin()
}

struct Cell {
    phi0: f64,
    th0: f64,
    dphi: f64,
    dth: f64,
    // corners (φ0,θ0), (φ0,θ1), (φ1,θ0), (φ1,θ1); then center
    v: [f64; 5],
}

impl LevelSets {
    pub fn new(p: &Poly<f64>) -> Result<Self> {
        p.require_unit(1e-10)?;
        let n = p.degree_bound();
        let (n_s, n_theta) = match build_rule(n, Purpose::LevelSet)?.kind {
            RuleKind::TensorProduct { n_s, n_theta } => (n_s, n_theta),
            RuleKind::MonteCarlo { .. } => unreachable!("level-set rule is a tensor rule"),
        };
        let ev = p.evaluator();
        let tau = std::f64::consts::TAU;
        let corners: Vec<f64> = (0..(n_s + 1) * n_theta)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / n_theta, k % n_theta);
                ev.u_s_theta(i as f64 / n_s as f64, j as f64 * tau / n_theta as f64)
            })
            .collect();
        let centers: Vec<f64> = (0..n_s * n_theta)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / n_theta, k % n_theta);
                let phi = 0.5 * (row_phi(i, n_s) + row_phi(i + 1, n_s));
                ev.u_s_theta(phi.sin().powi(2), (j as f64 + 0.5) * tau / n_theta as f64)
            })
            .collect();
        let features = find_features(p, &ev, &corners, n_s, n_theta);
        Ok(Self {
            poly: p.clone(),
            ev,
            features,
            max: sup_weighted_modulus(p)?,
            n_s,
            n_theta,
            corners,
            centers,
        })
    }

    pub fn poly(&self) -> &Poly<f64> {
        &self.poly
    }

    pub fn degree(&self) -> usize {
        self.poly.degree_bound()
    }

    /// `T = sup u`.
    pub fn t_max(&self) -> f64 {
        self.max.t
    }

    pub fn weighted_max(&self) -> &WeightedMax<f64> {
        &self.max
    }

    pub fn base_grid(&self) -> (usize, usize) {
        (self.n_s, self.n_theta)
    }

    fn u(&self, phi: f64, th: f64) -> f64 {
        self.ev.u_s_theta(phi.sin().powi(2), th)
    }

    /// `μ(t)` with the number of refined cells.
    pub fn superlevel(&self, t: f64) -> LevelValue {
        if t <= 0.0 {
            return LevelValue { mu: 1.0, refined_cells: 0 };
        }
        if t >= self.max.t {
            return LevelValue { mu: 0.0, refined_cells: 0 };
        }
        let (ns, nt) = (self.n_s, self.n_theta);
        let dth = std::f64::consts::TAU / nt as f64;
        let mut row_sums = Vec::with_capacity(ns);
        let mut refined = 0;
        for i in 0..ns {
            let mut parts = Vec::with_capacity(nt);
            for j in 0..nt {
                let jn = (j + 1) % nt;
                let phi0 = row_phi(i, ns);
                let cell = Cell {
                    phi0,
                    th0: j as f64 * dth,
                    dphi: row_phi(i + 1, ns) - phi0,
                    dth,
                    v: [
                        self.corners[i * nt + j],
                        self.corners[i * nt + jn],
                        self.corners[(i + 1) * nt + j],
                        self.corners[(i + 1) * nt + jn],
                        self.centers[i * nt + j],
                    ],
                };
                let inside: Vec<usize> = (0..self.features.len()).filter(|&k| self.features[k].inside(&cell)).collect();
                let (f, r) = self.cell_fraction(&cell, t, 0, &inside);
                parts.push(f);
                refined += r;
            }
            row_sums.push(pairwise_sum(&parts));
        }
        let mu = pairwise_sum(&row_sums) / (ns * nt) as f64;
        LevelValue { mu: mu.clamp(0.0, 1.0), refined_cells: refined }
    }

    pub fn mu(&self, t: f64) -> f64 {
        self.superlevel(t).mu
    }

    /// Fraction of `cell` where `u > t`, and refined cells used.
    fn cell_fraction(&self, c: &Cell, t: f64, depth: u32, feats: &[usize]) -> (f64, usize) {
        let (lo, hi) = c.v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        // a level curve can cross an edge twice between samples; the margin
        // catches the cells it can reach
        let margin = NEAR_LEVEL * (hi - lo);
        let above = if lo - margin > t {
            5
        } else if hi + margin <= t {
            0
        } else {
            c.v.iter().filter(|&&x| x > t).count().clamp(1, 4)
        };
        let hidden = |want_above: bool| feats.iter().any(|&k| (self.features[k].value > t) == want_above);
        if above == 5 && (depth == MAX_DEPTH || !hidden(false)) {
            return (1.0, 0);
        }
        if above == 0 && (depth == MAX_DEPTH || !hidden(true)) {
            return (0.0, 0);
        }
        if depth == MAX_DEPTH {
            // triangles weighted by the density sin 2φ at their centroids
            let [a, b, cc, d, m] = c.v;
            let dens = |x: f64| (2.0 * (c.phi0 + x * c.dphi)).sin();
            let w = [dens(1.0 / 6.0), dens(0.5), dens(5.0 / 6.0), dens(0.5)];
            let f = [
                triangle_fraction([a, b, m], t),
                triangle_fraction([b, d, m], t),
                triangle_fraction([d, cc, m], t),
                triangle_fraction([cc, a, m], t),
            ];
            let total: f64 = w.iter().sum();
            return (w.iter().zip(&f).map(|(w, f)| w * f).sum::<f64>() / total, 0);
        }
        let (hp, ht) = (0.5 * c.dphi, 0.5 * c.dth);
        let (p1, t1) = (c.phi0 + hp, c.th0 + ht);
        let [v00, v01, v10, v11, vm] = c.v;
        let e_p0 = self.u(c.phi0, t1);
        let e_p1 = self.u(c.phi0 + c.dphi, t1);
        let e_t0 = self.u(p1, c.th0);
        let e_t1 = self.u(p1, c.th0 + c.dth);
        let children = [
            (c.phi0, c.th0, [v00, e_p0, e_t0, vm]),
            (c.phi0, t1, [e_p0, v01, vm, e_t1]),
            (p1, c.th0, [e_t0, vm, v10, e_p1]),
            (p1, t1, [vm, e_t1, e_p1, v11]),
        ];
        let sq = |x: f64| x.sin().powi(2);
        let lower = (sq(p1) - sq(c.phi0)) / (sq(c.phi0 + c.dphi) - sq(c.phi0));
        let mut halves = [0.0; 2];
        let mut count = 4;
        for (k, (phi0, th0, v)) in children.into_iter().enumerate() {
            let center = self.u(phi0 + 0.5 * hp, th0 + 0.5 * ht);
            let child = Cell { phi0, th0, dphi: hp, dth: ht, v: [v[0], v[1], v[2], v[3], center] };
            let sub: Vec<usize> = feats.iter().copied().filter(|&k| self.features[k].inside(&child)).collect();
            let (f, r) = self.cell_fraction(&child, t, depth + 1, &sub);
            halves[k / 2] += 0.5 * f;
            count += r;
        }
        (lower * halves[0] + (1.0 - lower) * halves[1], count)
    }

    /// `∫_a^b μ dt`, by Gauss panels in `x` with `t = T xᴺ`.
    pub fn integral_mu(&self, a: f64, b: f64) -> f64 {
        self.integral_weighted(a, b, |_| 1.0)
    }

    /// `∫_a^b g(t) μ(t) dt` for `g` smooth on `(a, b)`; `g` may have an
    /// integrable singularity at `0`.
    pub fn integral_weighted<G: Fn(f64) -> f64 + Sync>(&self, a: f64, b: f64, g: G) -> f64 {
        let tm = self.max.t;
        let (a, b) = (a.max(0.0), b.min(tm));
        if b <= a {
            return 0.0;
        }
        let nf = self.degree() as f64;
        let (xa, xb) = ((a / tm).powf(1.0 / nf), (b / tm).powf(1.0 / nf));
        let (gx, gw) = gauss_legendre::<f64>(PANEL_NODES);
        let h = (xb - xa) / PANELS as f64;
        let pts: Vec<(f64, f64)> = (0..PANELS)
            .flat_map(|k| {
                let x0 = xa + k as f64 * h;
                gx.iter().zip(&gw).map(move |(x, w)| (x0 + h * x, h * w)).collect::<Vec<_>>()
            })
            .collect();
        let terms: Vec<f64> = pts
            .par_iter()
            .map(|&(x, w)| {
                let t = tm * x.powf(nf);
                w * g(t) * self.mu(t) * nf * tm * x.powf(nf - 1.0)
            })
            .collect();
        pairwise_sum(&terms)
    }

    /// `∫₀¹ μ dt`, which equals `1/(N+1)` for unit `P`.
    pub fn layer_cake(&self) -> f64 {
        self.integral_mu(0.0, 1.0)
    }

    /// `∫_a^b (μ₀ - μ) dt`.
    pub fn gap_integral(&self, a: f64, b: f64) -> Result<f64> {
        if !(0.0 <= a && a < b && b <= 1.0) {
            return Err(Error::InvalidArgument(format!("gap interval ({a}, {b}) not in [0,1]")));
        }
        let n = self.degree();
        let ref_part = reference_antiderivative(n, b) - reference_antiderivative(n, a);
        Ok(ref_part - self.integral_mu(a, b))
    }

    /// Geometric grid of `size` points in `[PROFILE_START·T, T)`.
    pub fn t_grid(&self, size: usize) -> Vec<f64> {
        let tm = self.max.t;
        (0..size)
            .map(|k| tm * PROFILE_START.powf(1.0 - k as f64 / size as f64))
            .collect()
    }

    pub fn profile(&self, size: usize) -> LevelProfile {
        let t_grid = self.t_grid(size);
        let vals: Vec<LevelValue> = t_grid.par_iter().map(|&t| self.superlevel(t)).collect();
        let n = self.degree();
        LevelProfile {
            n,
            t_max: self.max.t,
            mu0: t_grid.iter().map(|&t| reference_profile(n, t)).collect(),
            mu: vals.iter().map(|v| v.mu).collect(),
            refinement_cells: vals.iter().map(|v| v.refined_cells).collect(),
            t_grid,
            base_grid: (self.n_s, self.n_theta),
            max_depth: MAX_DEPTH,
        }
    }

    fn require_non_kernel(&self) -> Result<()> {
        if self.max.t >= 1.0 - KERNEL_TOL {
            return Err(Error::Degenerate("μ ≡ μ₀".into()));
        }
        Ok(())
    }

    /// The unique `t*` where `μ - μ₀` changes sign.
    pub fn crossing_point(&self) -> Result<Crossing> {
        self.require_non_kernel()?;
        let n = self.degree();
        let prof = self.profile(CERTIFY_GRID);
        let d: Vec<f64> = prof.mu.iter().zip(&prof.mu0).map(|(m, m0)| m - m0).collect();
        let sign_changes = count_sign_changes(&d, SIGN_BUDGET);
        // bracket [last d ≥ 0, first clearly negative d]
        let first_neg = d.iter().position(|&x| x < -SIGN_BUDGET);
        let hi_idx = first_neg.unwrap_or(d.len());
        let mut hi = first_neg.map_or(self.max.t, |i| prof.t_grid[i]);
        let mut lo = d[..hi_idx].iter().rposition(|&x| x >= 0.0).map_or(0.0, |i| prof.t_grid[i]);
        let diff = |t: f64| self.mu(t) - reference_profile(n, t);
        while hi - lo > CROSSING_TOL {
            let mid = 0.5 * (lo + hi);
            if diff(mid) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t_star = 0.5 * (lo + hi);
        let before_ok = prof.t_grid.iter().zip(&d).all(|(&t, &x)| t >= t_star || x >= -SIGN_BUDGET);
        let after_ok = prof.t_grid.iter().zip(&d).all(|(&t, &x)| t <= t_star || x <= SIGN_BUDGET);
        Ok(Crossing {
            t_star,
            residual: diff(t_star),
            sign_changes,
            certified: before_ok && after_ok && sign_changes <= 1,
        })
    }

    /// `F(t) = (μ - μ₀)/t^{1/N}` and `H(t) = ∫₀ᵗ(μ - μ₀)/t^{1+1/N}` on the
    /// profile grid, with their largest forward increases.
    pub fn monotone_ratio_check(&self, size: usize) -> Result<MonotoneReport> {
        if size < 2 {
            return Err(Error::InvalidArgument("grid needs at least two points".into()));
        }
        let n = self.degree() as f64;
        let prof = self.profile(size);
        let f: Vec<f64> = prof
            .t_grid
            .iter()
            .zip(prof.mu.iter().zip(&prof.mu0))
            .map(|(&t, (m, m0))| (m - m0) / t.powf(1.0 / n))
            .collect();
        // ∫₀ᵗ F(τ) τ^{1/N} dτ, trapezoid in ln τ, started with F constant on [0, t₀]
        let e = 1.0 + 1.0 / n;
        let t0 = prof.t_grid[0];
        let mut acc = f[0] * t0.powf(e) / e;
        let mut h = vec![acc / t0.powf(e)];
        for k in 1..size {
            let (ta, tb) = (prof.t_grid[k - 1], prof.t_grid[k]);
            let ga = f[k - 1] * ta.powf(e);
            let gb = f[k] * tb.powf(e);
            acc += 0.5 * (ga + gb) * (tb / ta).ln();
            h.push(acc / tb.powf(e));
        }
        Ok(MonotoneReport {
            max_increase_f: max_forward_increase(&f),
            max_increase_h: max_forward_increase(&h),
            f,
            h,
            t_grid: prof.t_grid,
        })
    }

    /// Both sides of the gap-integral bound at `t₀`, plus the super-level
    /// estimate with the trial constant `c0`.
    pub fn lemma_bounds_report(&self, t0: f64, c0: f64) -> Result<LemmaBounds> {
        if !(t0 > 0.0 && t0 < 1.0) {
            return Err(Error::InvalidArgument(format!("t0 = {t0} not in (0,1)")));
        }
        let n = self.degree();
        let np1 = (n + 1) as f64;
        let tm = self.max.t;
        let kernel = tm >= 1.0 - KERNEL_TOL;
        let (t_star, left) = if kernel {
            (f64::NAN, 0.0)
        } else {
            let c = self.crossing_point()?;
            (c.t_star, self.gap_integral(c.t_star, 1.0)?)
        };
        let mu_t0 = self.mu(t0);
        if mu_t0 <= 0.0 {
            return Err(Error::Degenerate(format!("t0 = {t0} is not below T = {tm}")));
        }
        let mass = t0 * mu_t0 + self.integral_mu(t0, tm);
        let q = 1.0 - mu_t0;
        let denom = -(np1 * (-mu_t0).ln_1p()).exp_m1();
        let right = q.powf(-np1) * (1.0 / np1 - mass / denom);

        // smallest C₀ with μ(t) ≤ (1 + C₀(1-T))(1 - (t/T)^{1/N}) on the grid in [t₀, T)
        let nf = n as f64;
        let grid: Vec<f64> = (0..SUPERLEVEL_GRID)
            .map(|k| t0 + (tm - t0) * k as f64 / SUPERLEVEL_GRID as f64)
            .filter(|&t| t < tm)
            .collect();
        let mus: Vec<f64> = grid.par_iter().map(|&t| self.mu(t)).collect();
        let mut empirical_c0 = f64::NEG_INFINITY;
        let mut trial_holds = true;
        for (&t, &m) in grid.iter().zip(&mus) {
            let shape = 1.0 - (t / tm).powf(1.0 / nf);
            if shape <= 0.0 {
                continue;
            }
            trial_holds &= m <= (1.0 + c0 * (1.0 - tm)) * shape + MU_BUDGET;
            if 1.0 - tm > 0.0 {
                empirical_c0 = empirical_c0.max((m / shape - 1.0) / (1.0 - tm));
            }
        }
        Ok(LemmaBounds {
            t0,
            t_star,
            mu_t0,
            left,
            right,
            holds: left <= right + MU_BUDGET,
            trial_c0: c0,
            trial_c0_holds: trial_holds,
            empirical_c0: empirical_c0.max(0.0),
        })
    }
}

/// Grid used to certify the sign pattern around `t*`.
pub const CERTIFY_GRID: usize = 200;
pub const CROSSING_TOL: f64 = 1e-6;
const SUPERLEVEL_GRID: usize = 100;

/// Sign changes of `d`, ignoring entries with `|d| ≤ floor`.
pub fn count_sign_changes(d: &[f64], floor: f64) -> usize {
    let mut last = 0i8;
    let mut changes = 0;
    for &x in d {
        let s = if x > floor {
            1
        } else if x < -floor {
            -1
        } else {
            0
        };
        if s != 0 {
            if last != 0 && s != last {
                changes += 1;
            }
            last = s;
        }
    }
    changes
}

fn max_forward_increase(v: &[f64]) -> f64 {
    v.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelProfile {
    pub n: usize,
    pub t_max: f64,
    pub t_grid: Vec<f64>,
    pub mu: Vec<f64>,
    pub mu0: Vec<f64>,
    pub refinement_cells: Vec<usize>,
    pub base_grid: (usize, usize),
    pub max_depth: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub t_star: f64,
    /// `μ(t*) - μ₀(t*)`.
    pub residual: f64,
    /// Sign changes of `μ - μ₀` above [`SIGN_BUDGET`] on the certification grid.
    pub sign_changes: usize,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneReport {
    pub t_grid: Vec<f64>,
    pub f: Vec<f64>,
    pub h: Vec<f64>,
    pub max_increase_f: f64,
    pub max_increase_h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaBounds {
    pub t0: f64,
    pub t_star: f64,
    pub mu_t0: f64,
    pub left: f64,
    pub right: f64,
    pub holds: bool,
    pub trial_c0: f64,
    pub trial_c0_holds: bool,
    pub empirical_c0: f64,
}

pub fn superlevel_measure(p: &Poly<f64>, t: f64) -> Result<f64> {
    Ok(LevelSets::new(p)?.mu(t))
}

pub fn crossing_point(p: &Poly<f64>) -> Result<Crossing> {
    LevelSets::new(p)?.crossing_point()
}

pub fn monotone_ratio_check(p: &Poly<f64>, grid_size: usize) -> Result<MonotoneReport> {
    LevelSets::new(p)?.monotone_ratio_check(grid_size)
}

pub fn gap_integral(p: &Poly<f64>, a: f64, b: f64) -> Result<f64> {
    LevelSets::new(p)?.gap_integral(a, b)
}

pub fn lemma_bounds_report(p: &Poly<f64>, t0: f64, c0: f64) -> Result<LemmaBounds> {
    LevelSets::new(p)?.lemma_bounds_report(t0, c0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyspace::{reproducing_kernel, su2_rotate};
    use crate::random::{random_su2, random_unit_poly, trial_rng};
    use crate::scalar::cx;
    use crate::sphere::SpherePoint;

    fn e1(n: usize) -> Poly<f64> {
        Poly::basis(n, 1)
    }

    #[test]
    fn triangle_fraction_cases() {
        assert_eq!(triangle_fraction([0.0, 1.0, 2.0], -1.0), 1.0);
        assert_eq!(triangle_fraction([0.0, 1.0, 2.0], 2.0), 0.0);
        assert!((triangle_fraction([0.0, 1.0, 2.0], 1.0) - 0.5).abs() < 1e-15);
        assert!((triangle_fraction([0.0, 0.0, 1.0], 0.5) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn constant_matches_reference_profile() {
        for n in [2, 8] {
            let ls = LevelSets::new(&Poly::one(n)).unwrap();
            for k in 1..100 {
                let t = k as f64 / 100.0;
                assert!((ls.mu(t) - reference_profile(n, t)).abs() < 2e-4, "N={n} t={t}");
            }
        }
    }

    #[test]
    fn kernel_profile_is_rotation_invariant() {
        let a = SpherePoint::new(0.7, -0.2).unwrap();
        let ls = LevelSets::new(&reproducing_kernel(4, &a)).unwrap();
        for t in [0.1, 0.4, 0.8] {
            assert!((ls.mu(t) - reference_profile(4, t)).abs() < 2e-4);
        }
        assert!(matches!(ls.crossing_point(), Err(Error::Degenerate(_))));
    }

    #[test]
    fn layer_cake_and_gap_over_unit_interval() {
        for i in 0..4 {
            let p = random_unit_poly::<f64>(2 + 2 * i, &mut trial_rng(3, i as u64));
            let ls = LevelSets::new(&p).unwrap();
            let n = p.degree_bound();
            assert!((ls.layer_cake() - 1.0 / (n + 1) as f64).abs() < 1e-4);
            assert!(ls.gap_integral(0.0, 1.0).unwrap().abs() < 1e-4);
        }
    }

    #[test]
    fn e1_crossing_and_monotone_f() {
        let ls = LevelSets::new(&e1(2)).unwrap();
        assert!((ls.t_max() - 0.5).abs() < 1e-12);
        let c = ls.crossing_point().unwrap();
        assert!(c.t_star > 0.0 && c.t_star < 0.5);
        assert_eq!(c.sign_changes, 1);
        assert!(c.certified);
        // oracle: dense scan of the sign pattern
        let scan: Vec<f64> = (1..2000).map(|k| k as f64 * 0.5 / 2000.0).map(|t| ls.mu(t) - reference_profile(2, t)).collect();
        assert_eq!(count_sign_changes(&scan, SIGN_BUDGET), 1);
        let m = ls.monotone_ratio_check(200).unwrap();
        assert!(m.max_increase_f <= 5e-4, "{}", m.max_increase_f);
    }

    #[test]
    fn constant_has_flat_ratios_and_tight_bounds() {
        let ls = LevelSets::new(&Poly::one(3)).unwrap();
        let m = ls.monotone_ratio_check(50).unwrap();
        // F is the profile error scaled by t^{-1/N}; the triple zero at ∞
        // is the worst case for linear leaves
        for (f, t) in m.f.iter().zip(&m.t_grid) {
            assert!((f * t.powf(1.0 / 3.0)).abs() <= 2.0 * MU_BUDGET, "{f} at {t}");
        }
        let b = ls.lemma_bounds_report(0.5, 0.0).unwrap();
        assert_eq!(b.left, 0.0);
        assert!(b.right.abs() < 1e-4);
        assert!(b.holds);
    }

    #[test]
    fn random_poly_invariants() {
        for i in 0..3u64 {
            let mut rng = trial_rng(11, i);
            let p = random_unit_poly::<f64>(4, &mut rng);
            let ls = LevelSets::new(&p).unwrap();
            let prof = ls.profile(60);
            assert!(prof.mu.windows(2).all(|w| w[1] <= w[0] + 1e-9));
            assert_eq!(ls.mu(ls.t_max() * 1.001), 0.0);
            let m = ls.monotone_ratio_check(200).unwrap();
            assert!(m.max_increase_f <= 5e-4);
            let g = random_su2::<f64>(&mut rng);
            let lr = LevelSets::new(&su2_rotate(&p, &g)).unwrap();
            for t in [0.05, 0.2, 0.4] {
                assert!((ls.mu(t) - lr.mu(t)).abs() < 2.0 * MU_BUDGET);
            }
        }
    }

    #[test]
    fn sharpness_member_bounds() {
        let (n, eps) = (4usize, 0.05f64);
        let ce = 1.0 + eps * eps / n as f64;
        let mut c = vec![cx(0.0, 0.0); n + 1];
        c[0] = cx(1.0 / ce.sqrt(), 0.0);
        c[1] = cx(eps / (ce.sqrt() * (n as f64).sqrt()), 0.0);
        let p = Poly::new(n, c).unwrap();
        let ls = LevelSets::new(&p).unwrap();
        let b = ls.lemma_bounds_report(0.5, 10.0).unwrap();
        assert!(b.holds, "{b:?}");
        assert!(b.left >= -MU_BUDGET);
    }
}
