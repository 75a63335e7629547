//! The Bargmann–Fock limit of `𝒫_N` under `z ↦ √(N/π) z`.
//!
//! Sphere functionals of rescaled objects are evaluated in the rescaled
//! plane: with `z = √(π/N) w`, `(N+1) dm(z) = ((N+1)/N) (1+π|w|²/N)^{-2} dw`,
//! which keeps the work independent of `N` for low-degree `P`.
//!
//! Whole-plane entropies use graded Gauss–Legendre panels in `t = π|w|²`
//! rather than Gauss–Laguerre: the Laguerre node generator loses accuracy
//! past about a hundred nodes, which rules out node doubling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::concentration::fraenkel_asymmetry;
use crate::error::{Error, Result};
use crate::optimize::nelder_mead;
use crate::polyspace::{kernel_distance_from_max, sup_weighted_modulus_seeded, Poly};
use crate::region::{region_measure, Region};
use crate::scalar::{pairwise_sum, Cx};
use crate::sphere::{Cap, SpherePoint};
use crate::special::gauss_legendre;
use crate::wehrl::{graded_rule, panel_entropy, EntropyEstimate, PhiSpec, GAP_SLACK, MAX_DOUBLINGS};

/// Degrees `2⁶ .. 2¹²`.
pub const DEFAULT_N_LIST: [usize; 7] = [64, 128, 256, 512, 1024, 2048, 4096];
/// Minimum empirical order in `1/N`.
pub const ORDER_THRESHOLD: f64 = 0.9;
/// Errors below this (relative to `max(1, |target|)`) count as exact.
pub const EXACT_FLOOR: f64 = 1e-13;
/// Entropy node doubling stops below this successive difference.
pub const ENTROPY_TOL: f64 = 1e-11;
/// Sphere seed grid is used for the distance search up to this degree.
const GRID_SEARCH_MAX_N: usize = 128;
const PLANAR_GRID: usize = 40;

/// Entire function given by monomial coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct FockPoly {
    coeffs: Vec<Cx<f64>>,
}

impl FockPoly {
    pub fn new(coeffs: Vec<Cx<f64>>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("no coefficients".into()));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("Fock coefficients"));
        }
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.norm_sqr() == 0.0) {
            coeffs.pop();
        }
        Ok(Self { coeffs })
    }

    pub fn one() -> Self {
        Self::monomial(0)
    }

    /// `zᵏ`.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![Cx::new(0.0, 0.0); k + 1];
        c[k] = Cx::new(1.0, 0.0);
        Self { coeffs: c }
    }

    pub fn coeffs(&self) -> &[Cx<f64>] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm_sqr() == 0.0)
    }

    pub fn eval(&self, w: Cx<f64>) -> Cx<f64> {
        self.coeffs.iter().rev().fold(Cx::new(0.0, 0.0), |acc, c| acc * w + c)
    }

    pub fn norm_sq(&self) -> f64 {
        fock_inner_product(self, self).re
    }

    pub fn normalized(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let k = self.norm_sq().sqrt();
        Ok(Self {
            coeffs: self.coeffs.iter().map(|c| c / k).collect(),
        })
    }
}

/// `Σ c_n conj(d_n) n!/πⁿ`.
pub fn fock_inner_product(f: &FockPoly, g: &FockPoly) -> Cx<f64> {
    let mut moment = 1.0;
    let mut terms = Vec::with_capacity(f.coeffs.len().min(g.coeffs.len()));
    for (k, (a, b)) in f.coeffs.iter().zip(&g.coeffs).enumerate() {
        if k > 0 {
            moment *= k as f64 / std::f64::consts::PI;
        }
        terms.push(a * b.conj() * moment);
    }
    crate::scalar::pairwise_sum_cx(&terms)
}

/// Closed Euclidean disc in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanarDisc {
    pub center: [f64; 2],
    pub radius: f64,
}

impl PlanarDisc {
    pub fn new(center: Cx<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() || !center.re.is_finite() || !center.im.is_finite() {
            return Err(Error::InvalidArgument(format!("disc radius {radius} must be positive and finite")));
        }
        Ok(Self {
            center: [center.re, center.im],
            radius,
        })
    }

    pub fn with_area(center: Cx<f64>, area: f64) -> Result<Self> {
        Self::new(center, (area / std::f64::consts::PI).sqrt())
    }

    pub fn center_cx(&self) -> Cx<f64> {
        Cx::new(self.center[0], self.center[1])
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius
    }
}

/// Area of the intersection of discs with radii `r1`, `r2` at distance `d`.
pub fn planar_lens_area(r1: f64, r2: f64, d: f64) -> f64 {
    use std::f64::consts::PI;
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        return PI * r1.min(r2).powi(2);
    }
    let a1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0).acos();
    let a2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0).acos();
    let k = ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)).max(0.0).sqrt();
    r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * k
}

/// Finite union of pairwise disjoint discs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanarRegion {
    discs: Vec<PlanarDisc>,
}

impl PlanarRegion {
    pub fn new(discs: Vec<PlanarDisc>) -> Result<Self> {
        if discs.is_empty() {
            return Err(Error::EmptyRegion);
        }
        for (i, a) in discs.iter().enumerate() {
            PlanarDisc::new(a.center_cx(), a.radius)?;
            for (j, b) in discs.iter().enumerate().skip(i + 1) {
                let d = (a.center_cx() - b.center_cx()).norm();
                let measure = planar_lens_area(a.radius, b.radius, d);
                if measure > crate::region::DISJOINT_TOL {
                    return Err(Error::Overlap {
                        first: i,
                        second: j,
                        measure,
                    });
                }
            }
        }
        Ok(Self { discs })
    }

    pub fn disc(d: PlanarDisc) -> Self {
        Self { discs: vec![d] }
    }

    /// Disc of area 1 centered at the origin.
    pub fn unit_area_disc() -> Self {
        Self::disc(PlanarDisc::with_area(Cx::new(0.0, 0.0), 1.0).expect("valid disc"))
    }

    pub fn discs(&self) -> &[PlanarDisc] {
        &self.discs
    }

    pub fn area(&self) -> f64 {
        self.discs.iter().map(PlanarDisc::area).sum()
    }

    pub fn contains(&self, w: Cx<f64>) -> bool {
        self.discs.iter().any(|d| (w - d.center_cx()).norm() <= d.radius)
    }
}

/// `P^N(z) = P(√(N/π) z)` as an element of `𝒫_N`.
pub fn rescale_poly(f: &FockPoly, n: usize) -> Result<Poly<f64>> {
    if n < f.degree().max(1) {
        return Err(Error::InvalidArgument(format!(
            "degree bound {n} is below the degree {} of P",
            f.degree()
        )));
    }
    let k = (n as f64 / std::f64::consts::PI).sqrt();
    let mut scale = 1.0;
    let mono: Vec<Cx<f64>> = f
        .coeffs
        .iter()
        .map(|c| {
            let v = c * scale;
            scale *= k;
            v
        })
        .collect();
    Poly::from_monomial(n, &mono)
}

/// `Ω^N = √(π/N) Ω` as a sphere region.
pub fn rescale_region(omega: &PlanarRegion, n: usize) -> Result<Region<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("degree must be at least 1".into()));
    }
    let k = (std::f64::consts::PI / n as f64).sqrt();
    let caps = omega
        .discs
        .iter()
        .map(|d| Cap::from_planar_disc(d.center_cx() * k, d.radius * k).map(Region::Cap))
        .collect::<Result<Vec<_>>>()?;
    if caps.len() == 1 {
        Ok(caps.into_iter().next().expect("one cap"))
    } else {
        Region::union(caps)
    }
}

/// `(1 - m(Ω^N))^{N+1}`.
pub fn measure_factor(omega: &PlanarRegion, n: usize) -> Result<f64> {
    let m = region_measure(&rescale_region(omega, n)?).value;
    Ok(((n + 1) as f64 * (-m).ln_1p()).exp())
}

/// Planar asymmetry `inf_D |Ω Δ D| / |Ω|` over discs with `|D| = |Ω|`.
pub fn fock_asymmetry(omega: &PlanarRegion) -> f64 {
    if omega.discs.len() == 1 {
        return 0.0;
    }
    let area = omega.area();
    let r = (area / std::f64::consts::PI).sqrt();
    let objective = |x: &[f64]| {
        let c = Cx::new(x[0], x[1]);
        let inter: f64 = omega
            .discs
            .iter()
            .map(|d| planar_lens_area(d.radius, r, (d.center_cx() - c).norm()))
            .sum();
        2.0 * (area - inter) / area
    };
    let centroid = omega.discs.iter().fold(Cx::new(0.0, 0.0), |acc, d| acc + d.center_cx() * d.area()) / area;
    let mut starts = vec![centroid];
    starts.extend(omega.discs.iter().map(PlanarDisc::center_cx));
    starts
        .iter()
        .map(|s| nelder_mead(objective, &[s.re, s.im], 0.25 * r, 1e-14, 1e-11, 4000).value)
        .fold(f64::INFINITY, f64::min)
        .max(0.0)
}

/// `∫_disc g dw` in polar coordinates about the disc center.
fn disc_integral(d: &PlanarDisc, extra_nodes: usize, g: impl Fn(Cx<f64>) -> f64 + Sync) -> f64 {
    let c = d.center_cx();
    let n_r = 48 + extra_nodes;
    let n_th = 64 + 2 * extra_nodes + (8.0 * std::f64::consts::PI * c.norm() * d.radius).ceil() as usize;
    let (x, w) = gauss_legendre::<f64>(n_r);
    let dth = std::f64::consts::TAU / n_th as f64;
    let rows: Vec<f64> = x
        .par_iter()
        .zip(&w)
        .map(|(&x, &w)| {
            let r = d.radius * x;
            let vals: Vec<f64> = (0..n_th).map(|j| g(c + Cx::from_polar(r, j as f64 * dth))).collect();
            d.radius * w * r * dth * pairwise_sum(&vals)
        })
        .collect();
    pairwise_sum(&rows)
}

/// `C_Ω(f) = ∫_Ω |f|² e^{-π|w|²} dw / ‖f‖²`.
pub fn fock_concentration(f: &FockPoly, omega: &PlanarRegion) -> Result<f64> {
    let f = f.normalized()?;
    let pi = std::f64::consts::PI;
    let parts: Vec<f64> = omega
        .discs
        .iter()
        .map(|d| disc_integral(d, 2 * f.degree(), |w| f.eval(w).norm_sqr() * (-pi * w.norm_sqr()).exp()))
        .collect();
    Ok(pairwise_sum(&parts))
}

/// `C_{N,Ω^N}(P^N)`, integrated in the rescaled plane.
pub fn rescaled_concentration(f: &FockPoly, omega: &PlanarRegion, n: usize) -> Result<f64> {
    let norm_sq = rescale_poly(f, n)?.norm_sq();
    if norm_sq == 0.0 {
        return Err(Error::ZeroPolynomial);
    }
    let nf = n as f64;
    let k = std::f64::consts::PI / nf;
    let parts: Vec<f64> = omega
        .discs
        .iter()
        .map(|d| {
            disc_integral(d, 2 * f.degree(), |w| {
                f.eval(w).norm_sqr() * (-(nf + 2.0) * (k * w.norm_sqr()).ln_1p()).exp()
            })
        })
        .collect();
    Ok((nf + 1.0) / nf * pairwise_sum(&parts) / norm_sq)
}

/// Box half-width containing the maximizers of `|f|² e^{-π|w|²}`.
fn search_radius(f: &FockPoly) -> f64 {
    let m = f.degree() as f64;
    // Cauchy bound on the zeros, capped
    let cauchy = 1.0
        + f.coeffs[..f.degree()]
            .iter()
            .map(|c| c.norm() / f.coeffs[f.degree()].norm())
            .fold(0.0, f64::max);
    2.0 + 2.0 * (m / std::f64::consts::PI).sqrt() + cauchy.min(10.0)
}

/// Grid points of the search box, best first by `score`.
fn planar_seeds(radius: f64, count: usize, score: impl Fn(Cx<f64>) -> f64 + Sync) -> Vec<(Cx<f64>, f64)> {
    let k = PLANAR_GRID as i64;
    let h = radius / k as f64;
    let pts: Vec<Cx<f64>> = (-k..=k)
        .flat_map(|i| (-k..=k).map(move |j| Cx::new(i as f64 * h, j as f64 * h)))
        .collect();
    let mut scored: Vec<(Cx<f64>, f64)> = pts.par_iter().map(|&w| (w, score(w))).collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    scored.truncate(count);
    scored
}

/// `D(f) = √(2(1 - sup |f| e^{-π|w|²/2}))` for `f` normalized internally,
/// with the maximizer.
pub fn fock_distance(f: &FockPoly) -> Result<(f64, Cx<f64>)> {
    let f = f.normalized()?;
    let pi = std::f64::consts::PI;
    let g = |w: Cx<f64>| f.eval(w).norm_sqr() * (-pi * w.norm_sqr()).exp();
    let r = search_radius(&f);
    let mut best = (Cx::new(0.0, 0.0), g(Cx::new(0.0, 0.0)));
    for (w0, v0) in planar_seeds(r, 8, g) {
        if v0 > best.1 {
            best = (w0, v0);
        }
        let m = nelder_mead(|x| -g(Cx::new(x[0], x[1])), &[w0.re, w0.im], r / PLANAR_GRID as f64, 1e-17, 1e-12, 4000);
        if -m.value > best.1 {
            best = (Cx::new(m.x[0], m.x[1]), -m.value);
        }
    }
    let t = best.1.min(1.0);
    Ok(((2.0 * (1.0 - t.sqrt())).max(0.0).sqrt(), best.0))
}

/// `D_N(P̂^N)`, searched from planar seeds mapped by `w ↦ √(π/N) w`.
pub fn rescaled_distance(f: &FockPoly, n: usize) -> Result<f64> {
    let p = rescale_poly(f, n)?.normalized()?;
    let k = (std::f64::consts::PI / n as f64).sqrt();
    let ev = p.evaluator();
    let seeds: Vec<SpherePoint<f64>> = planar_seeds(search_radius(f), 8, |w| ev.u(&SpherePoint::Finite(w * k)))
        .into_iter()
        .map(|(w, _)| SpherePoint::Finite(w * k))
        .chain(std::iter::once(SpherePoint::origin()))
        .collect();
    let max = sup_weighted_modulus_seeded(&p, &seeds, n <= GRID_SEARCH_MAX_N)?;
    Ok(kernel_distance_from_max(&p, max).distance)
}

/// Upper end of the `t = π|w|²` range: `|f|² e^{-t} < e^{-80}` beyond it.
fn entropy_cutoff(f: &FockPoly) -> f64 {
    let bound = |t: f64| {
        let r = (t / std::f64::consts::PI).sqrt();
        let m: f64 = f.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm());
        2.0 * m.max(1e-300).ln() - t
    };
    let mut t = 64.0;
    while bound(t) > -80.0 {
        t *= 2.0;
    }
    t
}

/// `S_Φ(f) = -∫ Φ(|f|² e^{-π|w|²}) dw` for `f` normalized internally, in
/// `t = π|w|²` on geometric panels up to [`entropy_cutoff`], trapezoid in
/// angle, both doubled until successive values differ by less than `tol`.
pub fn fock_entropy(f: &FockPoly, phi: &PhiSpec, tol: f64) -> Result<EntropyEstimate> {
    phi.validate()?;
    let f = f.normalized()?;
    let t_max = entropy_cutoff(&f);
    let mut breaks = vec![0.0];
    let mut b = 1.0 / 16.0;
    while b < t_max {
        breaks.push(b);
        b *= 2.0;
    }
    breaks.push(t_max);
    let run = |k: usize, n_th: usize| -> Result<f64> {
        let (x, wx) = graded_rule(k);
        let dth = std::f64::consts::TAU / n_th as f64;
        let nodes: Vec<(f64, f64)> = breaks
            .windows(2)
            .flat_map(|p| x.iter().zip(&wx).map(move |(x, w)| (p[0] + (p[1] - p[0]) * x, (p[1] - p[0]) * w)))
            .collect();
        let rows: Vec<f64> = nodes
            .par_iter()
            .map(|&(t, w)| {
                let r = (t / std::f64::consts::PI).sqrt();
                let decay = (-t).exp();
                let vals: Vec<f64> = (0..n_th)
                    .map(|j| phi.eval(f.eval(Cx::from_polar(r, j as f64 * dth)).norm_sqr() * decay))
                    .collect();
                w * pairwise_sum(&vals) / n_th as f64
            })
            .collect();
        let v = -pairwise_sum(&rows);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite("Fock entropy"))
        }
    };
    let (mut k, mut n_th) = (8, 16 + 8 * f.degree());
    let mut prev = run(k, n_th)?;
    let mut error = f64::INFINITY;
    for _ in 0..MAX_DOUBLINGS {
        k *= 2;
        n_th *= 2;
        let v = run(k, n_th)?;
        error = (v - prev).abs();
        prev = v;
        if error < tol {
            break;
        }
    }
    Ok(EntropyEstimate {
        value: prev,
        error,
        rule: crate::quadrature::QuadRule::tensor(k * (breaks.len() - 1), n_th)?.with_tolerance(tol),
        converged: error < tol,
    })
}

/// `S_Φ(1) = -∫₀^∞ Φ(e^{-t}) dt`.
pub fn fock_entropy_reference(phi: &PhiSpec) -> Result<f64> {
    phi.validate()?;
    Ok(match *phi {
        PhiSpec::XLogX => 1.0,
        PhiSpec::Power { p } => -1.0 / p,
        PhiSpec::Hinge { tau } => -(1.0 - tau + tau * tau.ln()),
    })
}

/// `S_{N,Φ}(P^N)` on geometric radial panels `s ∈ {0, 2ᵏ/N, 1}`.
pub fn rescaled_entropy(f: &FockPoly, n: usize, phi: &PhiSpec, tol: f64) -> Result<EntropyEstimate> {
    let p = rescale_poly(f, n)?.normalized()?;
    let nf = n as f64;
    let mut breaks = vec![0.0];
    let mut b = 0.25 / nf;
    while b < 1.0 {
        breaks.push(b);
        b *= 2.0;
    }
    breaks.push(1.0);
    panel_entropy(&p.evaluator(), n, phi, &breaks, 8, 16 + 8 * f.degree(), tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FockReport {
    pub area: f64,
    pub c_value: f64,
    /// `C_{Ω*}(1) = 1 - e^{-|Ω|}`.
    pub c_max: f64,
    pub deficit: f64,
    pub d: f64,
    pub phi: PhiSpec,
    pub entropy: f64,
    pub entropy_error: f64,
    pub reference: f64,
    pub gap: f64,
    /// `δ ≥ -1e-8` and `gap ≥ -1e-8` (widened by the entropy error).
    pub consistent: bool,
}

/// Fock concentration, distance and entropy gap of a unit-norm `f`.
pub fn fock_functionals(f: &FockPoly, omega: &PlanarRegion, phi: &PhiSpec) -> Result<FockReport> {
    let norm = f.norm_sq().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm });
    }
    let area = omega.area();
    let c_value = fock_concentration(f, omega)?;
    let c_max = -(-area).exp_m1();
    let deficit = 1.0 - c_value / c_max;
    let (d, _) = fock_distance(f)?;
    let est = fock_entropy(f, phi, ENTROPY_TOL)?;
    let reference = fock_entropy_reference(phi)?;
    let gap = est.value - reference;
    Ok(FockReport {
        area,
        c_value,
        c_max,
        deficit,
        d,
        phi: *phi,
        entropy: est.value,
        entropy_error: est.error,
        reference,
        gap,
        consistent: deficit >= -1e-8 && gap >= -(GAP_SLACK + est.error),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// `⟨P^N, Q^N⟩_N`; value and target are real parts, error is the complex modulus.
    InnerProduct,
    MeasureFactor,
    Asymmetry,
    Concentration,
    Distance,
    Entropy,
}

impl Quantity {
    pub const ALL: [Quantity; 6] = [
        Quantity::InnerProduct,
        Quantity::MeasureFactor,
        Quantity::Asymmetry,
        Quantity::Concentration,
        Quantity::Distance,
        Quantity::Entropy,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Quantity::InnerProduct => "inner_product",
            Quantity::MeasureFactor => "measure_factor",
            Quantity::Asymmetry => "asymmetry",
            Quantity::Concentration => "concentration",
            Quantity::Distance => "distance",
            Quantity::Entropy => "entropy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableRow {
    pub n: usize,
    pub quantity: Quantity,
    pub value: f64,
    pub target: f64,
    pub error: f64,
    /// Error at the previous `N` over the error here.
    pub error_ratio: Option<f64>,
}

/// Least-squares slope of `ln error` against `ln(1/N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderFit {
    pub quantity: Quantity,
    /// `None` when fewer than three errors sit above [`EXACT_FLOOR`].
    pub order: Option<f64>,
    /// Every error is below [`EXACT_FLOOR`].
    pub exact: bool,
    pub max_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<TableRow>,
    pub fits: Vec<OrderFit>,
}

impl ConvergenceTable {
    pub fn fit(&self, q: Quantity) -> Option<&OrderFit> {
        self.fits.iter().find(|f| f.quantity == q)
    }

    pub fn rows_for(&self, q: Quantity) -> impl Iterator<Item = &TableRow> {
        self.rows.iter().filter(move |r| r.quantity == q)
    }
}

fn is_exact(error: f64, target: f64) -> bool {
    error <= EXACT_FLOOR * target.abs().max(1.0)
}

/// Order of convergence in `1/N` from `(N, error)` pairs.
pub fn fit_order(points: &[(usize, f64)]) -> Option<f64> {
    if points.len() < 3 {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, e)| e.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Some(-sxy / sxx)
}

/// Rescaled sphere quantities for each `N` beside their Fock limits.
pub fn convergence_table(
    p: &FockPoly,
    q: &FockPoly,
    omega: &PlanarRegion,
    phi: &PhiSpec,
    n_list: &[usize],
) -> Result<ConvergenceTable> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("N list must be non-empty and strictly ascending".into()));
    }
    let need = p.degree().max(q.degree()).max(1);
    if n_list[0] < need {
        return Err(Error::InvalidArgument(format!("every N must be at least {need}")));
    }
    let ph = p.normalized()?;
    let inner_target = fock_inner_product(p, q);
    let targets = [
        inner_target.re,
        (-omega.area()).exp(),
        fock_asymmetry(omega),
        fock_concentration(&ph, omega)?,
        fock_distance(&ph)?.0,
        fock_entropy(&ph, phi, ENTROPY_TOL)?.value,
    ];

    let per_n: Vec<Result<Vec<(f64, f64)>>> = n_list
        .par_iter()
        .map(|&n| {
            let ip = crate::polyspace::inner_product(&rescale_poly(p, n)?, &rescale_poly(q, n)?)?;
            let region = rescale_region(omega, n)?;
            let asym = if omega.discs.len() == 1 {
                0.0
            } else {
                fraenkel_asymmetry(&region)?.value
            };
            let vals = [
                (ip.re, (ip - inner_target).norm()),
                (measure_factor(omega, n)?, f64::NAN),
                (asym, f64::NAN),
                (rescaled_concentration(&ph, omega, n)?, f64::NAN),
                (rescaled_distance(&ph, n)?, f64::NAN),
                (rescaled_entropy(&ph, n, phi, ENTROPY_TOL)?.value, f64::NAN),
            ];
            Ok(vals
                .iter()
                .zip(&targets)
                .map(|(&(v, e), t)| (v, if e.is_nan() { (v - t).abs() } else { e }))
                .collect())
        })
        .collect();
    let per_n = per_n.into_iter().collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(n_list.len() * Quantity::ALL.len());
    let mut fits = Vec::with_capacity(Quantity::ALL.len());
    for (qi, &quantity) in Quantity::ALL.iter().enumerate() {
        let target = targets[qi];
        let mut prev: Option<f64> = None;
        let mut pts = Vec::new();
        for (i, &n) in n_list.iter().enumerate() {
            let (value, error) = per_n[i][qi];
            let error_ratio = match prev {
                Some(pe) if !is_exact(pe, target) && !is_exact(error, target) => Some(pe / error),
                _ => None,
            };
            if !is_exact(error, target) {
                pts.push((n, error));
            }
            rows.push(TableRow {
                n,
                quantity,
                value,
                target,
                error,
                error_ratio,
            });
            prev = Some(error);
        }
        let max_error = per_n.iter().map(|r| r[qi].1).fold(0.0, f64::max);
        fits.push(OrderFit {
            quantity,
            order: fit_order(&pts),
            exact: pts.is_empty(),
            max_error,
        });
    }
    Ok(ConvergenceTable { rows, fits })
}
