//! Concentration, deficit, Fraenkel asymmetry and the stability report.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::optimize::nelder_mead;
use crate::polyspace::{kernel_distance, Poly};
use crate::quadrature::{integrate_region, QuadRule, RuleKind};
use crate::region::{region_measure, symmetric_difference_measure, Region};
use crate::scalar::{cx, Real};
use crate::sphere::{Cap, SpherePoint, Su2};

/// `C_{N,Ω}(P) = (N+1) ∫_Ω u_P dm / ‖P‖²`.
pub fn concentrate<T: Real>(p: &Poly<T>, region: &Region<T>, rule: &QuadRule) -> Result<T> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let ev = p.evaluator();
    let v = integrate_region(|z| ev.u(z), region, rule)?.value;
    let np1 = T::from_usize_lossy(p.degree_bound() + 1);
    Ok((np1 * v / p.norm_sq()).max(T::zero()).min(T::one()))
}

/// `C_{N,Ω*}(1) = 1 - (1-ℓ)^{N+1}`.
pub fn max_disc_concentration<T: Real>(n: usize, measure: T) -> T {
    let l = measure.max(T::zero()).min(T::one());
    // 1 - (1-l)^{N+1} without cancellation for small l
    -((T::from_usize_lossy(n + 1)) * (-l).ln_1p()).exp_m1()
}

/// `δ_N(P,Ω) = 1 - C_{N,Ω}(P) / C_{N,Ω*}(1)` for unit `P`.
pub fn deficit<T: Real>(p: &Poly<T>, region: &Region<T>, rule: &QuadRule) -> Result<T> {
    p.require_unit(T::lit(1e-10))?;
    let m = region_measure(region).value;
    if m <= T::zero() {
        return Err(Error::EmptyRegion);
    }
    let c = concentrate(p, region, rule)?;
    Ok(T::one() - c / max_disc_concentration(p.degree_bound(), m))
}

/// Number of coarse centers for the asymmetry search (16 bands × 32 angles).
pub const ASYMMETRY_GRID: (usize, usize) = (16, 32);
const ASYMMETRY_STARTS: usize = 4;
const TIE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Asymmetry<T> {
    pub value: T,
    pub best_cap: Cap<T>,
}

/// The region as a single cap, when it is one.
fn as_single_cap<T: Real>(r: &Region<T>) -> Option<Cap<T>> {
    match r {
        Region::Cap(c) => Some(*c),
        Region::Complement(inner) => {
            let c = as_single_cap(inner)?;
            Cap::with_measure(c.center().antipode(), T::one() - c.measure()).ok()
        }
        Region::Union(rs) if rs.len() == 1 => as_single_cap(&rs[0]),
        _ => None,
    }
}

fn lex_key<T: Real>(z: &SpherePoint<T>) -> (f64, f64) {
    let (s, th) = z.to_s_theta();
    (s.to_f64_lossy(), th.to_f64_lossy())
}

/// `𝒜_m(Ω) = inf_{m(D)=m(Ω)} m(Ω Δ D) / m(Ω)` over caps `D`.
pub fn fraenkel_asymmetry<T: Real>(region: &Region<T>) -> Result<Asymmetry<T>> {
    let m = region_measure(region).value;
    if !(m > T::zero() && m < T::one()) {
        return Err(Error::InvalidArgument("asymmetry needs 0 < m(Ω) < 1".into()));
    }
    if let Some(c) = as_single_cap(region) {
        return Ok(Asymmetry { value: T::zero(), best_cap: c });
    }
    let mf = m.to_f64_lossy();
    let objective = |center: &SpherePoint<T>| -> f64 {
        match Cap::with_measure(*center, m) {
            Ok(c) => symmetric_difference_measure(region, &Region::Cap(c)).value.to_f64_lossy() / mf,
            Err(_) => f64::INFINITY,
        }
    };

    let (bands, angles) = ASYMMETRY_GRID;
    let mut coarse: Vec<(f64, SpherePoint<T>)> = Vec::with_capacity(bands * angles);
    for i in 0..bands {
        for j in 0..angles {
            let s = (i as f64 + 0.5) / bands as f64;
            let th = (j as f64 + 0.5) * std::f64::consts::TAU / angles as f64;
            let z = SpherePoint::from_s_theta(T::lit(s), T::lit(th));
            coarse.push((objective(&z), z));
        }
    }
    // stable sort keeps the lexicographic (s, θ) enumeration order on ties
    coarse.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut best: Option<(f64, SpherePoint<T>)> = None;
    for (v0, seed) in coarse.iter().take(ASYMMETRY_STARTS) {
        let g = Su2::moving_origin_to(seed);
        let local = |x: &[f64]| {
            let z = SpherePoint::Finite(cx(T::lit(x[0]), T::lit(x[1])));
            objective(&g.apply(&z))
        };
        let r = nelder_mead(local, &[0.0, 0.0], 0.1, 1e-13, 1e-10, 2000);
        let (v, z) = if r.value < *v0 {
            (r.value, g.apply(&SpherePoint::Finite(cx(T::lit(r.x[0]), T::lit(r.x[1])))))
        } else {
            (*v0, *seed)
        };
        best = match best {
            None => Some((v, z)),
            Some((bv, bz)) => {
                let better = v < bv - TIE || ((v - bv).abs() <= TIE && lex_key(&z) < lex_key(&bz));
                Some(if better { (v, z) } else { (bv, bz) })
            }
        };
    }
    let (v, z) = best.expect("at least one start");
    Ok(Asymmetry {
        value: T::lit(v.max(0.0)),
        best_cap: Cap::with_measure(z, m)?,
    })
}

/// Empirical constant, or the sentinel `exact` when the denominator vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    Value(f64),
    Exact,
}

impl Ratio {
    pub fn value(&self) -> Option<f64> {
        match self {
            Ratio::Value(v) => Some(*v),
            Ratio::Exact => None,
        }
    }
}

impl core::fmt::Display for Ratio {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Ratio::Value(v) => write!(f, "{v:.17e}"),
            Ratio::Exact => f.write_str("exact"),
        }
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        match self {
            Ratio::Value(v) => s.serialize_f64(*v),
            Ratio::Exact => s.serialize_str("exact"),
        }
    }
}

/// Below this `D_N` the stability ratio is reported as `exact`.
pub const NEAR_KERNEL: f64 = 1e-6;
/// Below this deficit the proposition ratio is reported as `exact`.
pub const NEAR_ZERO_DEFICIT: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityReport {
    pub n: usize,
    pub m_omega: f64,
    pub c_value: f64,
    pub c_max: f64,
    pub deficit: f64,
    pub d_n: f64,
    pub asymmetry: f64,
    pub ratio_thm: Ratio,
    pub ratio_prop: Ratio,
    pub rule: QuadRuleMeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadRuleMeta {
    pub kind: RuleKind,
    pub target_abs_tol: f64,
}

impl From<&QuadRule> for QuadRuleMeta {
    fn from(r: &QuadRule) -> Self {
        Self { kind: r.kind, target_abs_tol: r.target_abs_tol }
    }
}

/// Concentration, deficit, distance and asymmetry of `(P, Ω)` with both stability ratios.
pub fn stability_report(p: &Poly<f64>, region: &Region<f64>, rule: &QuadRule) -> Result<StabilityReport> {
    p.require_unit(1e-10)?;
    let n = p.degree_bound();
    let m = region_measure(region).value;
    if !(m > 0.0 && m < 1.0) {
        return Err(Error::InvalidArgument("stability needs 0 < m(Ω) < 1".into()));
    }
    let c_value = concentrate(p, region, rule)?;
    let c_max = max_disc_concentration(n, m);
    let delta = 1.0 - c_value / c_max;
    if delta < -1e-9 {
        return Err(Error::Degenerate(format!("negative deficit {delta:e}")));
    }
    let d_n = kernel_distance(p)?.distance;
    let asymmetry = fraenkel_asymmetry(region)?.value;
    let np1 = (n + 1) as f64;
    let ratio_thm = if d_n < NEAR_KERNEL {
        Ratio::Exact
    } else {
        Ratio::Value(delta * (1.0 - m).powf(-np1) / (d_n * d_n))
    };
    let ratio_prop = if delta < NEAR_ZERO_DEFICIT {
        Ratio::Exact
    } else {
        Ratio::Value(asymmetry * m * (1.0 - m).powf(1.5 * np1) / delta.sqrt())
    };
    Ok(StabilityReport {
        n,
        m_omega: m,
        c_value,
        c_max,
        deficit: delta,
        d_n,
        asymmetry,
        ratio_thm,
        ratio_prop,
        rule: rule.into(),
    })
}
