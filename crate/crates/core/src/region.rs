//! Measurable subsets of the sphere built from caps.
//!
//! Cap algebra regions (caps, complements, disjoint unions) have exact
//! measures and exact pairwise intersection measures by inclusion–exclusion
//! over the closed-form lens area. A [`SampledIndicator`] wraps an arbitrary
//! membership predicate and is handled by seeded Monte Carlo.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sphere::{cap_intersection_measure, Cap, SpherePoint, Su2};

/// Intersection measures below this count as disjoint.
pub const DISJOINT_TOL: f64 = 1e-10;

pub type Predicate<T> = Arc<dyn Fn(&SpherePoint<T>) -> bool + Send + Sync>;

/// Region given only through a membership test.
#[derive(Clone)]
pub struct SampledIndicator<T> {
    predicate: Predicate<T>,
    samples: usize,
    seed: u64,
}

impl<T> SampledIndicator<T> {
    pub fn new(predicate: Predicate<T>, samples: usize, seed: u64) -> Result<Self> {
        if samples == 0 {
            return Err(Error::InvalidArgument("sample budget must be positive".into()));
        }
        Ok(Self {
            predicate,
            samples,
            seed,
        })
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn contains(&self, z: &SpherePoint<T>) -> bool {
        (self.predicate)(z)
    }
}

impl<T> fmt::Debug for SampledIndicator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampledIndicator")
            .field("samples", &self.samples)
            .field("seed", &self.seed)
            .finish_non_exhaustive()
    }
}

/// A measure value with its Monte Carlo standard error (zero when exact).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measure<T> {
    pub value: T,
    pub std_error: T,
}

impl<T: Real> Measure<T> {
    pub fn exact(value: T) -> Self {
        Self {
            value,
            std_error: T::zero(),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.std_error == T::zero()
    }
}

#[derive(Debug, Clone)]
pub enum Region<T> {
    Cap(Cap<T>),
    Complement(Box<Region<T>>),
    Union(Vec<Region<T>>),
    Sampled(SampledIndicator<T>),
}

impl<T: Real> From<Cap<T>> for Region<T> {
    fn from(c: Cap<T>) -> Self {
        Self::Cap(c)
    }
}

impl<T: Real> Region<T> {
    pub fn cap(c: Cap<T>) -> Self {
        Self::Cap(c)
    }

    pub fn complement(r: Region<T>) -> Self {
        Self::Complement(Box::new(r))
    }

    /// Disjoint union; rejects members whose pairwise intersection measure
    /// reaches [`DISJOINT_TOL`].
    pub fn union(members: Vec<Region<T>>) -> Result<Self> {
        validate_disjoint(&members)?;
        Ok(Self::Union(members))
    }

    pub fn sampled(s: SampledIndicator<T>) -> Self {
        Self::Sampled(s)
    }

    pub fn full_sphere() -> Self {
        Self::Cap(Cap::new(SpherePoint::origin(), T::one() / T::PI().sqrt()).expect("full cap"))
    }

    /// The cap centered at `0` with the same measure, `Ω*`.
    pub fn centered_rearrangement(&self) -> Result<Cap<T>> {
        let m = region_measure(self).value;
        if m <= T::zero() {
            return Err(Error::EmptyRegion);
        }
        Cap::with_measure(SpherePoint::origin(), m.min(T::one()))
    }

    /// True when the region contains no sampled indicator.
    pub fn is_cap_algebra(&self) -> bool {
        match self {
            Self::Cap(_) => true,
            Self::Complement(r) => r.is_cap_algebra(),
            Self::Union(rs) => rs.iter().all(Region::is_cap_algebra),
            Self::Sampled(_) => false,
        }
    }

    pub fn contains(&self, z: &SpherePoint<T>) -> bool {
        region_contains(self, z)
    }

    pub fn measure(&self) -> Measure<T> {
        region_measure(self)
    }

    /// Image under the rotation `g`.
    pub fn rotated(&self, g: &Su2<T>) -> Self {
        match self {
            Self::Cap(c) => Self::Cap(c.rotated(g)),
            Self::Complement(r) => Self::Complement(Box::new(r.rotated(g))),
            Self::Union(rs) => Self::Union(rs.iter().map(|r| r.rotated(g)).collect()),
            Self::Sampled(s) => {
                let inv = g.inverse();
                let inner = s.predicate.clone();
                Self::Sampled(SampledIndicator {
                    predicate: Arc::new(move |z| inner(&inv.apply(z))),
                    samples: s.samples,
                    seed: s.seed,
                })
            }
        }
    }

    /// Sample budget and seed for Monte Carlo, taken from the first sampled
    /// member.
    pub(crate) fn sampling_params(&self) -> Option<(usize, u64)> {
        match self {
            Self::Cap(_) => None,
            Self::Complement(r) => r.sampling_params(),
            Self::Union(rs) => rs.iter().find_map(Region::sampling_params),
            Self::Sampled(s) => Some((s.samples, s.seed)),
        }
    }
}

pub fn region_contains<T: Real>(r: &Region<T>, z: &SpherePoint<T>) -> bool {
    match r {
        Region::Cap(c) => c.contains(z),
        Region::Complement(inner) => !region_contains(inner, z),
        Region::Union(rs) => rs.iter().any(|x| region_contains(x, z)),
        Region::Sampled(s) => s.contains(z),
    }
}

/// `m(Ω)`: exact on the cap algebra, Monte Carlo with standard error for
/// sampled indicators.
pub fn region_measure<T: Real>(r: &Region<T>) -> Measure<T> {
    match r {
        Region::Cap(c) => Measure::exact(c.measure()),
        Region::Complement(inner) => {
            let m = region_measure(inner);
            Measure {
                value: (T::one() - m.value).max(T::zero()),
                std_error: m.std_error,
            }
        }
        Region::Union(rs) => {
            let mut value = T::zero();
            let mut var = T::zero();
            for x in rs {
                let m = region_measure(x);
                value += m.value;
                var += m.std_error * m.std_error;
            }
            Measure {
                value: value.min(T::one()),
                std_error: var.sqrt(),
            }
        }
        Region::Sampled(s) => monte_carlo_fraction(s.samples, s.seed, |z| s.contains(z)),
    }
}

/// `m(A ∩ B)`.
pub fn intersection_measure<T: Real>(a: &Region<T>, b: &Region<T>) -> Measure<T> {
    if a.is_cap_algebra() && b.is_cap_algebra() {
        return Measure::exact(symmetric_intersection(a, b).max(T::zero()));
    }
    let (n, seed) = a
        .sampling_params()
        .or_else(|| b.sampling_params())
        .expect("non-cap region carries sampling parameters");
    monte_carlo_fraction(n, seed, |z| region_contains(a, z) && region_contains(b, z))
}

// The recursion is not symmetric in rounding; averaging both orders is.
fn symmetric_intersection<T: Real>(a: &Region<T>, b: &Region<T>) -> T {
    (exact_intersection(a, b) + exact_intersection(b, a)) * T::lit(0.5)
}

fn exact_intersection<T: Real>(a: &Region<T>, b: &Region<T>) -> T {
    match (a, b) {
        (Region::Cap(x), Region::Cap(y)) => cap_intersection_measure(x, y),
        (Region::Complement(x), _) => region_measure(b).value - exact_intersection(x, b),
        (_, Region::Complement(y)) => region_measure(a).value - exact_intersection(a, y),
        (Region::Union(xs), _) => xs.iter().map(|x| exact_intersection(x, b)).sum(),
        (_, Region::Union(ys)) => ys.iter().map(|y| exact_intersection(a, y)).sum(),
        _ => unreachable!("sampled regions are excluded by the caller"),
    }
}

/// `m(A \ B) + m(B \ A)`.
pub fn symmetric_difference_measure<T: Real>(a: &Region<T>, b: &Region<T>) -> Measure<T> {
    if a.is_cap_algebra() && b.is_cap_algebra() {
        let v = region_measure(a).value + region_measure(b).value
            - T::lit(2.0) * symmetric_intersection(a, b);
        return Measure::exact(v.max(T::zero()));
    }
    let (n, seed) = a
        .sampling_params()
        .or_else(|| b.sampling_params())
        .expect("non-cap region carries sampling parameters");
    monte_carlo_fraction(n, seed, |z| region_contains(a, z) != region_contains(b, z))
}

fn validate_disjoint<T: Real>(members: &[Region<T>]) -> Result<()> {
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            let m = intersection_measure(&members[i], &members[j]);
            if m.value.to_f64_lossy() >= DISJOINT_TOL {
                return Err(Error::Overlap {
                    first: i,
                    second: j,
                    measure: m.value.to_f64_lossy(),
                });
            }
        }
    }
    Ok(())
}

/// Seeded uniform sample of the sphere under `dm`.
pub(crate) fn sample_sphere<T: Real>(rng: &mut ChaCha8Rng) -> SpherePoint<T> {
    let s: f64 = rng.random();
    let th: f64 = rng.random::<f64>() * std::f64::consts::TAU;
    SpherePoint::from_s_theta(T::lit(s), T::lit(th))
}

fn monte_carlo_fraction<T: Real>(
    n: usize,
    seed: u64,
    hit: impl Fn(&SpherePoint<T>) -> bool,
) -> Measure<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..n {
        if hit(&sample_sphere(&mut rng)) {
            hits += 1;
        }
    }
    let p = hits as f64 / n as f64;
    let se = (p * (1.0 - p) / n as f64).sqrt();
    Measure {
        value: T::lit(p),
        std_error: T::lit(se),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::chordal_distance;

    fn cap(c: SpherePoint<f64>, m: f64) -> Region<f64> {
        Region::Cap(Cap::with_measure(c, m).unwrap())
    }

    #[test]
    fn measure_examples() {
        let half = Region::Cap(Cap::new(SpherePoint::origin(), 1.0 / (2.0 * std::f64::consts::PI).sqrt()).unwrap());
        assert!((region_measure(&half).value - 0.5).abs() < 1e-15);
        let comp = Region::complement(half.clone());
        assert!((region_measure(&comp).value - 0.5).abs() < 1e-15);
        let u = Region::union(vec![
            cap(SpherePoint::origin(), 0.2),
            cap(SpherePoint::Infinity, 0.3),
        ])
        .unwrap();
        assert!((region_measure(&u).value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn overlapping_union_rejected() {
        let err = Region::union(vec![
            cap(SpherePoint::origin(), 0.3),
            cap(SpherePoint::new(0.1, 0.0).unwrap(), 0.3),
        ])
        .unwrap_err();
        assert!(matches!(err, Error::Overlap { first: 0, second: 1, .. }));
    }

    #[test]
    fn containment() {
        let c = cap(SpherePoint::origin(), 0.4);
        assert!(c.contains(&SpherePoint::origin()));
        assert!(!c.contains(&SpherePoint::Infinity));
        let cc = Region::complement(c.clone());
        assert!(!cc.contains(&SpherePoint::origin()));
        assert!(cc.contains(&SpherePoint::Infinity));
    }

    #[test]
    fn symmetric_difference_examples() {
        let a = cap(SpherePoint::origin(), 0.3);
        assert!(symmetric_difference_measure(&a, &a).value.abs() < 1e-15);
        let b = cap(SpherePoint::Infinity, 0.2);
        assert!((symmetric_difference_measure(&a, &b).value - 0.5).abs() < 1e-14);
        let c = cap(SpherePoint::new(0.4, 0.1).unwrap(), 0.3);
        let exact = symmetric_difference_measure(&a, &c).value;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 1_000_000;
        let mut hits = 0;
        for _ in 0..n {
            let z: SpherePoint<f64> = sample_sphere(&mut rng);
            if a.contains(&z) != c.contains(&z) {
                hits += 1;
            }
        }
        let p = hits as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((p - exact).abs() < 3.0 * se, "exact {exact} mc {p} se {se}");
    }

    #[test]
    fn complement_and_union_inclusion_exclusion() {
        let a = cap(SpherePoint::new(0.3, -0.2).unwrap(), 0.35);
        let u = Region::union(vec![
            cap(SpherePoint::origin(), 0.1),
            cap(SpherePoint::new(-2.0, 1.0).unwrap(), 0.15),
        ])
        .unwrap();
        let cu = Region::complement(u.clone());
        let i1 = intersection_measure(&a, &u).value;
        let i2 = intersection_measure(&a, &cu).value;
        assert!((i1 + i2 - 0.35).abs() < 1e-14);
        let d = symmetric_difference_measure(&a, &u).value;
        let d2 = symmetric_difference_measure(&u, &a).value;
        assert_eq!(d, d2);
    }

    #[test]
    fn sampled_region_monte_carlo() {
        let c = Cap::with_measure(SpherePoint::origin(), 0.25).unwrap();
        let s = SampledIndicator::new(Arc::new(move |z: &SpherePoint<f64>| c.contains(z)), 200_000, 17).unwrap();
        let r = Region::sampled(s);
        let m = region_measure(&r);
        assert!((m.value - 0.25).abs() < 4.0 * m.std_error);
        assert_eq!(region_measure(&r), m);
    }

    #[test]
    fn rotation_moves_caps() {
        let a = SpherePoint::new(0.7, 0.2).unwrap();
        let g = Su2::moving_to_origin(&a);
        let r = cap(a, 0.2).rotated(&g);
        match r {
            Region::Cap(c) => assert!(chordal_distance(&c.center(), &SpherePoint::origin()) < 1e-14),
            _ => unreachable!(),
        }
    }
}
