//! The Riemann sphere in the stereographic chart.
//!
//! Points are finite complex numbers plus a tagged point at infinity. The
//! measure `dm = dx dy / (π (1+|z|²)²)` is the push-forward of normalized area
//! on the sphere of radius `1/(2√π)`, so the chordal distance between `0` and
//! `∞` is `1/√π` and a chordal disc of radius `r` has measure `π r²`.
//!
//! A convenient global coordinate is `s = |z|²/(1+|z|²)` together with
//! `θ = arg z`: under it `dm = ds dθ / 2π` on `[0,1] × [0,2π)`, and `s` is the
//! measure of the centered cap whose boundary passes through `z`.

use crate::error::{Error, Result};
use crate::scalar::{cis, cx, Cx, Real};

/// A point of the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpherePoint<T> {
    Finite(Cx<T>),
    Infinity,
}

/// `[re, im]`, or the string `"inf"`.
impl<T: Real> serde::Serialize for SpherePoint<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        match *self {
            Self::Infinity => s.serialize_str("inf"),
            Self::Finite(z) => [z.re.to_f64_lossy(), z.im.to_f64_lossy()].serialize(s),
        }
    }
}

impl<'de, T: Real> serde::Deserialize<'de> for SpherePoint<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        #[derive(serde::Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Pair([f64; 2]),
            Tag(String),
        }
        match Raw::deserialize(d)? {
            Raw::Pair([re, im]) => SpherePoint::new(T::lit(re), T::lit(im)).map_err(serde::de::Error::custom),
            Raw::Tag(t) if t == "inf" => Ok(SpherePoint::Infinity),
            Raw::Tag(t) => Err(serde::de::Error::custom(format!("expected [re, im] or \"inf\", got {t:?}"))),
        }
    }
}

impl<T: Real> SpherePoint<T> {
    pub fn finite(z: Cx<T>) -> Result<Self> {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NonFinite("sphere point"));
        }
        Ok(Self::Finite(z))
    }

    pub fn new(re: T, im: T) -> Result<Self> {
        Self::finite(cx(re, im))
    }

    pub fn origin() -> Self {
        Self::Finite(cx(T::zero(), T::zero()))
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, Self::Infinity)
    }

    /// Point with equal-measure coordinates `(s, θ)`; `s = 1` is `∞`.
    pub fn from_s_theta(s: T, theta: T) -> Self {
        if s >= T::one() {
            return Self::Infinity;
        }
        let s = s.max(T::zero());
        let r = (s / (T::one() - s)).sqrt();
        Self::Finite(cis(theta) * r)
    }

    /// Equal-measure coordinates `(s, θ)` with `θ ∈ [0, 2π)`.
    pub fn to_s_theta(&self) -> (T, T) {
        match *self {
            Self::Infinity => (T::one(), T::zero()),
            Self::Finite(z) => {
                let r2 = z.norm_sqr();
                let mut th = z.im.atan2(z.re);
                if th < T::zero() {
                    th += T::TAU();
                }
                if r2 <= T::one() {
                    (r2 / (T::one() + r2), th)
                } else {
                    (T::one() / (T::one() + r2.recip()), th)
                }
            }
        }
    }

    /// Position on the unit sphere in `R³`; `0` is the south pole and `∞`
    /// the north pole.
    pub fn to_unit_vector(&self) -> [T; 3] {
        match *self {
            Self::Infinity => [T::zero(), T::zero(), T::one()],
            Self::Finite(z) => {
                let r2 = z.norm_sqr();
                let two = T::lit(2.0);
                if r2 <= T::one() {
                    let d = T::one() + r2;
                    [two * z.re / d, two * z.im / d, (r2 - T::one()) / d]
                } else {
                    // divide through by r2 to keep large |z| finite
                    let inv = r2.recip();
                    let d = T::one() + inv;
                    let w = z.conj() * inv; // = 1/z
                    [
                        two * w.re / d,
                        -two * w.im / d,
                        (T::one() - inv) / d,
                    ]
                }
            }
        }
    }

    pub fn from_unit_vector(v: [T; 3]) -> Self {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let (x, y, h) = (v[0] / n, v[1] / n, v[2] / n);
        if h >= T::one() {
            return Self::Infinity;
        }
        if h <= T::zero() {
            Self::Finite(cx(x, y) / (T::one() - h))
        } else {
            // z = (x+iy)/(1-h) = (1+h)/(x-iy), better conditioned near the pole
            let d = cx(x, -y);
            if d.norm_sqr() == T::zero() {
                return Self::Infinity;
            }
            Self::Finite(cx(T::one() + h, T::zero()) / d)
        }
    }

    /// The diametrically opposite point `-1/conj(z)`.
    pub fn antipode(&self) -> Self {
        match *self {
            Self::Infinity => Self::origin(),
            Self::Finite(z) if z.norm_sqr() == T::zero() => Self::Infinity,
            Self::Finite(z) => Self::Finite(-(z.conj()).inv()),
        }
    }
}

/// Chordal distance on the sphere of radius `1/(2√π)`.
///
/// `d(z,w) = |z-w| / (√π √((1+|z|²)(1+|w|²)))`, extended by
/// `d(z,∞) = 1/(√π √(1+|z|²))`.
pub fn chordal_distance<T: Real>(z: &SpherePoint<T>, w: &SpherePoint<T>) -> T {
    let sqrt_pi = T::PI().sqrt();
    match (z, w) {
        (SpherePoint::Infinity, SpherePoint::Infinity) => T::zero(),
        (SpherePoint::Finite(a), SpherePoint::Infinity)
        | (SpherePoint::Infinity, SpherePoint::Finite(a)) => {
            T::one() / (sqrt_pi * (T::one() + a.norm_sqr()).sqrt())
        }
        (SpherePoint::Finite(a), SpherePoint::Finite(b)) => {
            let num = (*a - *b).norm();
            num / ((T::one() + a.norm_sqr()).sqrt() * (T::one() + b.norm_sqr()).sqrt())
                / sqrt_pi
        }
    }
}

/// Largest possible chordal distance, `1/√π`.
pub fn max_chordal_distance<T: Real>() -> T {
    T::one() / T::PI().sqrt()
}

/// Angle between two points as seen from the center of the sphere.
pub(crate) fn central_angle<T: Real>(z: &SpherePoint<T>, w: &SpherePoint<T>) -> T {
    // chord on the unit sphere is 2√π d
    let chord = T::lit(2.0) * T::PI().sqrt() * chordal_distance(z, w);
    let half = (chord / T::lit(2.0)).min(T::one());
    T::lit(2.0) * half.asin()
}

/// An element of SU(2), acting on the sphere by the Möbius map
/// `z ↦ (αz + β)/(-β̄z + ᾱ)`. These maps are exactly the rotations of the
/// sphere and preserve both `dm` and the chordal distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su2<T> {
    alpha: Cx<T>,
    beta: Cx<T>,
}

impl<T: Real> Su2<T> {
    pub fn new(alpha: Cx<T>, beta: Cx<T>) -> Result<Self> {
        let norm_sq = alpha.norm_sqr() + beta.norm_sqr();
        let tol = T::epsilon() * T::lit(1e4);
        if !norm_sq.is_finite() || (norm_sq - T::one()).abs() > tol {
            return Err(Error::NotUnitary {
                norm_sq: norm_sq.to_f64_lossy(),
            });
        }
        Ok(Self { alpha, beta })
    }

    pub fn identity() -> Self {
        Self {
            alpha: cx(T::one(), T::zero()),
            beta: cx(T::zero(), T::zero()),
        }
    }

    pub fn alpha(&self) -> Cx<T> {
        self.alpha
    }

    pub fn beta(&self) -> Cx<T> {
        self.beta
    }

    /// Rotation taking `0` to `a`.
    pub fn moving_origin_to(a: &SpherePoint<T>) -> Self {
        match *a {
            SpherePoint::Infinity => Self {
                alpha: cx(T::zero(), T::zero()),
                beta: cx(T::one(), T::zero()),
            },
            SpherePoint::Finite(a) => {
                let n = (T::one() + a.norm_sqr()).sqrt();
                Self {
                    alpha: cx(T::one() / n, T::zero()),
                    beta: a / n,
                }
            }
        }
    }

    /// Rotation taking `a` to `0`.
    pub fn moving_to_origin(a: &SpherePoint<T>) -> Self {
        Self::moving_origin_to(a).inverse()
    }

    pub fn inverse(&self) -> Self {
        Self {
            alpha: self.alpha.conj(),
            beta: -self.beta,
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        // [[a, b], [-b̄, ā]] [[c, d], [-d̄, c̄]]
        let (a, b, c, d) = (self.alpha, self.beta, other.alpha, other.beta);
        Self {
            alpha: a * c - b * d.conj(),
            beta: a * d + b * c.conj(),
        }
    }

    pub fn apply(&self, z: &SpherePoint<T>) -> SpherePoint<T> {
        let (a, b) = (self.alpha, self.beta);
        match *z {
            SpherePoint::Infinity => {
                if b.norm_sqr() == T::zero() {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite(-a / b.conj())
                }
            }
            SpherePoint::Finite(z) => {
                let (num, den) = if z.norm_sqr() <= T::one() {
                    (a * z + b, -b.conj() * z + a.conj())
                } else {
                    let w = z.inv();
                    (a + b * w, -b.conj() + a.conj() * w)
                };
                if den.norm_sqr() == T::zero() {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite(num / den)
                }
            }
        }
    }
}

/// Closed chordal disc `{w : d(center, w) ≤ r}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cap<T> {
    center: SpherePoint<T>,
    chordal_radius: T,
}

impl<T: Real> Cap<T> {
    pub fn new(center: SpherePoint<T>, chordal_radius: T) -> Result<Self> {
        let max = max_chordal_distance::<T>();
        if !chordal_radius.is_finite()
            || chordal_radius <= T::zero()
            || chordal_radius > max * (T::one() + T::epsilon() * T::lit(4.0))
        {
            return Err(Error::InvalidArgument(format!(
                "chordal radius {chordal_radius} outside (0, 1/sqrt(pi)]"
            )));
        }
        Ok(Self {
            center,
            chordal_radius: chordal_radius.min(max),
        })
    }

    /// Cap of the given measure in `(0, 1]`.
    pub fn with_measure(center: SpherePoint<T>, measure: T) -> Result<Self> {
        if !measure.is_finite() || measure <= T::zero() || measure > T::one() {
            return Err(Error::InvalidArgument(format!(
                "cap measure {measure} outside (0, 1]"
            )));
        }
        Self::new(center, (measure / T::PI()).sqrt())
    }

    pub fn center(&self) -> SpherePoint<T> {
        self.center
    }

    pub fn chordal_radius(&self) -> T {
        self.chordal_radius
    }

    pub fn measure(&self) -> T {
        cap_measure(self)
    }

    pub fn is_full_sphere(&self) -> bool {
        self.measure() >= T::one()
    }

    /// Angular radius on the unit sphere.
    pub fn angular_radius(&self) -> T {
        let half = (T::PI().sqrt() * self.chordal_radius).min(T::one());
        T::lit(2.0) * half.asin()
    }

    pub fn contains(&self, z: &SpherePoint<T>) -> bool {
        chordal_distance(&self.center, z) <= self.chordal_radius
    }

    pub fn rotated(&self, g: &Su2<T>) -> Self {
        Self {
            center: g.apply(&self.center),
            chordal_radius: self.chordal_radius,
        }
    }

    /// The cap equal, as a planar set, to the Euclidean disc `|w - center| ≤ radius`.
    pub fn from_planar_disc(center: Cx<T>, radius: T) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() || !center.re.is_finite() || !center.im.is_finite()
        {
            return Err(Error::InvalidArgument(format!(
                "planar disc radius {radius} must be positive and finite"
            )));
        }
        // k = π r² (1+|a|²) solves |ζ|² k² - (1+ρ²+|ζ|²) k + ρ² = 0, a = ζ (1-k)
        let z2 = center.norm_sqr();
        let r2 = radius * radius;
        let b = T::one() + r2 + z2;
        let disc = (b * b - T::lit(4.0) * z2 * r2).max(T::zero()).sqrt();
        let k = T::lit(2.0) * r2 / (b + disc);
        let a = center * (T::one() - k);
        let chord_sq = k / (T::PI() * (T::one() + a.norm_sqr()));
        Self::new(SpherePoint::Finite(a), chord_sq.sqrt())
    }

    /// Exact description of the cap as a planar set.
    pub fn to_euclidean(&self) -> Result<PlanarSet<T>> {
        cap_to_euclidean(self)
    }
}

/// Measure of a cap: `π r²`.
pub fn cap_measure<T: Real>(c: &Cap<T>) -> T {
    let m = T::PI() * c.chordal_radius * c.chordal_radius;
    // π (1/√π)² rounds just below one
    if m >= T::one() - T::epsilon() * T::lit(8.0) {
        T::one()
    } else {
        m
    }
}

/// Planar image of a cap under the stereographic chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlanarSet<T> {
    /// `|w - center| ≤ radius`
    Disc { center: Cx<T>, radius: T },
    /// `|w - center| ≥ radius`, together with `∞`
    DiscExterior { center: Cx<T>, radius: T },
    /// `Re(w · conj(normal)) ≥ offset`, together with `∞`
    HalfPlane { normal: Cx<T>, offset: T },
}

impl<T: Real> PlanarSet<T> {
    pub fn contains(&self, z: &SpherePoint<T>) -> bool {
        match (*self, *z) {
            (Self::Disc { .. }, SpherePoint::Infinity) => false,
            (_, SpherePoint::Infinity) => true,
            (Self::Disc { center, radius }, SpherePoint::Finite(w)) => (w - center).norm() <= radius,
            (Self::DiscExterior { center, radius }, SpherePoint::Finite(w)) => {
                (w - center).norm() >= radius
            }
            (Self::HalfPlane { normal, offset }, SpherePoint::Finite(w)) => {
                (w * normal.conj()).re >= offset
            }
        }
    }
}

/// Euclidean description of `{w : d(center, w) ≤ r}`.
///
/// With `k = π r² (1+|a|²)` the condition reads
/// `(1-k)|w|² - 2 Re(w ā) + |a|² - k ≤ 0`, a disc for `k < 1`, the exterior
/// of a disc for `k > 1` and a half-plane for `k = 1`. For `a = 0` this gives
/// `ρ = √π r / √(1 - π r²)`.
pub fn cap_to_euclidean<T: Real>(c: &Cap<T>) -> Result<PlanarSet<T>> {
    if c.is_full_sphere() {
        return Err(Error::WholeSphere);
    }
    let pr2 = T::PI() * c.chordal_radius * c.chordal_radius;
    match c.center {
        SpherePoint::Infinity => {
            // 1/(π(1+|w|²)) ≤ r²  ⇔  |w|² ≥ 1/(π r²) - 1
            let radius = (pr2.recip() - T::one()).max(T::zero()).sqrt();
            Ok(PlanarSet::DiscExterior {
                center: cx(T::zero(), T::zero()),
                radius,
            })
        }
        SpherePoint::Finite(a) => {
            let a2 = a.norm_sqr();
            let k = pr2 * (T::one() + a2);
            let one_minus_k = T::one() - k;
            let tol = T::epsilon() * T::lit(16.0);
            if one_minus_k.abs() <= tol {
                return Ok(PlanarSet::HalfPlane {
                    normal: a,
                    offset: (a2 - k) / T::lit(2.0),
                });
            }
            let center = a / one_minus_k;
            let radius = (k * (T::one() + a2 - k)).max(T::zero()).sqrt() / one_minus_k.abs();
            if one_minus_k > T::zero() {
                Ok(PlanarSet::Disc { center, radius })
            } else {
                Ok(PlanarSet::DiscExterior { center, radius })
            }
        }
    }
}

/// Area of the intersection of two caps on the unit sphere, in units of the
/// full sphere, from the angular radii and the angle between the centers.
pub(crate) fn lens_fraction<T: Real>(a1: T, a2: T, d: T) -> T {
    let pi = T::PI();
    let half_pi = T::FRAC_PI_2();
    let cap = |a: T| (T::one() - a.cos()) / T::lit(2.0);
    if a1 >= pi {
        return cap(a2);
    }
    if a2 >= pi {
        return cap(a1);
    }
    // Reduce to radii ≤ π/2 through complements: C₁ ∩ C₂ = C₂ \ (C₁ᶜ ∩ C₂).
    if a1 > half_pi {
        return (cap(a2) - lens_fraction(pi - a1, a2, pi - d)).max(T::zero());
    }
    if a2 > half_pi {
        return (cap(a1) - lens_fraction(a1, pi - a2, pi - d)).max(T::zero());
    }
    if d >= a1 + a2 {
        return T::zero();
    }
    if d <= (a1 - a2).abs() {
        return cap(a1.min(a2));
    }
    let clamp = |x: T| x.max(-T::one()).min(T::one());
    let (c1, c2, cd) = (a1.cos(), a2.cos(), d.cos());
    let (s1, s2, sd) = (a1.sin(), a2.sin(), d.sin());
    let area = T::lit(2.0)
        * (pi
            - clamp((cd - c1 * c2) / (s1 * s2)).acos()
            - c1 * clamp((c2 - cd * c1) / (sd * s1)).acos()
            - c2 * clamp((c1 - cd * c2) / (sd * s2)).acos());
    (area / (T::lit(4.0) * pi)).max(T::zero()).min(cap(a1.min(a2)))
}

/// Exact measure of the intersection of two caps.
pub fn cap_intersection_measure<T: Real>(a: &Cap<T>, b: &Cap<T>) -> T {
    let d = central_angle(&a.center, &b.center);
    lens_fraction(a.angular_radius(), b.angular_radius(), d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(re: f64, im: f64) -> SpherePoint<f64> {
        SpherePoint::new(re, im).unwrap()
    }

    fn random_point(rng: &mut ChaCha8Rng) -> SpherePoint<f64> {
        let s: f64 = rng.random();
        let th: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        SpherePoint::from_s_theta(s, th)
    }

    #[test]
    fn distance_examples() {
        let o = SpherePoint::<f64>::origin();
        assert_eq!(chordal_distance(&o, &o), 0.0);
        let d = chordal_distance(&o, &SpherePoint::Infinity);
        assert!((d - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-15);
        let d1 = chordal_distance(&o, &pt(1.0, 0.0));
        assert!((d1 - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
        assert!((d1 - 0.398_942_280_401_432_7).abs() < 1e-15);
    }

    #[test]
    fn non_finite_points_rejected() {
        assert!(SpherePoint::new(f64::NAN, 0.0).is_err());
        assert!(SpherePoint::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn unit_vector_round_trip_and_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let z = random_point(&mut rng);
            let w = random_point(&mut rng);
            let v = z.to_unit_vector();
            let back = SpherePoint::from_unit_vector(v);
            assert!(chordal_distance(&z, &back) < 1e-13);
            let u = w.to_unit_vector();
            let chord = ((v[0] - u[0]).powi(2) + (v[1] - u[1]).powi(2) + (v[2] - u[2]).powi(2)).sqrt();
            let expected = chord / (2.0 * std::f64::consts::PI.sqrt());
            assert!((chordal_distance(&z, &w) - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn triangle_inequality_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let (a, b, c) = (random_point(&mut rng), random_point(&mut rng), random_point(&mut rng));
            let lhs = chordal_distance(&a, &c);
            let rhs = chordal_distance(&a, &b) + chordal_distance(&b, &c);
            assert!(lhs <= rhs + 1e-12);
            assert!((chordal_distance(&a, &b) - chordal_distance(&b, &a)).abs() < 1e-16);
        }
    }

    #[test]
    fn cap_measure_examples() {
        let o = SpherePoint::<f64>::origin();
        let full = Cap::new(o, 1.0 / std::f64::consts::PI.sqrt()).unwrap();
        assert_eq!(full.measure(), 1.0);
        assert!(full.is_full_sphere());
        let half = Cap::new(o, 1.0 / (2.0 * std::f64::consts::PI).sqrt()).unwrap();
        assert!((half.measure() - 0.5).abs() < 1e-15);
        let tiny = Cap::new(o, 1e-9).unwrap();
        assert!(tiny.measure() < 1e-17);
        assert!(Cap::new(o, 0.0).is_err());
        assert!(Cap::new(o, 0.6).is_err());
    }

    #[test]
    fn half_cap_measure_matches_sampling() {
        let o = SpherePoint::<f64>::origin();
        let cap = Cap::new(o, 1.0 / (2.0 * std::f64::consts::PI).sqrt()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // uniform sphere samples via Gaussian vectors, independent of (s, θ)
        let n = 200_000;
        let mut hits = 0usize;
        for _ in 0..n {
            let v: [f64; 3] = std::array::from_fn(|_| {
                let u1: f64 = rng.random::<f64>().max(1e-300);
                let u2: f64 = rng.random();
                (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
            });
            if cap.contains(&SpherePoint::from_unit_vector(v)) {
                hits += 1;
            }
        }
        let p = hits as f64 / n as f64;
        let se = (0.25 / n as f64).sqrt();
        assert!((p - 0.5).abs() < 4.0 * se, "p = {p}");
    }

    #[test]
    fn centered_cap_to_disc() {
        let o = SpherePoint::<f64>::origin();
        let cap = Cap::new(o, 1.0 / (2.0 * std::f64::consts::PI).sqrt()).unwrap();
        match cap.to_euclidean().unwrap() {
            PlanarSet::Disc { center, radius } => {
                assert!(center.norm() < 1e-15);
                assert!((radius - 1.0).abs() < 1e-14);
            }
            other => panic!("unexpected {other:?}"),
        }
        let big = Cap::new(o, 0.99999 / std::f64::consts::PI.sqrt()).unwrap();
        match big.to_euclidean().unwrap() {
            PlanarSet::Disc { radius, .. } => assert!(radius > 100.0),
            other => panic!("unexpected {other:?}"),
        }
        let full = Cap::new(o, 1.0 / std::f64::consts::PI.sqrt()).unwrap();
        assert_eq!(full.to_euclidean(), Err(Error::WholeSphere));
        let at_inf = Cap::with_measure(SpherePoint::Infinity, 0.3).unwrap();
        assert!(matches!(
            at_inf.to_euclidean().unwrap(),
            PlanarSet::DiscExterior { center, .. } if center.norm() == 0.0
        ));
    }

    #[test]
    fn planar_membership_agrees_with_chordal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let center = random_point(&mut rng);
            let m: f64 = rng.random_range(0.01..0.99);
            let cap = Cap::with_measure(center, m).unwrap();
            let set = cap.to_euclidean().unwrap();
            let mut disagree = 0;
            for _ in 0..5000 {
                let z = random_point(&mut rng);
                let margin = (chordal_distance(&cap.center(), &z) - cap.chordal_radius()).abs();
                if margin < 1e-12 {
                    continue;
                }
                if cap.contains(&z) != set.contains(&z) {
                    disagree += 1;
                }
            }
            assert_eq!(disagree, 0, "cap {cap:?}");
        }
    }

    #[test]
    fn planar_disc_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let c = cx(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let r: f64 = rng.random_range(0.05..4.0);
            let cap = Cap::from_planar_disc(c, r).unwrap();
            match cap.to_euclidean().unwrap() {
                PlanarSet::Disc { center, radius } => {
                    assert!((center - c).norm() < 1e-10 * (1.0 + c.norm()));
                    assert!((radius - r).abs() < 1e-10 * (1.0 + r));
                }
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn su2_maps_preserve_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let a = random_point(&mut rng);
            let g = Su2::moving_to_origin(&a);
            let ga = g.apply(&a);
            assert!(chordal_distance(&ga, &SpherePoint::origin()) < 1e-12);
            let z = random_point(&mut rng);
            let w = random_point(&mut rng);
            let before = chordal_distance(&z, &w);
            let after = chordal_distance(&g.apply(&z), &g.apply(&w));
            assert!((before - after).abs() < 1e-12);
            let back = g.inverse().apply(&g.apply(&z));
            assert!(chordal_distance(&back, &z) < 1e-12);
            let h = Su2::moving_origin_to(&w);
            let gh = g.compose(&h);
            assert!(chordal_distance(&gh.apply(&z), &g.apply(&h.apply(&z))) < 1e-12);
        }
        assert!(Su2::new(cx(1.0, 0.0), cx(1.0, 0.0)).is_err());
    }

    #[test]
    fn lens_limits() {
        let o = SpherePoint::<f64>::origin();
        let a = Cap::with_measure(o, 0.3).unwrap();
        assert!((cap_intersection_measure(&a, &a) - 0.3).abs() < 1e-14);
        let b = Cap::with_measure(SpherePoint::Infinity, 0.2).unwrap();
        assert!(cap_intersection_measure(&a, &b).abs() < 1e-15);
        let c = Cap::with_measure(SpherePoint::Infinity, 0.9).unwrap();
        assert!((cap_intersection_measure(&a, &c) - 0.2).abs() < 1e-14);
    }

    #[test]
    fn lens_matches_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..6 {
            let a = Cap::with_measure(random_point(&mut rng), rng.random_range(0.05..0.9)).unwrap();
            let b = Cap::with_measure(random_point(&mut rng), rng.random_range(0.05..0.9)).unwrap();
            let exact = cap_intersection_measure(&a, &b);
            let n = 400_000;
            let mut hits = 0usize;
            for _ in 0..n {
                let z = random_point(&mut rng);
                if a.contains(&z) && b.contains(&z) {
                    hits += 1;
                }
            }
            let p = hits as f64 / n as f64;
            let se = (p * (1.0 - p) / n as f64).sqrt().max(1e-6);
            assert!((p - exact).abs() < 4.0 * se, "exact {exact}, mc {p}");
        }
    }

    #[test]
    fn f32_distance_smoke() {
        let o = SpherePoint::<f32>::origin();
        let d = chordal_distance(&o, &SpherePoint::new(1.0f32, 0.0).unwrap());
        assert!((d - 0.398_942_3).abs() < 1e-6);
    }
}
