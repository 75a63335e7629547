//! Seeded random objects for experiments and property tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::polyspace::Poly;
use crate::region::{intersection_measure, Region, DISJOINT_TOL};
use crate::scalar::{cx, Real};
use crate::sphere::{Cap, SpherePoint, Su2};

/// Generator for trial `index` of a batch: independent of thread count and
/// evaluation order.
pub fn trial_rng(batch_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(batch_seed);
    rng.set_stream(index);
    rng
}

/// Unit-norm polynomial with i.i.d. complex Gaussian coefficients; its law
/// is invariant under the SU(2) action.
pub fn random_unit_poly<T: Real>(n: usize, rng: &mut impl Rng) -> Poly<T> {
    loop {
        let c = (0..=n)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                cx(T::lit(re), T::lit(im))
            })
            .collect();
        if let Ok(p) = Poly::new(n, c).and_then(|p| p.normalized()) {
            return p;
        }
    }
}

/// Point uniformly distributed under `dm`.
pub fn random_point<T: Real>(rng: &mut impl Rng) -> SpherePoint<T> {
    let s: f64 = rng.random();
    let th: f64 = rng.random::<f64>() * std::f64::consts::TAU;
    SpherePoint::from_s_theta(T::lit(s), T::lit(th))
}

/// Haar-distributed rotation.
pub fn random_su2<T: Real>(rng: &mut impl Rng) -> Su2<T> {
    let v: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let alpha = cx(T::lit(v[0] / n), T::lit(v[1] / n));
    let beta = cx(T::lit(v[2] / n), T::lit(v[3] / n));
    let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
    Su2::new(alpha / norm, beta / norm).expect("normalized")
}

/// Cap with uniformly random center and measure in `[lo, hi)`.
pub fn random_cap<T: Real>(rng: &mut impl Rng, lo: f64, hi: f64) -> Cap<T> {
    let m: f64 = rng.random_range(lo..hi);
    Cap::with_measure(random_point(rng), T::lit(m)).expect("measure in (0,1)")
}

/// Disjoint union of `count` random caps, drawn by rejection. Each cap has
/// measure in `[lo, hi)`.
pub fn random_cap_union<T: Real>(rng: &mut impl Rng, count: usize, lo: f64, hi: f64) -> Region<T> {
    let mut members: Vec<Region<T>> = Vec::with_capacity(count);
    let mut attempts = 0;
    while members.len() < count {
        attempts += 1;
        let c = Region::Cap(random_cap(rng, lo, hi));
        let clear = members
            .iter()
            .all(|m| intersection_measure(m, &c).value.to_f64_lossy() < DISJOINT_TOL);
        if clear {
            members.push(c);
        } else if attempts > 10_000 {
            break;
        }
    }
    if members.len() == 1 {
        return members.pop().expect("one member");
    }
    Region::Union(members)
}

/// A random member of the cap algebra: a cap union, possibly complemented.
pub fn random_region<T: Real>(rng: &mut impl Rng) -> Region<T> {
    let count = rng.random_range(1..=3);
    let u = random_cap_union(rng, count, 0.02, 0.25);
    if rng.random_bool(0.3) {
        Region::complement(u)
    } else {
        u
    }
}
