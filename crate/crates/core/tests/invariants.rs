//! Property tests: random inputs are drawn from the library generators keyed
//! by a proptest-chosen seed, so shrinking reduces the seed and degree.

use proptest::prelude::*;
use spinconc::concentration::{concentrate, deficit, max_disc_concentration};
use spinconc::levelsets::LevelSets;
use spinconc::localization::assemble;
use spinconc::polyspace::{inner_product, kernel_distance, su2_rotate, sup_weighted_modulus};
use spinconc::quadrature::{build_rule, Purpose};
use spinconc::random::{random_cap, random_point, random_region, random_su2, random_unit_poly, trial_rng};
use spinconc::region::Region;
use spinconc::sphere::{chordal_distance, max_chordal_distance, Cap};
use spinconc::wehrl::{wehrl_stability_report, PhiSpec, GAP_SLACK};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn chordal_distance_is_a_bounded_metric(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 0);
        let (a, b, c) = (random_point::<f64>(&mut rng), random_point(&mut rng), random_point(&mut rng));
        let (ab, bc, ac) = (chordal_distance(&a, &b), chordal_distance(&b, &c), chordal_distance(&a, &c));
        prop_assert!((ab - chordal_distance(&b, &a)).abs() < 1e-14);
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert!(ab <= max_chordal_distance::<f64>() + 1e-12);
        prop_assert!((chordal_distance(&a, &a.antipode()) - max_chordal_distance::<f64>()).abs() < 1e-9);
    }

    #[test]
    fn rotations_are_isometries(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 1);
        let g = random_su2::<f64>(&mut rng);
        let (a, b) = (random_point::<f64>(&mut rng), random_point(&mut rng));
        let d = chordal_distance(&g.apply(&a), &g.apply(&b));
        prop_assert!((d - chordal_distance(&a, &b)).abs() < 1e-10);
        let back = g.inverse().apply(&g.apply(&a));
        prop_assert!(chordal_distance(&back, &a) < 1e-10);
    }

    #[test]
    fn cap_measure_round_trips(seed in any::<u64>(), m in 0.001f64..0.999) {
        let mut rng = trial_rng(seed, 2);
        let c = Cap::with_measure(random_point::<f64>(&mut rng), m).unwrap();
        prop_assert!((c.measure() - m).abs() < 1e-12);
    }

    #[test]
    fn su2_action_is_unitary_and_covariant(seed in any::<u64>(), n in 1usize..=12) {
        let mut rng = trial_rng(seed, 3);
        let p = random_unit_poly::<f64>(n, &mut rng);
        let q = random_unit_poly::<f64>(n, &mut rng);
        let g = random_su2::<f64>(&mut rng);
        let (gp, gq) = (su2_rotate(&p, &g), su2_rotate(&q, &g));
        let before = inner_product(&p, &q).unwrap();
        let after = inner_product(&gp, &gq).unwrap();
        prop_assert!((before - after).norm() < 1e-12);
        let z = random_point::<f64>(&mut rng);
        prop_assert!((gp.u(&g.apply(&z)) - p.u(&z)).abs() < 1e-10);
    }

    #[test]
    fn pointwise_bound_and_kernel_distance_range(seed in any::<u64>(), n in 1usize..=10) {
        let mut rng = trial_rng(seed, 4);
        let p = random_unit_poly::<f64>(n, &mut rng);
        let max = sup_weighted_modulus(&p).unwrap();
        prop_assert!(max.t > 0.0 && max.t <= 1.0 + 1e-12);
        for _ in 0..16 {
            prop_assert!(p.u(&random_point(&mut rng)) <= max.t + 1e-10);
        }
        let d = kernel_distance(&p).unwrap().distance;
        prop_assert!((0.0..=2f64.sqrt() + 1e-12).contains(&d));
    }
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn concentration_is_bounded_by_the_centered_cap(seed in any::<u64>(), n in 1usize..=8) {
        let mut rng = trial_rng(seed, 5);
        let p = random_unit_poly::<f64>(n, &mut rng);
        let region = random_region::<f64>(&mut rng);
        let rule = build_rule(n, Purpose::ExactPoly).unwrap();
        let c = concentrate(&p, &region, &rule).unwrap();
        let m = region.measure().value;
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&c));
        prop_assert!(c <= max_disc_concentration(n, m) + 1e-9);
        prop_assert!(deficit(&p, &region, &rule).unwrap() >= -1e-9);
        let rest = concentrate(&p, &Region::complement(region.clone()), &rule).unwrap();
        prop_assert!((c + rest - 1.0).abs() < 1e-10);
        let g = random_su2::<f64>(&mut rng);
        let moved = concentrate(&su2_rotate(&p, &g), &region.rotated(&g), &rule).unwrap();
        prop_assert!((moved - c).abs() < 1e-10);
    }

    #[test]
    fn localization_spectrum_lies_in_unit_interval(seed in any::<u64>(), n in 1usize..=8) {
        let mut rng = trial_rng(seed, 6);
        let region = random_region::<f64>(&mut rng);
        let rule = build_rule(n, Purpose::ExactPoly).unwrap();
        let l = assemble(n, &region, &rule).unwrap();
        let spectrum = l.spectrum().unwrap();
        prop_assert_eq!(spectrum.len(), n + 1);
        prop_assert!(spectrum.iter().all(|x| (-1e-12..=1.0 + 1e-12).contains(x)));
        let m = region.measure().value;
        prop_assert!((spectrum.iter().sum::<f64>() - (n + 1) as f64 * m).abs() < 1e-10);
        let cap = random_cap::<f64>(&mut rng, 0.05, 0.5);
        let top = assemble(n, &Region::cap(cap), &rule).unwrap().spectrum().unwrap();
        let bound = max_disc_concentration(n, cap.measure());
        prop_assert!(top.iter().cloned().fold(f64::MIN, f64::max) <= bound + 1e-10);
    }
}

proptest! {
    #![proptest_config(config(8))]

    #[test]
    fn superlevel_measure_is_monotone(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = trial_rng(seed, 7);
        let ls = LevelSets::new(&random_unit_poly(n, &mut rng)).unwrap();
        let t = ls.t_max();
        let mus: Vec<f64> = (1..=12).map(|k| ls.mu(t * k as f64 / 13.0)).collect();
        prop_assert!(mus.iter().all(|m| (0.0..=1.0).contains(m)));
        prop_assert!(mus.windows(2).all(|w| w[1] <= w[0] + 1e-4));
    }

    #[test]
    fn coherent_states_minimize_entropy(seed in any::<u64>(), n in 1usize..=5) {
        let mut rng = trial_rng(seed, 8);
        let p = random_unit_poly(n, &mut rng);
        let phi = PhiSpec::Power { p: 2.0 };
        let rule = build_rule(n, Purpose::Entropy).unwrap();
        let r = wehrl_stability_report(&p, &phi, &rule).unwrap();
        prop_assert!(r.gap >= -GAP_SLACK, "gap {}", r.gap);
    }
}
