use std::sync::Arc;

use proptest::prelude::*;
use sumsetlab_core::density::{
    banach_density_windowed, berg_measure_approx, frequency_at, upper_density, DensityMode, FolnerFamily,
};
use sumsetlab_core::groups::{build_group, GroupTable};
use sumsetlab_core::rational::{ratio, Rational};
use sumsetlab_core::sets::{fp_closure, verify_fp, Ambient, FpBudget, IntWindow, Subset};
use sumsetlab_core::stability::{equation_index, ladder_index, verify_equation, verify_ladder, FiniteRelation};
use sumsetlab_core::sumsets::{
    ip_extract, nathanson_decompose, nested_sets, productset_search, verify_nathanson, verify_productset, IpOutcome,
    NathansonOutcome, ProductsetOutcome,
};

fn group(spec: &str) -> Arc<GroupTable> {
    Arc::new(build_group(spec).unwrap())
}

fn int_set(lo: i64, bits: &[bool]) -> Subset<IntWindow> {
    let w = IntWindow::new(lo, lo + bits.len() as i64 - 1).unwrap();
    Subset::from_predicate(w, |x| bits[(x - lo) as usize])
}

fn group_set(g: &Arc<GroupTable>, bits: &[bool]) -> Subset<Arc<GroupTable>> {
    Subset::from_predicate(g.clone(), |x| bits[x])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn translation_preserves_size_up_to_clipping(bits in prop::collection::vec(any::<bool>(), 1..200), g in -250i64..250) {
        let a = int_set(-37, &bits);
        let t = a.translate(g);
        prop_assert_eq!(t.set.len() + t.clipped, a.len());
        let back = t.set.translate(-g).set;
        prop_assert!(back.is_subset(&a));
    }

    #[test]
    fn group_translation_is_a_bijection(bits in prop::collection::vec(any::<bool>(), 24), g in 0usize..24) {
        let s4 = group("sym:4");
        let a = group_set(&s4, &bits);
        let t = a.translate(g);
        prop_assert_eq!(t.clipped, 0);
        prop_assert_eq!(t.set.translate(s4.inv(g)).set, a.clone());
        prop_assert_eq!(a.inverse().set.inverse().set, a);
    }

    #[test]
    fn fp_closure_words_are_ordered_products(base in prop::collection::vec(1usize..60, 1..7), len in 1usize..5) {
        let a5 = group("alt:5");
        let words = fp_closure(&a5, &base, len, FpBudget::default()).unwrap();
        prop_assert_eq!(words.len() as u64, sumsetlab_core::sets::word_count(base.len(), len));
        for w in &words {
            prop_assert!(w.indices.windows(2).all(|p| p[0] < p[1]));
            let v = w.indices.iter().fold(a5.identity(), |acc, &i| a5.mul(acc, base[i]));
            prop_assert_eq!(v, w.value);
        }
    }

    #[test]
    fn greedy_base_products_stay_in_the_set(bits in prop::collection::vec(prop::bool::weighted(0.8), 60)) {
        let a5 = group("alt:5");
        let a = group_set(&a5, &bits);
        prop_assume!(!a.is_empty());
        if let Ok(IpOutcome::Extracted(cert)) = ip_extract(&a, 3, Rational::new(1, 60), FpBudget::default()) {
            prop_assert!(verify_fp(&cert.base, &a, 3, FpBudget::default()).unwrap().holds);
            let nested = nested_sets(&a, &cert.base);
            for (i, (ai, _)) in nested.iter().enumerate().skip(1) {
                prop_assert_eq!(ai.len(), cert.sizes[i]);
                prop_assert!(ai.is_subset(&nested[i - 1].0));
            }
        }
    }

    #[test]
    fn nathanson_certificates_verify_and_keep_density(
        bits in prop::collection::vec(prop::bool::weighted(0.9), 120),
        n in 1usize..3,
        m in 1usize..4,
    ) {
        let z = group("zn:120");
        let a = group_set(&z, &bits);
        let delta = ratio(a.len(), 120);
        if let NathansonOutcome::Decomposed(cert) = nathanson_decompose(&a, n, m, Rational::new(1, 100)) {
            prop_assert!(cert.b.is_subset(&a));
            prop_assert!(verify_nathanson(&a, &cert.parts, &cert.b).is_ok());
            // Each level loses at most (m + 1)(1 − density of its input).
            let mut floor = delta;
            for d in &cert.level_densities {
                floor = Rational::from_integer(1) - Rational::from_integer(m as i64 + 1) * (Rational::from_integer(1) - floor);
                prop_assert!(*d >= floor, "{} < {}", d, floor);
                floor = *d;
            }
        }
    }

    #[test]
    fn productset_certificates_verify(bits in prop::collection::vec(prop::bool::weighted(0.7), 30), k in 1usize..5) {
        let z = group("zn:30");
        let a = group_set(&z, &bits);
        prop_assume!(!a.is_empty());
        if let ProductsetOutcome::Found(cert) = productset_search(&a, k, true).unwrap() {
            prop_assert_eq!(cert.b.len(), k);
            prop_assert!(verify_productset(&a, &cert.b, &cert.c).is_ok());
            prop_assert!(cert.c.iter().all(|&c| a.contains(c)));
        }
    }

    #[test]
    fn banach_dominates_block_averages(bits in prop::collection::vec(any::<bool>(), 40..300), n in 1usize..20) {
        let a = int_set(0, &bits);
        prop_assume!(n <= bits.len());
        let best = banach_density_windowed(&a, n).unwrap();
        let blocks = bits.len() / n;
        for k in 1..=blocks {
            let count = bits[..n * k].iter().filter(|&&b| b).count();
            prop_assert!(best.value >= ratio(count, n * k));
        }
    }

    #[test]
    fn periodic_upper_density_is_nearly_translation_invariant(m in 2i64..12, r in 0i64..12, g in -20i64..20) {
        let r = r % m;
        let w = IntWindow::new(-400, 400).unwrap();
        let a = Subset::from_predicate(w, |x| x.rem_euclid(m) == r);
        let f = FolnerFamily::Intervals { max_index: 300 };
        let d = upper_density(&a, &f, 300, DensityMode::Upper).unwrap();
        let t = a.translate(g);
        let dt = upper_density(&t.set, &f, 300, DensityMode::Upper).unwrap();
        let size = 2 * d.witness.min(dt.witness) + 1;
        let slack = ratio(g.unsigned_abs() as usize + t.clipped, size as usize);
        let diff = if d.value > dt.value { d.value - dt.value } else { dt.value - d.value };
        prop_assert!(diff <= slack);
    }

    #[test]
    fn measure_is_additive_and_monotone(
        bits in prop::collection::vec(any::<bool>(), 12),
        shifts in prop::collection::vec(-6i64..6, 1..4),
    ) {
        // A periodic set with period 12 on an explicit family of whole periods.
        let w = IntWindow::new(-400, 400).unwrap();
        let a = Subset::from_predicate(w, |x| bits[x.rem_euclid(12) as usize]);
        let sets: Vec<Vec<i64>> = (1..=20).map(|n| (-12 * n..12 * n).collect()).collect();
        let f = FolnerFamily::explicit(sets);
        let requests: Vec<Vec<i64>> = shifts.iter().map(|&s| vec![0, s]).collect();
        let approx = berg_measure_approx(&a, &requests, &f, 20, requests.len() + 2).unwrap();
        let last = approx.final_index();
        let size = 24 * last;
        for (gs, v) in requests.iter().zip(&approx.values) {
            let s = a.intersection(&a.translate(gs[1]).set);
            prop_assert!(*v <= approx.base_value + ratio(1, size));
            prop_assert_eq!(*v, frequency_at(&s, &f, last).unwrap());
            let rest = a.difference(&s);
            let total = frequency_at(&s, &f, last).unwrap() + frequency_at(&rest, &f, last).unwrap();
            prop_assert_eq!(total, frequency_at(&a, &f, last).unwrap());
        }
        prop_assert_eq!(approx.base_value, upper_density(&a, &f, 20, DensityMode::Upper).unwrap().value);
    }

    #[test]
    fn ladder_and_transpose_differ_by_at_most_one(table in prop::collection::vec(prop::collection::vec(any::<bool>(), 6), 6)) {
        let r = FiniteRelation::from_fn(6, 6, |a, b| table[a][b]).unwrap();
        let l = ladder_index(&r, 40);
        let lt = ladder_index(&r.transpose(), 40);
        prop_assert!(verify_ladder(&r, &l.witness_a, &l.witness_b));
        prop_assert!(l.value <= lt.value + 1 && lt.value <= l.value + 1);
        let e = equation_index(&r, 40);
        prop_assert!(verify_equation(&r, &e.witness_a, &e.witness_b));
    }

    #[test]
    fn restriction_never_increases_indices(
        table in prop::collection::vec(prop::collection::vec(any::<bool>(), 7), 7),
        keep_left in prop::collection::vec(any::<bool>(), 7),
        keep_right in prop::collection::vec(any::<bool>(), 7),
    ) {
        let r = FiniteRelation::from_fn(7, 7, |a, b| table[a][b]).unwrap();
        let left: Vec<usize> = (0..7).filter(|&i| keep_left[i]).collect();
        let right: Vec<usize> = (0..7).filter(|&i| keep_right[i]).collect();
        prop_assume!(!left.is_empty() && !right.is_empty());
        let sub = r.restrict(&left, &right).unwrap();
        prop_assert!(ladder_index(&sub, 40).value <= ladder_index(&r, 40).value);
        prop_assert!(equation_index(&sub, 40).value <= equation_index(&r, 40).value);
    }
}

#[test]
fn subgroups_of_small_groups_have_ladder_at_most_two() {
    use sumsetlab_core::stability::set_stability_index;
    for spec in ["zn:12", "sym:3", "dihedral:4", "sym:4", "alt:4", "zn:24"] {
        let g = group(spec);
        let mut seen = std::collections::BTreeSet::new();
        for x in 0..g.order() {
            for y in 0..g.order() {
                let h = g.closure(&[x, y]);
                if !seen.insert(h.clone()) {
                    continue;
                }
                let set = Subset::from_elements(g.clone(), h).0;
                let rep = set_stability_index(&set, 40);
                assert!(rep.exact, "{spec}");
                assert!(rep.value <= 2, "{spec}: subgroup of order {} has ladder {}", set.len(), rep.value);
            }
        }
    }
}
