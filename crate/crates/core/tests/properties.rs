// SPDX-License-Identifier: MIT OR Apache-2.0

use proptest::prelude::*;
use stepdist::*;

const H: f64 = 100.0;

fn step_fn() -> impl Strategy<Value = StepFunction> {
    (prop::collection::vec(1u32..1000, 0..6), prop::collection::vec(-20i32..20, 7)).prop_map(|(cuts, levels)| {
        let mut b: Vec<f64> = cuts.into_iter().map(|c| c as f64 * H / 1000.0).collect();
        b.sort_by(f64::total_cmp);
        b.dedup();
        let mut bps = vec![0.0];
        bps.extend(b);
        bps.push(H);
        let values = levels[..bps.len() - 1].iter().map(|&v| v as f64 * 0.5).collect();
        StepFunction::new(bps, values).unwrap()
    })
}

fn collection() -> impl Strategy<Value = Vec<StepFunction>> {
    prop::collection::vec(step_fn(), 2..7).prop_filter("nonzero", |fs| fs.iter().all(|f| lp_norm(f, PNorm::TWO) > 0.0))
}

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("s{i}")).collect()
}

fn p_norm() -> impl Strategy<Value = PNorm> {
    prop_oneof![Just(PNorm::ONE), Just(PNorm::TWO), Just(PNorm::Finite(3.0)), Just(PNorm::Infinity)]
}

proptest! {
    #[test]
    fn metric_axioms(f in step_fn(), g in step_fn(), h in step_fn(), p in p_norm()) {
        let d = |a: &StepFunction, b: &StepFunction| lp_distance(a, b, p).unwrap();
        prop_assert!(d(&f, &g) >= 0.0);
        prop_assert_eq!(d(&f, &g), d(&g, &f));
        prop_assert_eq!(d(&f, &f), 0.0);
        prop_assert_eq!(d(&f, &g) == 0.0, are_equivalent(&f, &g).unwrap());
        prop_assert!(d(&f, &h) <= (d(&f, &g) + d(&g, &h)) * (1.0 + 1e-9));
    }

    #[test]
    fn norm_grows_with_p(f in step_fn()) {
        let ns: Vec<f64> = [1.0, 1.5, 2.0, 3.0, 7.0].iter().map(|&p| lp_norm(&f, PNorm::new(p).unwrap())).collect();
        let sup = lp_norm(&f, PNorm::Infinity);
        for w in ns.windows(2) {
            prop_assert!(w[0] <= w[1] * (1.0 + 1e-12));
        }
        prop_assert!(*ns.last().unwrap() <= sup * (1.0 + 1e-12));
    }

    #[test]
    fn matrices_respect_kind_invariants(fs in collection(), p in p_norm()) {
        let l = labels(fs.len());
        let d_us = unscaled_distance_matrix(&l, &fs, p).unwrap();
        let d_norm = normalized_distance_matrix(&l, &fs, p).unwrap();
        let omega = alignment_matrix(&l, &fs).unwrap();
        let a_us = to_affinity(&d_us).unwrap();
        let a_norm = to_affinity(&d_norm).unwrap();
        let con = consistency_matrix(&omega, &a_us).unwrap();
        for m in [&d_us, &d_norm, &omega, &a_us, &a_norm, &con] {
            prop_assert!(m.check_invariants().is_ok());
        }
        prop_assert!(matrix_norm(&con) <= 2.0);
    }

    #[test]
    fn affinity_reverses_distance_order(fs in collection()) {
        let l = labels(fs.len());
        let d = unscaled_distance_matrix(&l, &fs, PNorm::ONE).unwrap();
        let a = to_affinity(&d).unwrap();
        prop_assume!(d.max_entry() > 0.0);
        let n = d.n();
        for x in 0..n * n {
            for y in 0..n * n {
                let (i, j, k, m) = (x / n, x % n, y / n, y % n);
                prop_assert_eq!(d.get(i, j) < d.get(k, m), a.get(i, j) > a.get(k, m));
            }
        }
    }

    #[test]
    fn distance_merges_match_reversed_affinity(fs in collection(), which in 0usize..3) {
        let linkage = [Linkage::Single, Linkage::Average, Linkage::Complete][which];
        let l = labels(fs.len());
        let d = unscaled_distance_matrix(&l, &fs, PNorm::ONE).unwrap();
        let reversed = to_affinity(&d).unwrap().to_dissimilarity().unwrap();
        let shape = |t: &Dendrogram| t.merges().iter().map(|m| (m.left, m.right, m.size)).collect::<Vec<_>>();
        let t1 = hierarchical_cluster(&d, linkage).unwrap();
        let t2 = hierarchical_cluster(&reversed, linkage).unwrap();
        prop_assert_eq!(shape(&t1), shape(&t2));
    }

    #[test]
    fn spectral_is_deterministic(fs in collection(), seed in any::<u64>()) {
        let l = labels(fs.len());
        let omega = alignment_matrix(&l, &fs).unwrap();
        let k = eigengap_k(&omega, 10).unwrap();
        prop_assert_eq!(spectral_cluster(&omega, k, seed).unwrap(), spectral_cluster(&omega, k, seed).unwrap());
    }

    #[test]
    fn haversine_is_a_metric(
        a in (-90.0f64..=90.0, -179.9f64..=180.0),
        b in (-90.0f64..=90.0, -179.9f64..=180.0),
        c in (-90.0f64..=90.0, -179.9f64..=180.0),
    ) {
        let s = |id: &str, (lat, lon): (f64, f64)| StationMetadata::new(id, lat, lon).unwrap();
        let (x, y, z) = (s("x", a), s("y", b), s("z", c));
        prop_assert_eq!(haversine_km(&x, &y), haversine_km(&y, &x));
        prop_assert_eq!(haversine_km(&x, &x), 0.0);
        prop_assert!(haversine_km(&x, &z) <= haversine_km(&x, &y) + haversine_km(&y, &z) + 1e-9);
        let g = geo_distance_matrix(&[x, y, z]).unwrap();
        prop_assert!(g.check_invariants().is_ok());
    }

    #[test]
    fn set_metrics_vanish_only_on_equal_sets(
        s in prop::collection::btree_set(0usize..200, 1..6),
        t in prop::collection::btree_set(0usize..200, 1..6),
    ) {
        let (s, t): (Vec<usize>, Vec<usize>) = (s.into_iter().collect(), t.into_iter().collect());
        let eq = s == t;
        prop_assert_eq!(hausdorff(&s, &t).unwrap() == 0.0, eq);
        prop_assert_eq!(modified_hausdorff(&s, &t).unwrap() == 0.0, eq);
        prop_assert_eq!(mj_semi_metric(&s, &t, 1.0).unwrap() == 0.0, eq);
    }
}
