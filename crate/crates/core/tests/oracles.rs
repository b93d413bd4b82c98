mod common;

use common::*;
use normembed::graph::{apsp, Graph};
use normembed::metrics::{auc, d_avg, map_score, rank_of_target};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn apsp_matches_floyd_warshall(seed in any::<u64>(), n in 1usize..=50, weighted in any::<bool>()) {
        let mut r = rng(seed);
        let p = r.gen_range(0.02..0.5);
        let g = random_graph(&mut r, n, p, weighted);
        let store = apsp(&g);
        prop_assert!(apsp_matches(&g, &store, 1e-12).is_ok(), "{:?}", apsp_matches(&g, &store, 1e-12));
        prop_assert_eq!(store.is_unit_weight(), g.is_unit_weight());
    }

    #[test]
    fn d_avg_matches_definition(seed in any::<u64>(), n in 2usize..=50, weighted in any::<bool>()) {
        let mut r = rng(seed);
        let p = r.gen_range(0.05..0.6);
        let g = random_graph(&mut r, n, p, weighted);
        let store = apsp(&g);
        prop_assume!(!store.is_empty());
        let spec = random_spec(&mut r);
        let pts = random_points(&mut r, &spec, n);
        let fast = d_avg(&pts, &store);
        let slow = brute_d_avg(&pts, &g);
        prop_assert!((fast - slow).abs() <= 1e-9 * slow.max(1.0), "{fast} vs {slow}");
    }

    #[test]
    fn map_matches_definition(seed in any::<u64>(), n in 2usize..=50, ties in any::<bool>()) {
        let mut r = rng(seed);
        let p = r.gen_range(0.05..0.6);
        let g = random_graph(&mut r, n, p, false);
        prop_assume!(g.num_edges() > 0);
        let spec = random_spec(&mut r);
        let pts = if ties && !spec.has_poincare() {
            lattice_points(&mut r, &spec, n)
        } else {
            random_points(&mut r, &spec, n)
        };
        let fast = map_score(&pts, &g).unwrap();
        let slow = brute_map(&pts, &g);
        prop_assert!((fast - slow).abs() <= 1e-9, "{fast} vs {slow}");
    }

    #[test]
    fn map_is_invariant_under_scaling_and_translation(seed in any::<u64>(), n in 2usize..=30, s in 0.01f64..100.0) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, 0.3, false);
        prop_assume!(g.num_edges() > 0);
        let spec: normembed::SpaceSpec = "l1:3*linf:2".parse().unwrap();
        let pts = random_points(&mut r, &spec, n);
        let base = map_score(&pts, &g).unwrap();
        prop_assert!((map_score(&pts.scaled(s), &g).unwrap() - base).abs() <= 1e-12);
        let mut moved = pts.clone();
        let shift: Vec<f64> = (0..spec.total_dim()).map(|_| r.gen_range(-5.0..5.0)).collect();
        for i in 0..n {
            for (c, t) in moved.row_mut(i).iter_mut().zip(&shift) {
                *c += t;
            }
        }
        let shifted = map_score(&moved, &g).unwrap();
        prop_assert!((shifted - base).abs() <= 1e-9, "{shifted} vs {base}");
    }

    #[test]
    fn auc_matches_pairwise_count(
        pos in prop::collection::vec(-3i32..3, 1..60),
        neg in prop::collection::vec(-3i32..3, 1..60),
        jitter in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let mut r = rng(seed);
        let mut f = |v: &Vec<i32>| -> Vec<f64> {
            v.iter().map(|&x| x as f64 + if jitter { r.gen_range(0.0..0.5) } else { 0.0 }).collect()
        };
        let (p, q) = (f(&pos), f(&neg));
        prop_assert!((auc(&p, &q) - brute_auc(&p, &q)).abs() <= 1e-12);
    }

    #[test]
    fn rank_matches_full_sort(target in -5i32..5, others in prop::collection::vec(-5i32..5, 0..150)) {
        let others: Vec<f64> = others.into_iter().map(f64::from).collect();
        prop_assert_eq!(rank_of_target(target as f64, &others), brute_rank(target as f64, &others));
    }
}

#[test]
fn oracles_agree_on_a_hand_example() {
    // path 0-1-2 plus isolated 3
    let g = Graph::unweighted(4, [(0, 1), (1, 2)]).unwrap();
    let fw = floyd_warshall(&g);
    assert_eq!(fw[0][2], Some(2.0));
    assert_eq!(fw[0][3], None);
    assert_eq!(brute_auc(&[1.0, 2.0], &[1.0]), 0.75);
    assert_eq!(brute_rank(1.0, &[2.0, 1.0, 0.5]), 3);
}
