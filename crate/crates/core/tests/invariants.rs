//! Property tests for the structural invariants: brute-force NN agreement,
//! marginal consistency, exact antisymmetries, and p-value identities.

use proptest::prelude::*;

use nnct::inference::{p_asymptotic, Alternative};
use nnct::nngraph::NnDigraph;
use nnct::pattern::{gen_csr, relabel, Class, MarkedPattern, Region};
use nnct::stats::{compute_stat, pielou_chi2, pielou_z, StatName};
use nnct::table::Nnct;

fn arb_points(max_n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 2..max_n)
}

fn arb_pattern(max_n: usize) -> impl Strategy<Value = MarkedPattern> {
    arb_points(max_n)
        .prop_flat_map(|points| {
            let n = points.len();
            (Just(points), prop::collection::vec(prop::bool::ANY, n))
        })
        .prop_map(|(points, flags)| {
            let labels = flags
                .into_iter()
                .map(|f| if f { Class::One } else { Class::Two })
                .collect();
            MarkedPattern::new(points, labels, Region::unit_square()).unwrap()
        })
}

fn brute_force_nn(points: &[(f64, f64)]) -> Vec<usize> {
    (0..points.len())
        .map(|i| {
            let mut best = usize::MAX;
            let mut best_d2 = f64::INFINITY;
            for (j, &(x, y)) in points.iter().enumerate() {
                if j == i {
                    continue;
                }
                let d2 = (points[i].0 - x).powi(2) + (points[i].1 - y).powi(2);
                if d2 < best_d2 || (d2 == best_d2 && j < best) {
                    best = j;
                    best_d2 = d2;
                }
            }
            best
        })
        .collect()
}

proptest! {
    #[test]
    fn nn_digraph_matches_brute_force(points in arb_points(200)) {
        let graph = NnDigraph::from_points(&points).unwrap();
        let brute = brute_force_nn(&points);
        prop_assert_eq!(graph.nn_index(), brute.as_slice());
    }

    #[test]
    fn nn_digraph_handles_duplicates(points in arb_points(60), dup in 0usize..60) {
        // Force at least one duplicated coordinate.
        let mut points = points;
        let src = dup % points.len();
        let dst = (dup / 2) % points.len();
        points[dst] = points[src];
        let graph = NnDigraph::from_points(&points).unwrap();
        let brute = brute_force_nn(&points);
        prop_assert_eq!(graph.nn_index(), brute.as_slice());
        prop_assert_eq!(graph.in_degree().iter().sum::<usize>(), points.len());
    }

    #[test]
    fn digraph_structure_invariants(pattern in arb_pattern(120)) {
        let graph = NnDigraph::build(&pattern).unwrap();
        for (i, &j) in graph.nn_index().iter().enumerate() {
            prop_assert_ne!(i, j);
        }
        prop_assert_eq!(graph.q() % 2, 0);
        prop_assert_eq!(graph.r() % 2, 0);
        // Q from in-degrees equals the ordered shared-NN pair count.
        let q: usize = graph.in_degree().iter().map(|&d| d * d.saturating_sub(1)).sum();
        prop_assert_eq!(q, graph.q());
    }

    #[test]
    fn relabel_preserves_coordinates_and_sizes(pattern in arb_pattern(80), seed in 0u64..1000) {
        let shuffled = relabel(&pattern, seed);
        prop_assert_eq!(pattern.points(), shuffled.points());
        prop_assert_eq!(pattern.n1(), shuffled.n1());
        prop_assert_eq!(pattern.n2(), shuffled.n2());
        // Locations fixed means the NN structure statistics are fixed.
        let a = NnDigraph::build(&pattern).unwrap();
        let b = NnDigraph::build(&shuffled).unwrap();
        prop_assert_eq!(a.q(), b.q());
        prop_assert_eq!(a.r(), b.r());
    }

    #[test]
    fn nnct_marginals_consistent(pattern in arb_pattern(100)) {
        prop_assume!(pattern.n1() > 0 && pattern.n2() > 0);
        let graph = NnDigraph::build(&pattern).unwrap();
        let t = Nnct::from_pattern(&pattern, &graph).unwrap();
        let c = t.counts();
        prop_assert_eq!(c[0][0] + c[0][1], t.row_sums()[0]);
        prop_assert_eq!(c[1][0] + c[1][1], t.row_sums()[1]);
        prop_assert_eq!(c[0][0] + c[1][0], t.col_sums()[0]);
        prop_assert_eq!(c[0][1] + c[1][1], t.col_sums()[1]);
        prop_assert_eq!(t.row_sums()[0] as usize, pattern.n1());
        let shares = t.percentages();
        for i in 0..2 {
            let row_total: f64 = shares.row_conditional[i].iter().sum();
            prop_assert!((row_total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn statistics_invariant_under_storage_order(
        pattern in arb_pattern(60),
        rotation in 1usize..59,
    ) {
        prop_assume!(pattern.n1() > 1 && pattern.n2() > 1);
        // Distinct inter-point distances keep the NN map unambiguous under
        // reordering; random uniform coordinates satisfy this.
        let n = pattern.n();
        let rot = rotation % n;
        let mut points = pattern.points().to_vec();
        let mut labels = pattern.labels().to_vec();
        points.rotate_left(rot);
        labels.rotate_left(rot);
        let rotated = MarkedPattern::new(points, labels, pattern.region()).unwrap();

        let g1 = NnDigraph::build(&pattern).unwrap();
        let g2 = NnDigraph::build(&rotated).unwrap();
        let t1 = Nnct::from_pattern(&pattern, &g1).unwrap();
        let t2 = Nnct::from_pattern(&rotated, &g2).unwrap();
        prop_assert_eq!(t1.counts(), t2.counts());
        prop_assert_eq!(g1.q(), g2.q());
        prop_assert_eq!(g1.r(), g2.r());
        // Identical tables and (Q, R) give bit-identical statistics.
        for name in StatName::ALL {
            let a = compute_stat(name, &t1, g1.q() as f64, g1.r() as f64);
            let b = compute_stat(name, &t2, g2.q() as f64, g2.r() as f64);
            match (a, b) {
                (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "one order degenerate, the other not"),
            }
        }
    }

    #[test]
    fn antisymmetry_on_random_tables(
        n11 in 0u64..40,
        n12 in 0u64..40,
        n21 in 0u64..40,
        n22 in 0u64..40,
        q_half in 0u64..40,
        r_half in 0u64..40,
    ) {
        let t = match Nnct::from_counts([[n11, n12], [n21, n22]]) {
            Ok(t) => t,
            Err(_) => return Ok(()),
        };
        prop_assume!(t.n() >= 4 && t.n1() >= 1 && t.n2() >= 1);
        let q = (2 * q_half.min(t.n() * (t.n() - 1) / 4)) as f64;
        let r = (2 * r_half.min(t.n() / 2)) as f64;
        let zd11 = compute_stat(StatName::DixonZ11, &t, q, r);
        let zd12 = compute_stat(StatName::DixonZ12, &t, q, r);
        if let (Ok(a), Ok(b)) = (zd11, zd12) {
            prop_assert!((a + b).abs() < 1e-9);
        }
        let zc11 = compute_stat(StatName::CeyhanZ11, &t, q, r);
        let zc21 = compute_stat(StatName::CeyhanZ21, &t, q, r);
        if let (Ok(a), Ok(b)) = (zc11, zc21) {
            prop_assert!((a + b).abs() < 1e-9);
        }
        if t.col_sums().iter().all(|&c| c > 0) {
            let z = pielou_z(&t).unwrap();
            let chi2 = pielou_chi2(&t).unwrap();
            prop_assert!((z * z - chi2).abs() < 1e-9);
        }
    }

    #[test]
    fn asymptotic_p_identities(z in -10.0f64..10.0) {
        let right = p_asymptotic(z, StatName::ZII, Alternative::RightSided).unwrap();
        let left = p_asymptotic(z, StatName::ZII, Alternative::LeftSided).unwrap();
        let two = p_asymptotic(z, StatName::ZII, Alternative::TwoSided).unwrap();
        prop_assert_eq!(right + left, 1.0);
        prop_assert!((0.0..=1.0).contains(&right));
        prop_assert!((0.0..=1.0).contains(&two));
        // Two-sided p equals twice the smaller tail.
        prop_assert!((two - 2.0 * right.min(left)).abs() < 1e-12);
    }

    #[test]
    fn generator_outputs_satisfy_invariants(
        n1 in 1usize..40,
        n2 in 1usize..40,
        seed in 0u64..500,
    ) {
        let p = gen_csr(n1, n2, Region::unit_square(), seed).unwrap();
        prop_assert_eq!(p.n1(), n1);
        prop_assert_eq!(p.n2(), n2);
        for &(x, y) in p.points() {
            prop_assert!(p.region().contains(x, y));
        }
    }
}
