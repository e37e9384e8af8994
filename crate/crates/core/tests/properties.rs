use clinr_core::bounds::recursive_error_bound;
use clinr_core::clifford::{conjugate_pauli, random_clifford, Pauli, PauliOperator};
use clinr_core::markov::MarkovVector;
use clinr_core::sweep::pareto_indices;
use clinr_core::tree::{bounded_tree, capacity_t, CliNRTree, ImplConstants};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pauli(n: usize) -> impl Strategy<Value = PauliOperator> {
    (proptest::collection::vec(0usize..4, n), any::<bool>()).prop_map(move |(ps, neg)| {
        let terms: Vec<(usize, Pauli)> =
            ps.into_iter().map(Pauli::from_index).enumerate().collect();
        let mut p = PauliOperator::from_sparse(n, &terms);
        p.set_negative(neg);
        p
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn conjugation_preserves_commutation(seed in any::<u64>(), a in pauli(5), b in pauli(5)) {
        let c = random_clifford(5, 30, seed).unwrap();
        let ca = conjugate_pauli(&c, &a).unwrap();
        let cb = conjugate_pauli(&c, &b).unwrap();
        prop_assert_eq!(ca.commutes_with(&cb), a.commutes_with(&b));
        prop_assert_eq!(ca.is_identity(), a.is_identity());
    }

    #[test]
    fn conjugation_by_inverse_undoes(seed in any::<u64>(), a in pauli(4)) {
        let c = random_clifford(4, 25, seed).unwrap();
        let there = conjugate_pauli(&c, &a).unwrap();
        let back = conjugate_pauli(&c.inverse().unwrap(), &there).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn conjugation_composes(s1 in any::<u64>(), s2 in any::<u64>(), a in pauli(3)) {
        let c1 = random_clifford(3, 10, s1).unwrap();
        let c2 = random_clifford(3, 10, s2).unwrap();
        let mut both = c1.clone();
        both.extend(&c2).unwrap();
        let step = conjugate_pauli(&c2, &conjugate_pauli(&c1, &a).unwrap()).unwrap();
        prop_assert_eq!(conjugate_pauli(&both, &a).unwrap(), step);
    }

    #[test]
    fn random_trees_are_valid(seed in any::<u64>(), s in 1usize..200, depth in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tree = CliNRTree::random(s, depth, 4, 5, &mut rng);
        prop_assert!(tree.validate().is_empty());
        let leaves: usize = tree.vertex_ids().filter(|&id| tree.is_leaf(id)).map(|id| tree.s(id)).sum();
        prop_assert_eq!(leaves, s);
        let d = tree.depth();
        if tree.vertex_ids().all(|id| !tree.is_leaf(id) || id.level == d) {
            for level in tree.levels() {
                prop_assert_eq!(level.iter().map(|v| v.s).sum::<usize>(), s);
            }
        }
        let text = tree.to_string();
        prop_assert_eq!(text.parse::<CliNRTree>().unwrap(), tree);
    }

    #[test]
    fn bounded_trees_are_valid(
        log_p in -5.0f64..-2.0,
        n in 1usize..100,
        sp in 1.0f64..40.0,
        d in 1usize..5,
    ) {
        let p = 10f64.powf(log_p);
        let k = ImplConstants::default();
        prop_assume!(capacity_t(p, n, &k).is_ok());
        let s = (sp / p).ceil() as usize;
        let tree = bounded_tree(s, p, n, d, &k).unwrap();
        prop_assert!(tree.validate().is_empty());
        prop_assert_eq!(tree.depth(), d);
        let leaves = tree.levels().last().unwrap();
        let min = leaves.iter().map(|v| v.s).min().unwrap();
        let max = leaves.iter().map(|v| v.s).max().unwrap();
        prop_assert!(max - min <= 1);
    }

    #[test]
    fn markov_steps_conserve_probability(
        p_p in 0.0f64..0.9,
        r in 0usize..12,
        rates in proptest::collection::vec((0.0f64..0.5, 0.0f64..0.5), 12),
        p_i in 0.0f64..0.5,
    ) {
        let mut v = MarkovVector::rsp(p_p, r);
        for (k, &(de, ue)) in rates.iter().take(r).enumerate() {
            v = v.step_check(k, de, ue).unwrap();
            prop_assert!((v.sum() - 1.0).abs() <= 1e-12);
            prop_assert!(v.entries().iter().all(|&e| e >= 0.0));
        }
        let v = v.step_injection(p_i);
        prop_assert!((v.sum() - 1.0).abs() <= 1e-12);
        if let Ok(rate) = v.logical_rate() {
            prop_assert!((0.0..=1.0).contains(&rate));
        }
    }

    #[test]
    fn expected_gates_cover_one_pass(
        p_p in 0.0f64..0.9,
        r in 0usize..8,
        de in 0.0f64..0.4,
        ue in 0.0f64..0.4,
        literal in any::<bool>(),
    ) {
        let mut v = MarkovVector::rsp(p_p, r);
        for k in 0..r {
            v = v.step_check(k, de, ue).unwrap();
        }
        let base = 100.0 + r as f64 * 10.0 + 20.0;
        let g = v.expected_gates(100.0, 10.0, 20.0, literal).unwrap();
        prop_assert!(g >= base - 1e-9);
        if v.p_res() == 0.0 {
            prop_assert!((g - base).abs() <= 1e-9);
        }
    }

    #[test]
    fn logical_rate_grows_with_undetected_errors(
        p_p in 0.0f64..0.9,
        de in 0.0f64..0.4,
        ue in 0.0f64..0.3,
        bump in 0.0f64..0.1,
    ) {
        let rate = |ue: f64| {
            MarkovVector::rsp(p_p, 1).step_check(0, de, ue).unwrap().logical_rate().unwrap()
        };
        prop_assert!(rate(ue + bump) >= rate(ue) - 1e-15);
    }

    #[test]
    fn error_bound_monotone_in_p(
        s in 10usize..400,
        t1 in 1usize..4,
        kids in proptest::option::of(2usize..4),
        r in 0usize..5,
        n in 1usize..10,
        log_p in -5.0f64..-2.5,
        factor in 1.0f64..3.0,
    ) {
        let tree = CliNRTree::uniform(s, t1, kids, r).unwrap();
        let k = ImplConstants::default();
        let p = 10f64.powf(log_p);
        let lo = recursive_error_bound(&tree, p, n, &k);
        let hi = recursive_error_bound(&tree, p * factor, n, &k);
        prop_assert!(hi.value >= lo.value - 1e-15);
    }

    #[test]
    fn pareto_matches_brute_force(pts in proptest::collection::vec((0u8..8, 0u8..8), 0..30)) {
        let obj: Vec<(f64, f64)> = pts.iter().map(|&(w, p)| (f64::from(w), f64::from(p))).collect();
        let mut got = pareto_indices(&obj);
        got.sort_unstable();
        let want: Vec<usize> = (0..obj.len())
            .filter(|&i| {
                !(0..obj.len()).any(|j| {
                    let (a, b) = (obj[j], obj[i]);
                    a.0 <= b.0 && a.1 <= b.1 && (a.0 < b.0 || a.1 < b.1)
                })
            })
            .collect();
        prop_assert_eq!(got, want);
    }
}
