mod common;

use tree_cvrp::model::verify;
use tree_cvrp::ptas_dp::{solve_ptas, PtasParams};

#[test]
fn exhaustive_matches_oracle() {
    for (i, inst) in common::corpus(240, 12, 3).iter().enumerate() {
        let opt = common::exact(inst).cost();
        for gamma_k in [2, 3, 5, 40] {
            let params = PtasParams::exhaustive(inst, gamma_k);
            let out = solve_ptas(inst, &params).unwrap_or_else(|e| panic!("instance {i}, gamma_k {gamma_k}: {e}"));
            assert!(verify(inst, &out.solution).feasible);
            assert_eq!(out.solution.cost(), opt, "instance {i}, gamma_k {gamma_k}, k {}", inst.capacity());
        }
    }
}

#[test]
fn corpus_exercises_decomposition() {
    let mut multi = 0;
    let mut crit = 0;
    for inst in common::corpus(240, 12, 3) {
        let out = solve_ptas(&inst, &PtasParams::exhaustive(&inst, 2)).unwrap();
        multi += usize::from(out.report.components >= 3);
        crit += usize::from(out.report.critical_vertices >= 2);
    }
    assert!(multi > 100 && crit > 50, "{multi} {crit}");
}

#[test]
fn unnormalized_inputs() {
    for seed in 0..150 {
        let inst =
            tree_cvrp::generate::random_tree(4 + (seed as usize % 12), 1 + (seed % 4) as u32, 4, 1, seed).unwrap();
        let opt = common::exact(&inst).cost();
        let out = solve_ptas(&inst, &PtasParams::exhaustive(&inst, 3)).unwrap();
        assert!(verify(&inst, &out.solution).feasible);
        assert_eq!(out.solution.cost(), opt, "seed {seed}");
    }
}

mod hand {
    use std::collections::BTreeMap;

    use num_rational::Ratio;
    use tree_cvrp::decomposition::decompose;
    use tree_cvrp::generate::{fig5, random_binary, star};
    use tree_cvrp::ptas_dp::{
        local_dp, solve_ptas, subtree_dp_component_root, subtree_dp_critical, PtasParams, SumList, Tag,
    };
    use tree_cvrp::transforms::build_hat_tree;

    #[test]
    fn two_leaves_local_table() {
        let inst = star(&[1, 1], 2).unwrap();
        let params = PtasParams::exhaustive(&inst, 40);
        let hat = build_hat_tree(&inst, &decompose(&inst, 40).unwrap(), 1).unwrap();
        assert_eq!(hat.components.len(), 1);
        let table = local_dp(&hat, 0, &params).unwrap();
        let want: BTreeMap<_, _> =
            [(vec![(1, Tag::Ending), (1, Tag::Ending)], 4), (vec![(2, Tag::Ending)], 4)].into_iter().collect();
        assert_eq!(table, want);
    }

    #[test]
    fn spine_costs_twice_its_weight() {
        let mut seen = 0;
        for seed in 0..60 {
            let inst = random_binary(10, 2, 5, seed).unwrap();
            let dec = decompose(&inst, 2).unwrap();
            let hat = build_hat_tree(&inst, &dec, 1).unwrap();
            let params = PtasParams::exhaustive(&inst, 2);
            for spine in dec.components.iter().filter(|c| c.exit.is_some() && c.demand == 0) {
                let table = local_dp(&hat, spine.id, &params).unwrap();
                assert_eq!(table[&vec![(0, Tag::Passing)]], spine.spine_cost);
                assert_eq!(table[&vec![(0, Tag::Passing), (0, Tag::Passing)]], 2 * spine.spine_cost);
                seen += 1;
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn component_root_association() {
        let mut params = PtasParams::exhaustive(&star(&[1], 4).unwrap(), 40);
        params.min_subtour_demand = 1;
        let f: BTreeMap<_, _> =
            [(vec![(0, Tag::Passing)], 6), (vec![(0, Tag::Passing), (0, Tag::Passing)], 12)].into_iter().collect();
        let exit: BTreeMap<_, _> = [(SumList::from_values([1, 1]), 10)].into_iter().collect();
        let t = subtree_dp_component_root(&f, Some(&exit), 3, &params, 4).unwrap();
        // one passing subtour carries one exit tour, the other pays the spine again
        assert_eq!(t[&SumList::from_values([1, 1])], 22);
        let t = subtree_dp_component_root(&f, Some(&[(SumList::from_values([2]), 10)].into()), 3, &params, 4).unwrap();
        assert_eq!(t[&SumList::from_values([2])], 16);
    }

    #[test]
    fn critical_merge_under_rounding() {
        let params = PtasParams::exhaustive(&star(&[1], 4).unwrap(), 40);
        let child: BTreeMap<_, _> = [(SumList::from_values([2]), 0)].into_iter().collect();
        let t = subtree_dp_critical(&[(child.clone(), 0), (child, 0)], &[vec![2, 4]], &params, 4).unwrap();
        assert_eq!(t.get(&SumList::from_counts([(4, 1)])), Some(&0));
        assert_eq!(t.get(&SumList::from_counts([(2, 2)])), Some(&0));
    }

    #[test]
    fn fig5_with_theory_parameters() {
        for k in [3, 6, 9] {
            let fig = fig5(k, 3).unwrap();
            let params = PtasParams::from_epsilon(Ratio::new(1, 2), k).unwrap();
            assert_eq!(solve_ptas(&fig.instance, &params).unwrap().solution.cost(), 4, "k = {k}");
        }
    }
}

mod caps {
    use proptest::prelude::*;
    use tree_cvrp::generate::random_binary;
    use tree_cvrp::model::verify;
    use tree_cvrp::ptas_dp::{solve_ptas, PtasParams, XStrategy};

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn loosening_one_cap_never_hurts(t in 2usize..9, k in 2u32..5, seed in any::<u64>()) {
            let inst = random_binary(t, k, 5, seed).unwrap();
            let base = PtasParams::exhaustive(&inst, 3);
            let cost = |p: &PtasParams| solve_ptas(&inst, p).map(|o| o.solution.cost()).unwrap_or(u64::MAX);
            let mut last = u64::MAX;
            for m in 1..=base.max_tours_per_component {
                let c = cost(&PtasParams { max_tours_per_component: m, ..base.clone() });
                prop_assert!(c <= last);
                last = c;
            }
            let mut last = u64::MAX;
            for x in 1..=base.x_set_size {
                let c = cost(&PtasParams { x_set_size: x, ..base.clone() });
                prop_assert!(c <= last);
                last = c;
            }
            prop_assert_eq!(last, cost(&base));
        }

        #[test]
        fn restricted_x_strategies_are_feasible(t in 1usize..12, k in 2u32..6, seed in any::<u64>()) {
            let inst = random_binary(t, k, 7, seed).unwrap();
            let opt = super::common::exact(&inst).cost();
            for strategy in [XStrategy::FromHeuristic, XStrategy::GeometricGrid] {
                let params = PtasParams { x_strategy: strategy, x_set_size: 2, ..PtasParams::exhaustive(&inst, 3) };
                let out = solve_ptas(&inst, &params).unwrap();
                prop_assert!(verify(&inst, &out.solution).feasible);
                prop_assert!(out.solution.cost() >= opt);
                prop_assert_eq!(out.report.x_strategy, strategy);
            }
        }
    }
}
