mod common;

use proptest::prelude::*;
use tree_cvrp::baselines::{exact_partition_dp, greedy, itp};
use tree_cvrp::budget::Budgets;
use tree_cvrp::decomposition::decompose;
use tree_cvrp::generate::random_binary;
use tree_cvrp::model::verify;
use tree_cvrp::transforms::{
    band_index, build_hat_tree, has_bounded_distances, lift_solution, solve_banded, split_by_distance, BandTag,
    OffsetMode,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn hat_tree_contract(t in 1usize..11, gamma_k in 2u64..12, d_tilde in 1u64..8, k in 1u32..4, seed in any::<u64>()) {
        let inst = random_binary(t, k, 5, seed).unwrap();
        let dec = decompose(&inst, gamma_k).unwrap();
        let hat = build_hat_tree(&inst, &dec, d_tilde).unwrap();
        for v in inst.terminals() {
            prop_assert!(hat.instance.is_terminal(v));
            prop_assert!(hat.instance.dist(v) >= inst.dist(v));
        }
        prop_assert_eq!(hat.instance.terminals(), inst.terminals());
        // components keep their edge sets (edges named by child vertex)
        for v in 0..inst.n() {
            prop_assert_eq!(hat.edge_component[v], dec.edge_component[v]);
        }
        let b = Budgets::default();
        for sol in [itp(&hat.instance), greedy(&hat.instance), exact_partition_dp(&hat.instance, &b).unwrap()] {
            prop_assert!(verify(&hat.instance, &sol).feasible);
            let lifted = lift_solution(&inst, &hat, &sol).unwrap();
            prop_assert!(verify(&inst, &lifted).feasible);
            prop_assert!(lifted.cost() <= sol.cost());
        }
    }

    #[test]
    fn band_sets_have_bounded_ratio(t in 1usize..40, inv in 2u32..6, w in 1u64..40, seed in any::<u64>()) {
        let inst = random_binary(t, 2, w, seed).unwrap();
        for i0 in 0..inv {
            let bands = split_by_distance(&inst, inv, i0).unwrap();
            let mut seen = bands.at_depot.len();
            for set in &bands.sets {
                seen += set.terminals.len();
                prop_assert!(has_bounded_distances(&inst, &set.terminals, inv));
                for &v in &set.terminals {
                    let band = band_index(inst.dist(v), inst.scale(), inv) - i0 as i64;
                    match set.tag {
                        BandTag::Y(j) => prop_assert_eq!(band, j * inv as i64),
                        BandTag::Z(j) => prop_assert!(band > j * inv as i64 && band < (j + 1) * inv as i64),
                    }
                }
            }
            prop_assert_eq!(seen, inst.terminals().len());
        }
    }

    #[test]
    fn banded_exact_is_near_optimal(t in 1usize..11, inv in 2u32..5, k in 1u32..4, seed in any::<u64>()) {
        let inst = random_binary(t, k, 9, seed).unwrap();
        let opt = common::exact(&inst).cost();
        let b = Budgets::default();
        let out = solve_banded(&inst, inv, OffsetMode::Best, |s| exact_partition_dp(s, &b)).unwrap();
        prop_assert!(verify(&inst, &out.solution).feasible);
        prop_assert!(out.solution.cost() >= opt);
        // cost ≤ (1 + 5/inv)·opt
        prop_assert!(out.solution.cost() as u128 * inv as u128 <= (inv as u128 + 5) * opt as u128);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    // U_i holds the terminals of one distance band; Σ opt(U_i) ≤ 2(1+1/b)·opt,
    // i.e. b·Σ opt(U_i) ≤ 2(b+1)·opt.
    #[test]
    fn single_bands_cost_at_most_twice(t in 1usize..11, b in 2u32..5, k in 1u32..4, w in 1u64..30, seed in any::<u64>()) {
        let inst = random_binary(t, k, w, seed).unwrap();
        let opt = common::exact(&inst).cost() as u128;
        let mut by_band = std::collections::BTreeMap::<i64, Vec<(usize, u32)>>::new();
        for v in inst.terminals() {
            if inst.dist(v) > 0 {
                by_band.entry(band_index(inst.dist(v), inst.scale(), b)).or_default().push((v, 1));
            }
        }
        let total: u128 = by_band
            .values()
            .map(|u| common::exact(&inst.with_terminals(u).unwrap()).cost() as u128)
            .sum();
        prop_assert!(total * b as u128 <= 2 * (b as u128 + 1) * opt, "{} vs {}", total, opt);
    }
}
