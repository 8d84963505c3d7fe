mod common;

use num_rational::Ratio;
use proptest::prelude::*;
use tree_cvrp::bounds::{lb_edge, LbMode};
use tree_cvrp::decomposition::{check_decomposition, decompose, sum_component_root_distances};
use tree_cvrp::generate::random_binary;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn all_checks_pass(t in 1usize..60, gamma_k in 2u64..30, w in 0u64..6, seed in any::<u64>()) {
        let inst = random_binary(t, 1 + (seed % 4) as u32, w, seed).unwrap();
        let dec = decompose(&inst, gamma_k).unwrap();
        let report = check_decomposition(&inst, &dec, gamma_k);
        prop_assert!(report.ok, "{:?}", report.issues);
        // every edge in exactly one component
        let edges: usize = dec.components.iter().map(|c| c.edges.len()).sum();
        prop_assert_eq!(edges, inst.n() - 1);
        // Σ dist(r_c) ≤ 3/(2Γ)·lb_frac with Γ = gamma_k / k
        let lhs = Ratio::from_integer(sum_component_root_distances(&inst, &dec) as u128);
        let k = inst.capacity() as u128;
        let rhs = Ratio::new(3 * k, 2 * gamma_k as u128) * lb_edge(&inst, LbMode::Fractional);
        prop_assert!(lhs <= rhs, "{} > {}", lhs, rhs);
    }
}
