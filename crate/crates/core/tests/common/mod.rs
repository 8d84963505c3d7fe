#![allow(dead_code)]

use tree_cvrp::budget::Budgets;
use tree_cvrp::generate::random_binary;
use tree_cvrp::model::{Instance, Solution};

/// Seeded normalized instances: `count` trees with 1..=max_terms terminals,
/// each paired with a capacity from {1, 2, 3, n′}.
pub fn corpus(count: usize, max_terms: usize, seed: u64) -> Vec<Instance> {
    (0..count)
        .map(|i| {
            let t = 1 + i % max_terms;
            let k = match (i / max_terms) % 4 {
                0 => 1,
                1 => 2,
                2 => 3,
                _ => t as u32,
            };
            let max_w = [0, 1, 3, 9][i % 4];
            random_binary(t, k, max_w, seed.wrapping_mul(1000).wrapping_add(i as u64)).unwrap()
        })
        .collect()
}

pub fn exact(inst: &Instance) -> Solution {
    tree_cvrp::baselines::exact_partition_dp(inst, &Budgets::default()).unwrap()
}

/// Brute-force splittable optimum: every way of cutting each demand into
/// parts and packing parts into tours, one part per terminal per tour.
pub fn splittable_brute_force(inst: &Instance) -> u64 {
    let terms = inst.terminals();
    let k = inst.capacity();
    let mut loads: Vec<Vec<(usize, u32)>> = Vec::new();
    let mut best = u64::MAX;
    fn rec(
        inst: &Instance,
        terms: &[usize],
        i: usize,
        left: u32,
        k: u32,
        loads: &mut Vec<Vec<(usize, u32)>>,
        best: &mut u64,
    ) {
        if i == terms.len() {
            let cost = loads.iter().map(|t| tree_cvrp::model::subtree_cost(inst, t.iter().map(|&(v, _)| v))).sum();
            *best = (*best).min(cost);
            return;
        }
        let v = terms[i];
        if left == 0 {
            let next = terms.get(i + 1).map_or(0, |&u| inst.demand(u));
            rec(inst, terms, i + 1, next, k, loads, best);
            return;
        }
        // put `x` units of v into an existing tour not yet holding v, or a new one
        for j in 0..loads.len() {
            let used: u32 = loads[j].iter().map(|p| p.1).sum();
            if loads[j].iter().any(|p| p.0 == v) || used >= k {
                continue;
            }
            for x in 1..=left.min(k - used) {
                loads[j].push((v, x));
                rec(inst, terms, i, left - x, k, loads, best);
                loads[j].pop();
            }
        }
        for x in 1..=left.min(k) {
            loads.push(vec![(v, x)]);
            rec(inst, terms, i, left - x, k, loads, best);
            loads.pop();
        }
    }
    if terms.is_empty() {
        return 0;
    }
    rec(inst, &terms, 0, inst.demand(terms[0]), k, &mut loads, &mut best);
    best
}

/// Unit-demand random tree (not normalized) from a seed.
pub fn unit_tree(n: usize, k: u32, seed: u64) -> Instance {
    tree_cvrp::generate::random_tree(n, k, 4, 1, seed).unwrap()
}
