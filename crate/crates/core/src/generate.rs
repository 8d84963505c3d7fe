//! Seeded instance families.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{subtree_cost, Instance, VertexId};

/// Random normalized tree with `terminals` leaves: a leaf is split into two
/// until there are enough. Weights are drawn from `0..=max_weight`.
pub fn random_binary(terminals: usize, capacity: u32, max_weight: u64, seed: u64) -> Result<Instance> {
    if terminals == 0 {
        return Err(Error::Validation("random_binary needs at least one terminal".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parent: Vec<Option<VertexId>> = vec![None, Some(0)];
    let mut leaves = vec![1];
    if terminals >= 2 {
        parent.push(Some(0));
        leaves.push(2);
    }
    while leaves.len() < terminals {
        let i = rng.gen_range(0..leaves.len());
        let v = leaves.swap_remove(i);
        for _ in 0..2 {
            leaves.push(parent.len());
            parent.push(Some(v));
        }
    }
    let n = parent.len();
    let weight = (0..n).map(|v| if v == 0 { 0 } else { rng.gen_range(0..=max_weight) }).collect();
    let mut demand = vec![0; n];
    for &v in &leaves {
        demand[v] = 1;
    }
    Instance::new(0, parent, weight, demand, capacity, 1)
}

/// Random recursive tree on `n` vertices; each non-root vertex is a terminal
/// with probability 1/2 (at least one is), demands from `1..=max_demand`.
pub fn random_tree(n: usize, capacity: u32, max_weight: u64, max_demand: u32, seed: u64) -> Result<Instance> {
    if n < 2 || max_demand == 0 {
        return Err(Error::Validation("random_tree needs n >= 2 and max_demand >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parent = vec![None];
    let mut weight = vec![0];
    let mut demand = vec![0];
    for v in 1..n {
        parent.push(Some(rng.gen_range(0..v)));
        weight.push(rng.gen_range(0..=max_weight));
        demand.push(if rng.gen_bool(0.5) { rng.gen_range(1..=max_demand) } else { 0 });
    }
    if demand.iter().all(|&d| d == 0) {
        demand[n - 1] = 1;
    }
    Instance::new(0, parent, weight, demand, capacity, 1)
}

/// Spine `s_0 .. s_{len−1}` (ids `0..len`) with a terminal leaf below every
/// spine vertex (id `len + i`) and one more below the last (id `2·len`). All
/// weights are 1.
pub fn caterpillar(len: usize, capacity: u32) -> Result<Instance> {
    if len == 0 {
        return Err(Error::Validation("caterpillar needs a spine".into()));
    }
    let mut edges: Vec<(usize, usize, u64)> = (1..len).map(|i| (i, i - 1, 1)).collect();
    edges.extend((0..len).map(|i| (len + i, i, 1)));
    edges.push((2 * len, len - 1, 1));
    let terms: Vec<_> = (len..=2 * len).map(|v| (v, 1)).collect();
    Instance::from_edges(2 * len + 1, 0, &edges, &terms, capacity, 1)
}

/// Depot with one terminal leaf per weight.
pub fn star(weights: &[u64], capacity: u32) -> Result<Instance> {
    let edges: Vec<_> = weights.iter().enumerate().map(|(i, &w)| (i + 1, 0, w)).collect();
    let terms: Vec<_> = (1..=weights.len()).map(|v| (v, 1)).collect();
    Instance::from_edges(weights.len() + 1, 0, &edges, &terms, capacity, 1)
}

#[derive(Clone, Debug)]
pub struct Fig5 {
    pub instance: Instance,
    /// Terminals of each zero-weight subtree.
    pub subtrees: Vec<Vec<VertexId>>,
}

/// Depot `r`, edge of weight 1 to `a`, and below `a` `m` complete binary
/// subtrees of `2k/m` terminal leaves each, all on zero-weight edges.
pub fn fig5(k: u32, m: u32) -> Result<Fig5> {
    if k == 0 || m == 0 || !(2 * k).is_multiple_of(m) {
        return Err(Error::Validation(format!("fig5 needs m to divide 2k, got k = {k}, m = {m}")));
    }
    let per = (2 * k / m) as usize;
    let mut parent: Vec<Option<VertexId>> = vec![None, Some(0)];
    let mut weight = vec![0, 1];
    let mut demand = vec![0, 0];
    let mut subtrees = Vec::new();
    for _ in 0..m {
        let base = parent.len();
        for i in 0..2 * per - 1 {
            parent.push(Some(if i == 0 { 1 } else { base + (i - 1) / 2 }));
            weight.push(0);
            demand.push(if i >= per - 1 { 1 } else { 0 });
        }
        subtrees.push((base + per - 1..base + 2 * per - 1).collect());
    }
    let instance = Instance::new(0, parent, weight, demand, k, 1)?;
    Ok(Fig5 { instance, subtrees })
}

/// Cheapest solution in which every subtree is served by a single tour:
/// minimum over all groupings of subtrees into tours of at most `k`.
pub fn fig5_restricted_optimum(fig: &Fig5) -> u64 {
    fn rec(i: usize, fig: &Fig5, groups: &mut Vec<Vec<usize>>, best: &mut u64) {
        let k = fig.instance.capacity() as usize;
        if i == fig.subtrees.len() {
            let cost = groups
                .iter()
                .map(|g| subtree_cost(&fig.instance, g.iter().flat_map(|&s| fig.subtrees[s].iter().copied())))
                .sum();
            *best = (*best).min(cost);
            return;
        }
        let size = fig.subtrees[i].len();
        for j in 0..groups.len() {
            let load: usize = groups[j].iter().map(|&s| fig.subtrees[s].len()).sum();
            if load + size <= k {
                groups[j].push(i);
                rec(i + 1, fig, groups, best);
                groups[j].pop();
            }
        }
        if size <= k {
            groups.push(vec![i]);
            rec(i + 1, fig, groups, best);
            groups.pop();
        }
    }
    let mut best = u64::MAX;
    rec(0, fig, &mut Vec::new(), &mut best);
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::is_normalized;

    #[test]
    fn binary_is_normalized_and_seeded() {
        for t in 1..8 {
            let a = random_binary(t, 2, 5, 9).unwrap();
            assert!(is_normalized(&a));
            assert_eq!(a.terminals().len(), t);
            assert_eq!(a, random_binary(t, 2, 5, 9).unwrap());
        }
    }

    #[test]
    fn fig5_shape() {
        let f = fig5(3, 3).unwrap();
        assert_eq!(f.instance.terminals().len(), 6);
        assert_eq!(f.subtrees.iter().map(Vec::len).collect::<Vec<_>>(), vec![2, 2, 2]);
        assert_eq!(fig5_restricted_optimum(&f), 6);
        assert!(fig5(3, 4).is_err());
    }

    #[test]
    fn caterpillar_shape() {
        let c = caterpillar(9, 1).unwrap();
        assert_eq!(c.n(), 19);
        assert_eq!(c.terminals(), (9..=18).collect::<Vec<_>>());
    }
}
