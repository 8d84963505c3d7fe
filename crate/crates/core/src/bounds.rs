//! Edge-load lower bounds and tree-TSP cost.
//!
//! Every edge `e` must be crossed (twice) by enough tours to carry the
//! demand `n_e` below it, which gives `Σ 2·w(e)·⌈n_e/k⌉`; dropping the
//! ceiling gives the fractional form `Σ 2·w(e)·n_e/k`, which on a tree is the
//! same number as the radial bound `(2/k)·Σ_v d(v)·dist(v)`.

use num_rational::Ratio;
use serde::Serialize;

use crate::model::{subtree_cost, Instance, VertexId};

pub type Rational = Ratio<u128>;

/// Demand strictly below each edge, indexed by the edge's child vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeLoad {
    below: Vec<u64>,
}

impl EdgeLoad {
    pub fn new(instance: &Instance) -> Self {
        let mut below = vec![0u64; instance.n()];
        for &v in instance.preorder().iter().rev() {
            below[v] += instance.demand(v) as u64;
            if let Some(p) = instance.parent(v) {
                below[p] += below[v];
            }
        }
        Self { below }
    }

    /// `n_e` for the edge above `v` (the total demand in the subtree of `v`).
    pub fn below(&self, v: VertexId) -> u64 {
        self.below[v]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LbMode {
    Fractional,
    Ceiling,
}

/// Edge-load bound in units.
pub fn lb_edge(instance: &Instance, mode: LbMode) -> Rational {
    let load = EdgeLoad::new(instance);
    let k = instance.capacity() as u128;
    let mut total: u128 = 0;
    for v in 0..instance.n() {
        if v == instance.root() {
            continue;
        }
        let w = instance.weight(v) as u128;
        let ne = load.below(v) as u128;
        total += match mode {
            LbMode::Fractional => 2 * w * ne,
            LbMode::Ceiling => 2 * w * ne.div_ceil(k) * k,
        };
    }
    Rational::new(total, k)
}

/// `(2/k)·Σ_v d(v)·dist(v)` in units.
pub fn lb_radial(instance: &Instance) -> Rational {
    let total: u128 = (0..instance.n()).map(|v| 2 * instance.demand(v) as u128 * instance.dist(v) as u128).sum();
    Rational::new(total, instance.capacity() as u128)
}

/// Cost of one closed walk visiting all of `terminals` (twice the minimal
/// spanning subtree with the depot).
pub fn tree_tsp_cost(instance: &Instance, terminals: &[VertexId]) -> u64 {
    subtree_cost(instance, terminals.iter().copied())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star(weights: &[u64], k: u32) -> Instance {
        let edges: Vec<_> = weights.iter().enumerate().map(|(i, &w)| (i + 1, 0, w)).collect();
        let terms: Vec<_> = (1..=weights.len()).map(|v| (v, 1)).collect();
        Instance::from_edges(weights.len() + 1, 0, &edges, &terms, k, 1).unwrap()
    }

    // r - a(1) - b(1), a' zero-weight leaf under a; terminals {a', b}.
    fn path(k: u32) -> Instance {
        Instance::from_edges(4, 0, &[(1, 0, 1), (2, 1, 1), (3, 1, 0)], &[(2, 1), (3, 1)], k, 1).unwrap()
    }

    #[test]
    fn edge_bound_on_path() {
        assert_eq!(lb_edge(&path(1), LbMode::Ceiling), Rational::from_integer(6));
        assert_eq!(lb_edge(&path(2), LbMode::Ceiling), Rational::from_integer(4));
        assert_eq!(lb_edge(&path(2), LbMode::Fractional), Rational::from_integer(3));
    }

    #[test]
    fn radial_examples() {
        assert_eq!(lb_radial(&star(&[1, 2, 3], 2)), Rational::from_integer(6));
        let single = Instance::from_edges(2, 0, &[(1, 0, 5)], &[(1, 1)], 1, 1).unwrap();
        assert_eq!(lb_radial(&single), Rational::from_integer(10));
        assert_eq!(lb_radial(&path(2)), lb_edge(&path(2), LbMode::Fractional));
    }

    #[test]
    fn tsp_examples() {
        let s = star(&[1, 1, 4], 2);
        assert_eq!(tree_tsp_cost(&s, &[]), 0);
        assert_eq!(tree_tsp_cost(&s, &s.terminals()), 12);
        // large capacity: the ceiling bound is the tree-TSP cost
        let s = star(&[1, 1, 4], 3);
        assert_eq!(lb_edge(&s, LbMode::Ceiling), Rational::from_integer(12));
    }

    #[test]
    fn edge_load_sums() {
        let p = path(1);
        let load = EdgeLoad::new(&p);
        assert_eq!(load.below(1), load.below(2) + load.below(3));
        assert_eq!(load.below(p.root()), p.total_demand());
    }
}
