//! Height reduction. Components are classed by `⌊dist(r_c) / D̃⌋`; every
//! maximal connected set of same-class components is hung directly below its
//! critical vertex (the shallowest root in the set), each component through a
//! fresh copy of its root joined by an edge of weight `dist(r_c) − dist(z)`.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::decomposition::Decomposition;
use crate::error::{Error, Result};
use crate::model::{verify, Instance, Solution, VertexId, VertexMap};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HatComponent {
    pub id: usize,
    /// Root in the hat tree: a fresh copy, or the critical vertex itself when
    /// the component already starts there.
    pub root: VertexId,
    pub exit: Option<VertexId>,
    pub critical: VertexId,
    pub delta: u64,
    /// Zero-based distance class.
    pub class: u64,
}

#[derive(Clone, Debug)]
pub struct HatTree {
    pub instance: Instance,
    /// Original to hat-tree vertices. Copies map back to the vertex they copy.
    pub map: VertexMap,
    pub d_tilde: u64,
    pub critical: Vec<VertexId>,
    pub components: Vec<HatComponent>,
    /// Component owning the edge above each hat-tree vertex; `None` for the
    /// depot and for attachment edges.
    pub edge_component: Vec<Option<usize>>,
}

impl HatTree {
    /// Components hung below critical vertex `z`, by id.
    pub fn attached(&self, z: VertexId) -> impl Iterator<Item = &HatComponent> {
        self.components.iter().filter(move |c| c.critical == z)
    }

    /// Children of `v` inside component `c`.
    pub fn component_children(&self, c: usize, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.instance.children(v).iter().copied().filter(move |&u| self.edge_component[u] == Some(c))
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

pub fn build_hat_tree(instance: &Instance, decomposition: &Decomposition, d_tilde: u64) -> Result<HatTree> {
    if d_tilde == 0 {
        return Err(Error::Validation("d_tilde must be positive".into()));
    }
    let comps = &decomposition.components;
    let n = instance.n();
    let class: Vec<u64> = comps.iter().map(|c| instance.dist(c.root) / d_tilde).collect();

    // Components meet at shared roots and at exit/root pairs.
    let mut uf = UnionFind((0..comps.len()).collect());
    let mut first_at_root: Vec<Option<usize>> = vec![None; n];
    for c in comps {
        match first_at_root[c.root] {
            Some(o) if class[o] == class[c.id] => uf.union(o, c.id),
            Some(_) => {}
            None => first_at_root[c.root] = Some(c.id),
        }
    }
    for c in comps {
        if let Some(x) = c.exit {
            for d in decomposition.rooted_at(x) {
                if class[d.id] == class[c.id] {
                    uf.union(c.id, d.id);
                }
            }
        }
    }
    let mut top: Vec<Option<VertexId>> = vec![None; comps.len()];
    for c in comps {
        let s = uf.find(c.id);
        let better = match top[s] {
            None => true,
            Some(t) => (instance.depth(c.root), c.root) < (instance.depth(t), t),
        };
        if better {
            top[s] = Some(c.root);
        }
    }

    let mut parent: Vec<Option<VertexId>> = (0..n).map(|v| instance.parent(v)).collect();
    let mut weight: Vec<u64> = (0..n).map(|v| instance.weight(v)).collect();
    let mut demand: Vec<u32> = (0..n).map(|v| instance.demand(v)).collect();
    let mut edge_component = decomposition.edge_component.clone();
    let mut map = VertexMap::identity(n);
    let mut hat_components = Vec::with_capacity(comps.len());
    let mut critical = BTreeSet::new();
    for c in comps {
        let z = top[uf.find(c.id)].expect("every set has a top");
        critical.insert(z);
        let delta = instance.dist(c.root) - instance.dist(z);
        let root = if c.root == z {
            c.root
        } else {
            let copy = parent.len();
            parent.push(Some(z));
            weight.push(delta);
            demand.push(0);
            edge_component.push(None);
            map.link(c.root, copy);
            for &e in &c.edges {
                if instance.parent(e) == Some(c.root) {
                    parent[e] = Some(copy);
                }
            }
            copy
        };
        hat_components.push(HatComponent { id: c.id, root, exit: c.exit, critical: z, delta, class: class[c.id] });
    }
    let hat = Instance::new(instance.root(), parent, weight, demand, instance.capacity(), instance.scale())?;
    Ok(HatTree {
        instance: hat,
        map,
        d_tilde,
        critical: critical.into_iter().collect(),
        components: hat_components,
        edge_component,
    })
}

/// Maps a hat-tree solution back to the original tree. Terminals keep their
/// ids, so tours are unchanged; only their costs can drop.
pub fn lift_solution(original: &Instance, hat: &HatTree, solution: &Solution) -> Result<Solution> {
    let report = verify(&hat.instance, solution);
    if !report.feasible {
        return Err(Error::Infeasible(format!("hat-tree solution: {:?}", report.violations.first())));
    }
    let lifted = hat.map.pull_back(original, solution)?;
    if lifted.cost() > solution.cost() {
        return Err(Error::Internal(format!("lifting increased cost from {} to {}", solution.cost(), lifted.cost())));
    }
    Ok(lifted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::decompose;
    use crate::model::{tour_cost, Tour};

    // Same fixture as the decomposition tests.
    fn caterpillar10() -> Instance {
        let mut edges = Vec::new();
        for i in 1..=8 {
            edges.push((i, i - 1, 1));
        }
        for i in 0..=8 {
            edges.push((9 + i, i, 1));
        }
        edges.push((18, 8, 1));
        let terms: Vec<_> = (9..=18).map(|v| (v, 1)).collect();
        Instance::from_edges(19, 0, &edges, &terms, 1, 1).unwrap()
    }

    #[test]
    fn single_component_is_identity() {
        let inst = caterpillar10();
        let dec = decompose(&inst, 20).unwrap();
        let hat = build_hat_tree(&inst, &dec, 1).unwrap();
        assert_eq!(hat.instance, inst);
        assert_eq!(hat.critical, vec![0]);
    }

    #[test]
    fn caterpillar_two_classes() {
        // Roots at dist 0, 1, 4, 7. With D̃ = 4 the classes are 0, 0, 1, 1:
        // {top, c(s1)} hangs at s0 and {c(s4), leaf(s7)} at s4.
        let inst = caterpillar10();
        let dec = decompose(&inst, 3).unwrap();
        let hat = build_hat_tree(&inst, &dec, 4).unwrap();
        assert_eq!(hat.critical, vec![0, 4]);
        let got: Vec<_> = hat.components.iter().map(|c| (c.critical, c.delta, c.class)).collect();
        assert_eq!(got, vec![(0, 0, 0), (0, 1, 0), (4, 0, 1), (4, 3, 1)]);
        // s1 and s7 were copied
        assert_eq!(hat.instance.n(), 21);
        let s1_copy = hat.components[1].root;
        assert_eq!(hat.instance.parent(s1_copy), Some(0));
        assert_eq!(hat.map.backward(s1_copy), Some(1));
        assert_eq!(hat.instance.parent(2), Some(s1_copy));
        assert!(hat.instance.is_leaf(1));
        let s7_copy = hat.components[3].root;
        assert_eq!(hat.instance.parent(s7_copy), Some(4));
        assert_eq!(hat.instance.weight(s7_copy), 3);
        for v in inst.terminals() {
            assert!(hat.instance.dist(v) >= inst.dist(v));
        }
        // t8 at dist 9 in T; in the hat tree s0 -> s1' (1) -> ... -> s4 (4) -> s7' (7) -> s8 -> t8 = 9.
        assert_eq!(hat.instance.dist(17), 9);
    }

    #[test]
    fn lifting_never_increases_cost() {
        let inst = caterpillar10().with_capacity(8).unwrap();
        let dec = decompose(&inst, 3).unwrap();
        let hat = build_hat_tree(&inst, &dec, 2).unwrap();
        let tours = vec![Tour::from_terminals([9, 17]), Tour::from_terminals((10..=16).chain([18]))];
        let sol = Solution::new(&hat.instance, tours.clone());
        let lifted = lift_solution(&inst, &hat, &sol).unwrap();
        assert!(lifted.cost() <= sol.cost());
        for t in &tours {
            assert!(tour_cost(&inst, t) <= tour_cost(&hat.instance, t));
        }
    }
}
