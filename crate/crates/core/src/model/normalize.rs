use crate::error::{Error, Result};

use super::instance::{Instance, VertexId};
use super::solution::{Claim, Solution, Tour};

/// Correspondence between the vertices of an original instance and a
/// transformed one. A single original vertex may have several images; every
/// transformed vertex has at most one preimage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexMap {
    forward: Vec<Vec<VertexId>>,
    backward: Vec<Option<VertexId>>,
}

impl VertexMap {
    pub fn new(original_n: usize, transformed_n: usize) -> Self {
        Self { forward: vec![Vec::new(); original_n], backward: vec![None; transformed_n] }
    }

    pub fn identity(n: usize) -> Self {
        Self { forward: (0..n).map(|v| vec![v]).collect(), backward: (0..n).map(Some).collect() }
    }

    pub fn link(&mut self, original: VertexId, transformed: VertexId) {
        if transformed >= self.backward.len() {
            self.backward.resize(transformed + 1, None);
        }
        self.forward[original].push(transformed);
        self.backward[transformed] = Some(original);
    }

    pub fn forward(&self, original: VertexId) -> &[VertexId] {
        &self.forward[original]
    }

    pub fn backward(&self, transformed: VertexId) -> Option<VertexId> {
        self.backward.get(transformed).copied().flatten()
    }

    pub fn original_len(&self) -> usize {
        self.forward.len()
    }

    pub fn transformed_len(&self) -> usize {
        self.backward.len()
    }

    /// `self` maps A to B, `next` maps B to C; the result maps A to C.
    pub fn compose(&self, next: &VertexMap) -> VertexMap {
        let mut out = VertexMap::new(self.original_len(), next.transformed_len());
        for a in 0..self.original_len() {
            for &b in self.forward(a) {
                for &c in next.forward(b) {
                    out.link(a, c);
                }
            }
        }
        out
    }

    /// Translates a solution on the transformed instance back to `original`,
    /// merging claims that land on the same original terminal.
    pub fn pull_back(&self, original: &Instance, solution: &Solution) -> Result<Solution> {
        let mut tours = Vec::with_capacity(solution.tours().len());
        for tour in solution.tours() {
            let mut claims = Vec::with_capacity(tour.claims().len());
            for c in tour.claims() {
                let v =
                    self.backward(c.v).ok_or_else(|| Error::Infeasible(format!("vertex {} has no preimage", c.v)))?;
                if !original.is_terminal(v) {
                    return Err(Error::Infeasible(format!("vertex {} maps to non-terminal {v}", c.v)));
                }
                claims.push(Claim { v, units: c.units });
            }
            tours.push(Tour::new(claims));
        }
        Ok(Solution::new(original, tours))
    }
}

/// Rewrites a unit-demand instance so that terminals are exactly the leaves
/// and every non-root internal vertex has two children. The root keeps one or
/// two children. Optimal cost is unchanged.
///
/// Non-terminal leaves are pruned, non-terminal vertices with a single child
/// are spliced out (their edge weights add up), terminals at internal vertices
/// move to a fresh zero-weight leaf, and high-degree vertices are expanded
/// into a left-leaning chain of zero-weight binary vertices.
pub fn normalize(instance: &Instance) -> Result<(Instance, VertexMap)> {
    if !instance.is_unit_demand() {
        return Err(Error::Validation("normalize expects unit demands; expand splittable instances first".into()));
    }
    if instance.total_demand() == 0 {
        return Err(Error::EmptyInstance);
    }
    let n = instance.n();
    let mut keep = vec![false; n];
    for &v in instance.preorder().iter().rev() {
        keep[v] = instance.is_terminal(v) || instance.children(v).iter().any(|&c| keep[c]);
    }

    let mut parent: Vec<Option<VertexId>> = Vec::new();
    let mut weight: Vec<u64> = Vec::new();
    let mut demand: Vec<u32> = Vec::new();
    let mut map = VertexMap::new(n, 0);
    let mut add = |p: Option<VertexId>, w: u64, d: u32, parent: &mut Vec<Option<VertexId>>| {
        parent.push(p);
        weight.push(w);
        demand.push(d);
        parent.len() - 1
    };

    // (original vertex, new parent, accumulated weight to the new parent)
    let mut stack: Vec<(VertexId, Option<VertexId>, u64)> = vec![(instance.root(), None, 0)];
    while let Some((v, new_parent, acc)) = stack.pop() {
        let kept: Vec<VertexId> = instance.children(v).iter().copied().filter(|&c| keep[c]).collect();
        let is_root = v == instance.root();
        if !is_root && !instance.is_terminal(v) && kept.len() == 1 {
            let c = kept[0];
            stack.push((c, new_parent, acc + instance.weight(c)));
            continue;
        }
        if !is_root && instance.is_terminal(v) && kept.is_empty() {
            let nv = add(new_parent, acc, 1, &mut parent);
            map.link(v, nv);
            continue;
        }
        let nv = add(new_parent, acc, 0, &mut parent);
        map.link(v, nv);

        // Slots to hang under nv: an optional token leaf, then kept children.
        enum Slot {
            Token,
            Child(VertexId),
        }
        let mut slots: Vec<Slot> = Vec::new();
        if instance.is_terminal(v) {
            slots.push(Slot::Token);
        }
        slots.extend(kept.iter().map(|&c| Slot::Child(c)));

        let mut attach_points = Vec::with_capacity(slots.len());
        let mut hub = nv;
        for i in 0..slots.len() {
            let remaining = slots.len() - i;
            if remaining > 2 {
                attach_points.push(hub);
                hub = add(Some(hub), 0, 0, &mut parent);
            } else {
                attach_points.push(hub);
            }
        }
        let mut pending = Vec::new();
        for (slot, at) in slots.into_iter().zip(attach_points) {
            match slot {
                Slot::Token => {
                    let leaf = add(Some(at), 0, 1, &mut parent);
                    // The token leaf is the first image so it carries the token.
                    map.forward[v].insert(0, leaf);
                    map.backward.resize(parent.len(), None);
                    map.backward[leaf] = Some(v);
                }
                Slot::Child(c) => pending.push((c, Some(at), instance.weight(c))),
            }
        }
        // Reverse so children are created in increasing original id order.
        stack.extend(pending.into_iter().rev());
    }
    map.backward.resize(parent.len(), None);
    let out = Instance::new(0, parent, weight, demand, instance.capacity(), instance.scale())?;
    Ok((out, map))
}

/// The canonical form expected by the decomposition and the DP.
pub fn check_normalized(instance: &Instance) -> Result<()> {
    if !instance.is_unit_demand() {
        return Err(Error::NotNormalized("demands must be unit".into()));
    }
    if instance.total_demand() == 0 {
        return Err(Error::EmptyInstance);
    }
    for v in 0..instance.n() {
        let nc = instance.children(v).len();
        if v == instance.root() {
            if instance.is_terminal(v) || nc == 0 || nc > 2 {
                return Err(Error::NotNormalized("root must be a non-terminal with 1 or 2 children".into()));
            }
        } else if nc == 0 && !instance.is_terminal(v) {
            return Err(Error::NotNormalized(format!("leaf {v} is not a terminal")));
        } else if nc > 0 && instance.is_terminal(v) {
            return Err(Error::NotNormalized(format!("terminal {v} is not a leaf")));
        } else if nc != 0 && nc != 2 {
            return Err(Error::NotNormalized(format!("vertex {v} has {nc} children")));
        }
    }
    Ok(())
}

pub fn is_normalized(instance: &Instance) -> bool {
    check_normalized(instance).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn internal_terminal_gets_leaf() {
        // r - a(1) - b(1), terminals a and b.
        let inst = Instance::from_edges(3, 0, &[(1, 0, 1), (2, 1, 1)], &[(1, 1), (2, 1)], 2, 1).unwrap();
        let (norm, map) = normalize(&inst).unwrap();
        assert!(is_normalized(&norm));
        assert_eq!(norm.n(), 4);
        let a = map.forward(1)[0];
        assert!(norm.is_terminal(a) && norm.is_leaf(a));
        assert_eq!(norm.dist(a), 1);
        assert_eq!(norm.weight(a), 0);
        let b = map.forward(2)[0];
        assert_eq!(norm.dist(b), 2);
        let a_inner = map.forward(1)[1];
        assert_eq!(norm.children(a_inner).len(), 2);
        for t in inst.terminals() {
            assert_eq!(map.backward(map.forward(t)[0]), Some(t));
        }
    }

    #[test]
    fn binary_star_is_unchanged() {
        let inst = Instance::from_edges(3, 0, &[(1, 0, 2), (2, 0, 5)], &[(1, 1), (2, 1)], 1, 1).unwrap();
        let (norm, map) = normalize(&inst).unwrap();
        assert_eq!(norm, inst);
        assert_eq!(map, VertexMap::identity(3));
    }

    #[test]
    fn prunes_and_splices() {
        // r - a(2), a - b(1) with b a non-terminal leaf; a terminal. Weights in halves.
        let inst = Instance::from_edges(3, 0, &[(1, 0, 2), (2, 1, 1)], &[(1, 1)], 1, 2).unwrap();
        let (norm, map) = normalize(&inst).unwrap();
        assert_eq!(norm.n(), 2);
        let a = map.forward(1)[0];
        assert_eq!(norm.parent(a), Some(norm.root()));
        assert_eq!(norm.weight(a), 2);
        assert!(map.forward(2).is_empty());
    }

    #[test]
    fn high_degree_is_binarized() {
        let edges: Vec<_> = (1..=5).map(|v| (v, 0, v as u64)).collect();
        let terms: Vec<_> = (1..=5).map(|v| (v, 1)).collect();
        let inst = Instance::from_edges(6, 0, &edges, &terms, 2, 1).unwrap();
        let (norm, map) = normalize(&inst).unwrap();
        assert!(is_normalized(&norm));
        for v in 1..=5 {
            assert_eq!(norm.dist(map.forward(v)[0]), v as u64);
        }
    }

    #[test]
    fn splices_unary_chain_and_root_terminal() {
        // root terminal, chain r - a - b - c with only c terminal.
        let inst = Instance::from_edges(4, 0, &[(1, 0, 1), (2, 1, 2), (3, 2, 3)], &[(0, 1), (3, 1)], 2, 1).unwrap();
        let (norm, map) = normalize(&inst).unwrap();
        assert!(is_normalized(&norm), "{:?}", check_normalized(&norm));
        assert_eq!(norm.dist(map.forward(3)[0]), 6);
        assert_eq!(norm.dist(map.forward(0)[0]), 0);
        assert_eq!(norm.n(), 3);
    }

    #[test]
    fn empty_and_splittable_rejected() {
        let inst = Instance::from_edges(2, 0, &[(1, 0, 1)], &[], 1, 1).unwrap();
        assert_eq!(normalize(&inst).unwrap_err(), Error::EmptyInstance);
        let inst = Instance::from_edges(2, 0, &[(1, 0, 1)], &[(1, 2)], 1, 1).unwrap();
        assert!(matches!(normalize(&inst), Err(Error::Validation(_))));
    }
}
