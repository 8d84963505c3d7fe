//! Partition of the edges of a normalized tree into leaf and internal
//! components.
//!
//! A leaf component is the whole subtree of a vertex holding at least `Γk`
//! terminals whose children each hold fewer. Between consecutive key vertices
//! (leaf-component roots, branch points of the backbone, the depot) internal
//! components are peeled bottom-up, each rooted at the deepest path vertex
//! whose remaining part reaches `Γk` terminals; the leftover on top becomes
//! a possibly small internal component.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{check_normalized, Instance, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    Leaf,
    Internal,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Component {
    pub id: usize,
    pub kind: ComponentKind,
    pub root: VertexId,
    /// Exit vertex (internal components only).
    pub exit: Option<VertexId>,
    /// Edges, identified by their child endpoint, sorted.
    pub edges: Vec<VertexId>,
    pub demand: u64,
    /// Twice the weight of the root-to-exit path (0 for leaf components).
    pub spine_cost: u64,
    pub big: bool,
}

impl Component {
    pub fn is_leaf(&self) -> bool {
        self.kind == ComponentKind::Leaf
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub gamma_k: u64,
    pub components: Vec<Component>,
    /// Component of the edge above each vertex; `None` for the depot.
    pub edge_component: Vec<Option<usize>>,
    pub key_vertices: Vec<VertexId>,
    /// Image of each component under the big-component map; empty when there
    /// is a single component.
    pub assignment: Vec<usize>,
}

impl Decomposition {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Components rooted at `v`, by id.
    pub fn rooted_at(&self, v: VertexId) -> impl Iterator<Item = &Component> {
        self.components.iter().filter(move |c| c.root == v)
    }
}

fn subtree_demand(instance: &Instance) -> Vec<u64> {
    let mut n = vec![0u64; instance.n()];
    for &v in instance.preorder().iter().rev() {
        n[v] += instance.demand(v) as u64;
        if let Some(p) = instance.parent(v) {
            n[p] += n[v];
        }
    }
    n
}

fn collect_subtree_edges(instance: &Instance, v: VertexId, out: &mut Vec<VertexId>) {
    let mut stack: Vec<VertexId> = instance.children(v).to_vec();
    while let Some(u) = stack.pop() {
        out.push(u);
        stack.extend_from_slice(instance.children(u));
    }
}

fn path_weight(instance: &Instance, top: VertexId, bottom: VertexId) -> u64 {
    instance.dist(bottom) - instance.dist(top)
}

/// Decomposes a normalized instance with component threshold `gamma_k = Γ·k`.
pub fn decompose(instance: &Instance, gamma_k: u64) -> Result<Decomposition> {
    check_normalized(instance)?;
    if gamma_k < 2 {
        return Err(Error::Validation(
            "gamma_k must be at least 2: with threshold 1 no internal vertex can root a leaf component".into(),
        ));
    }
    let n = instance.n();
    let root = instance.root();
    let nv = subtree_demand(instance);

    let is_leaf_root: Vec<bool> = (0..n)
        .map(|v| !instance.is_leaf(v) && nv[v] >= gamma_k && instance.children(v).iter().all(|&c| nv[c] < gamma_k))
        .collect();

    let mut components: Vec<Component> = Vec::new();
    let mut push_component = |kind, root: VertexId, exit: Option<VertexId>, mut edges: Vec<VertexId>, demand: u64| {
        edges.sort_unstable();
        let spine_cost = exit.map_or(0, |e| 2 * path_weight(instance, root, e));
        components.push(Component { id: 0, kind, root, exit, edges, demand, spine_cost, big: demand >= gamma_k });
    };

    if nv[root] < gamma_k || is_leaf_root[root] {
        let mut edges = Vec::new();
        collect_subtree_edges(instance, root, &mut edges);
        push_component(ComponentKind::Leaf, root, None, edges, nv[root]);
        return Ok(finish(instance, components, vec![root], gamma_k));
    }

    // has_leaf[v]: the subtree of v contains a leaf-component root (v is on the backbone).
    let mut has_leaf = is_leaf_root.clone();
    for &v in instance.preorder().iter().rev() {
        if is_leaf_root[v] {
            continue;
        }
        has_leaf[v] = instance.children(v).iter().any(|&c| has_leaf[c]);
    }
    let is_key: Vec<bool> = (0..n)
        .map(|v| {
            v == root
                || is_leaf_root[v]
                || (has_leaf[v] && instance.children(v).iter().filter(|&&c| has_leaf[c]).count() >= 2)
        })
        .collect();
    let key_vertices: Vec<VertexId> = instance.preorder().iter().copied().filter(|&v| is_key[v]).collect();

    for &v in instance.preorder() {
        if is_leaf_root[v] {
            let mut edges = Vec::new();
            collect_subtree_edges(instance, v, &mut edges);
            push_component(ComponentKind::Leaf, v, None, edges, nv[v]);
        }
    }

    for &v2 in &key_vertices {
        if v2 == root {
            continue;
        }
        // path[0] = v2, path[m] = v1 (lowest key ancestor).
        let mut path = vec![v2];
        let mut u = v2;
        while let Some(p) = instance.parent(u) {
            path.push(p);
            if is_key[p] {
                break;
            }
            u = p;
        }
        let m = path.len() - 1;
        // Cumulative demand and edges hanging off the path at each index,
        // excluding the path child and any backbone child.
        let mut side_demand = vec![0u64; m + 1];
        for j in 1..=m {
            side_demand[j] =
                instance.children(path[j]).iter().filter(|&&c| c != path[j - 1] && !has_leaf[c]).map(|&c| nv[c]).sum();
        }
        let mut cum = vec![0u64; m + 1];
        for j in 1..=m {
            cum[j] = cum[j - 1] + side_demand[j];
        }
        let mut x = 0usize; // index of the current exit on the path
        let mut j = 1usize;
        let mut emit = |top: usize, bottom: usize, demand: u64| {
            let mut edges = Vec::new();
            for i in (bottom + 1)..=top {
                edges.push(path[i - 1]);
                for &c in instance.children(path[i]) {
                    if c != path[i - 1] && !has_leaf[c] {
                        edges.push(c);
                        collect_subtree_edges(instance, c, &mut edges);
                    }
                }
            }
            push_component(ComponentKind::Internal, path[top], Some(path[bottom]), edges, demand);
        };
        while cum[m] - cum[x] >= gamma_k {
            while cum[j] - cum[x] < gamma_k {
                j += 1;
            }
            emit(j, x, cum[j] - cum[x]);
            x = j;
            j += 1;
        }
        if x != m {
            emit(m, x, cum[m] - cum[x]);
        }
    }

    Ok(finish(instance, components, key_vertices, gamma_k))
}

fn finish(
    instance: &Instance,
    mut components: Vec<Component>,
    key_vertices: Vec<VertexId>,
    gamma_k: u64,
) -> Decomposition {
    // Deterministic order: by root preorder position, then by first edge.
    let mut pos = vec![0usize; instance.n()];
    for (i, &v) in instance.preorder().iter().enumerate() {
        pos[v] = i;
    }
    components.sort_by_key(|c| (pos[c.root], c.edges.first().map(|&e| pos[e])));
    let mut edge_component = vec![None; instance.n()];
    for (id, c) in components.iter_mut().enumerate() {
        c.id = id;
        for &e in &c.edges {
            edge_component[e] = Some(id);
        }
    }
    let assignment = if components.len() > 1 { big_component_map(instance, &components, &pos) } else { Vec::new() };
    Decomposition { gamma_k, components, edge_component, key_vertices, assignment }
}

/// Big components map to themselves. A small component hanging on the left
/// child of its root maps to the rightmost leaf component below it, one on
/// the right child to the leftmost one.
fn big_component_map(instance: &Instance, components: &[Component], pos: &[usize]) -> Vec<usize> {
    let leaves: Vec<&Component> = {
        let mut l: Vec<&Component> = components.iter().filter(|c| c.is_leaf()).collect();
        l.sort_by_key(|c| pos[c.root]);
        l
    };
    components
        .iter()
        .map(|c| {
            if c.big {
                return c.id;
            }
            let Some(path_child) =
                c.edges.iter().copied().find(|&e| {
                    instance.parent(e) == Some(c.root) && c.exit.is_some_and(|x| instance.is_ancestor(e, x))
                })
            else {
                return c.id;
            };
            let under: Vec<&&Component> = leaves.iter().filter(|l| instance.is_ancestor(path_child, l.root)).collect();
            let is_left = instance.children(c.root).first() == Some(&path_child);
            let pick = if is_left { under.last() } else { under.first() };
            pick.map_or(c.id, |l| l.id)
        })
        .collect()
}

/// Sum of root distances over all components, in units.
pub fn sum_component_root_distances(instance: &Instance, decomposition: &Decomposition) -> u64 {
    decomposition.components.iter().map(|c| instance.dist(c.root)).sum()
}

/// `(Σ_u (children(u) − 1), number of leaves)` over internal vertices.
pub fn branching_excess(instance: &Instance) -> (u64, u64) {
    let mut excess = 0;
    let mut leaves = 0;
    for v in 0..instance.n() {
        let c = instance.children(v).len() as u64;
        if c == 0 {
            leaves += 1;
        } else {
            excess += c - 1;
        }
    }
    (excess, leaves)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecompositionCheck {
    Partition,
    Connectivity,
    Interaction,
    DemandBound,
    LeafDemand,
    PreimageMap,
    CountBound,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecompositionIssue {
    pub check: DecompositionCheck,
    pub component: Option<usize>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecompositionReport {
    pub ok: bool,
    pub issues: Vec<DecompositionIssue>,
}

impl DecompositionReport {
    pub fn has(&self, check: DecompositionCheck) -> bool {
        self.issues.iter().any(|i| i.check == check)
    }
}

/// Verifies the structural properties of a decomposition from scratch.
pub fn check_decomposition(instance: &Instance, decomposition: &Decomposition, gamma_k: u64) -> DecompositionReport {
    let mut issues = Vec::new();
    let mut issue = |check, component: Option<usize>, detail: String| {
        issues.push(DecompositionIssue { check, component, detail });
    };
    let n = instance.n();
    let comps = &decomposition.components;

    let mut owner: Vec<Option<usize>> = vec![None; n];
    for (ci, c) in comps.iter().enumerate() {
        for &e in &c.edges {
            if e >= n || e == instance.root() {
                issue(DecompositionCheck::Partition, Some(ci), format!("{e} is not an edge"));
                continue;
            }
            if let Some(prev) = owner[e] {
                issue(DecompositionCheck::Partition, Some(ci), format!("edge above {e} also in component {prev}"));
            }
            owner[e] = Some(ci);
        }
    }
    for (v, o) in owner.iter().enumerate() {
        if v != instance.root() && o.is_none() {
            issue(DecompositionCheck::Partition, None, format!("edge above {v} is in no component"));
        }
    }

    // vertices touched by each component, and per-vertex component sets
    let mut touching: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut demand = vec![0u64; comps.len()];
    for (ci, c) in comps.iter().enumerate() {
        if c.edges.is_empty() {
            issue(DecompositionCheck::Connectivity, Some(ci), "component has no edges".into());
            continue;
        }
        let mut verts: Vec<VertexId> = Vec::with_capacity(c.edges.len() + 1);
        for &e in &c.edges {
            if e >= n || e == instance.root() {
                continue;
            }
            verts.push(e);
            verts.push(instance.parent(e).unwrap());
            demand[ci] += instance.demand(e) as u64;
        }
        verts.sort_unstable();
        verts.dedup();
        let top = *verts.iter().min_by_key(|&&v| (instance.depth(v), v)).unwrap();
        if top != c.root {
            issue(
                DecompositionCheck::Connectivity,
                Some(ci),
                format!("closest vertex {top} is not the root {}", c.root),
            );
        }
        for &e in &c.edges {
            if e >= n || e == instance.root() {
                continue;
            }
            let p = instance.parent(e).unwrap();
            if p != top && owner[p] != Some(ci) {
                issue(DecompositionCheck::Connectivity, Some(ci), format!("edge above {e} is disconnected"));
            }
        }
        for &v in &verts {
            touching[v].push(ci);
        }
        match (c.kind, c.exit) {
            (ComponentKind::Leaf, _) => {
                let mut all = Vec::new();
                collect_subtree_edges(instance, c.root, &mut all);
                all.sort_unstable();
                if all != c.edges {
                    issue(
                        DecompositionCheck::Interaction,
                        Some(ci),
                        "leaf component misses descendants of its root".into(),
                    );
                }
            }
            (ComponentKind::Internal, None) => {
                issue(DecompositionCheck::Interaction, Some(ci), "internal component without exit".into());
            }
            (ComponentKind::Internal, Some(x)) => {
                if verts.binary_search(&x).is_err() {
                    issue(DecompositionCheck::Interaction, Some(ci), format!("exit {x} not in component"));
                }
            }
        }
    }
    for (v, cs) in touching.iter().enumerate() {
        if cs.len() < 2 {
            continue;
        }
        for &ci in cs {
            let c = &comps[ci];
            if v != c.root && c.exit != Some(v) {
                issue(DecompositionCheck::Interaction, Some(ci), format!("shares vertex {v} outside root/exit"));
            }
        }
    }

    for (ci, c) in comps.iter().enumerate() {
        if demand[ci] > 2 * gamma_k {
            issue(
                DecompositionCheck::DemandBound,
                Some(ci),
                format!("demand {} exceeds 2Γk = {}", demand[ci], 2 * gamma_k),
            );
        }
        if c.is_leaf() && comps.len() > 1 && demand[ci] < gamma_k {
            issue(
                DecompositionCheck::LeafDemand,
                Some(ci),
                format!("leaf component demand {} below Γk = {gamma_k}", demand[ci]),
            );
        }
    }

    if comps.len() > 1 {
        let map = &decomposition.assignment;
        if map.len() != comps.len() {
            issue(DecompositionCheck::PreimageMap, None, "assignment does not cover all components".into());
        } else {
            let mut preimages = vec![0usize; comps.len()];
            for (ci, &img) in map.iter().enumerate() {
                if img >= comps.len() {
                    issue(DecompositionCheck::PreimageMap, Some(ci), format!("image {img} out of range"));
                    continue;
                }
                preimages[img] += 1;
                if demand[img] < gamma_k {
                    issue(DecompositionCheck::PreimageMap, Some(ci), format!("image {img} is not big"));
                }
                if !instance.is_ancestor(comps[ci].root, comps[img].root) {
                    issue(DecompositionCheck::PreimageMap, Some(ci), format!("image {img} is not a descendant"));
                }
            }
            for (img, &count) in preimages.iter().enumerate() {
                if count > 3 {
                    issue(DecompositionCheck::PreimageMap, Some(img), format!("{count} preimages"));
                }
            }
        }
        // |C| ≤ (3/Γ)·demand with Γ = gamma_k / k
        let lhs = comps.len() as u128 * gamma_k as u128;
        let rhs = 3 * instance.total_demand() as u128 * instance.capacity() as u128;
        if lhs > rhs {
            issue(DecompositionCheck::CountBound, None, format!("{} components exceed 3·demand/Γ", comps.len()));
        }
    }

    DecompositionReport { ok: issues.is_empty(), issues }
}
