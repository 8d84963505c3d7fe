use crate::error::{Error, Result};

pub type VertexId = usize;

/// A rooted, edge-weighted tree with terminal demands and a tour capacity.
///
/// Edge weights are stored as integer numerators over a common denominator
/// `scale`, so every distance and cost is an exact integer in "units".
/// A demand of zero marks a non-terminal vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    root: VertexId,
    parent: Vec<Option<VertexId>>,
    weight: Vec<u64>,
    demand: Vec<u32>,
    capacity: u32,
    scale: u64,
    children: Vec<Vec<VertexId>>,
    preorder: Vec<VertexId>,
    dist: Vec<u64>,
    depth: Vec<u32>,
}

impl Instance {
    /// Builds and validates an instance. `weight[v]` is the weight of the edge
    /// from `v` to its parent (ignored for the root).
    pub fn new(
        root: VertexId,
        parent: Vec<Option<VertexId>>,
        weight: Vec<u64>,
        demand: Vec<u32>,
        capacity: u32,
        scale: u64,
    ) -> Result<Self> {
        let n = parent.len();
        if n == 0 {
            return Err(Error::Validation("tree has no vertices".into()));
        }
        if weight.len() != n || demand.len() != n {
            return Err(Error::Validation("per-vertex arrays differ in length".into()));
        }
        if root >= n {
            return Err(Error::Validation(format!("root {root} out of range")));
        }
        if capacity == 0 {
            return Err(Error::Validation("capacity must be at least 1".into()));
        }
        if scale == 0 {
            return Err(Error::Validation("weight scale must be positive".into()));
        }
        if parent[root].is_some() {
            return Err(Error::Validation("root must not have a parent".into()));
        }
        let mut children = vec![Vec::new(); n];
        for (v, p) in parent.iter().enumerate() {
            match p {
                None if v != root => {
                    return Err(Error::Validation(format!("vertex {v} has no parent")));
                }
                Some(p) if *p >= n => {
                    return Err(Error::Validation(format!("parent {p} of vertex {v} out of range")));
                }
                Some(p) if *p == v => {
                    return Err(Error::Validation(format!("vertex {v} is its own parent")));
                }
                Some(p) => children[*p].push(v),
                None => {}
            }
        }
        let mut preorder = Vec::with_capacity(n);
        let mut dist = vec![0u64; n];
        let mut depth = vec![0u32; n];
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            preorder.push(v);
            for &c in children[v].iter().rev() {
                dist[c] =
                    dist[v].checked_add(weight[c]).ok_or_else(|| Error::Validation("distance overflow".into()))?;
                depth[c] = depth[v] + 1;
                stack.push(c);
            }
        }
        if preorder.len() != n {
            return Err(Error::Validation(
                "parent pointers do not form a single tree (cycle or unreachable vertex)".into(),
            ));
        }
        let mut weight = weight;
        weight[root] = 0;
        Ok(Self { root, parent, weight, demand, capacity, scale, children, preorder, dist, depth })
    }

    /// Convenience constructor from an edge list `(child, parent, weight)` and
    /// terminal list `(vertex, demand)`.
    pub fn from_edges(
        n: usize,
        root: VertexId,
        edges: &[(VertexId, VertexId, u64)],
        terminals: &[(VertexId, u32)],
        capacity: u32,
        scale: u64,
    ) -> Result<Self> {
        let mut parent = vec![None; n];
        let mut weight = vec![0; n];
        let mut demand = vec![0; n];
        for &(c, p, w) in edges {
            if c >= n {
                return Err(Error::Validation(format!("edge child {c} out of range")));
            }
            if parent[c].is_some() {
                return Err(Error::Validation(format!("vertex {c} has two parent edges")));
            }
            parent[c] = Some(p);
            weight[c] = w;
        }
        for &(v, d) in terminals {
            if v >= n {
                return Err(Error::Validation(format!("terminal {v} out of range")));
            }
            if d == 0 {
                return Err(Error::Validation(format!("terminal {v} has zero demand")));
            }
            if demand[v] != 0 {
                return Err(Error::Validation(format!("terminal {v} listed twice")));
            }
            demand[v] = d;
        }
        Self::new(root, parent, weight, demand, capacity, scale)
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent[v]
    }

    /// Weight of the edge between `v` and its parent, in units.
    pub fn weight(&self, v: VertexId) -> u64 {
        self.weight[v]
    }

    pub fn demand(&self, v: VertexId) -> u32 {
        self.demand[v]
    }

    pub fn is_terminal(&self, v: VertexId) -> bool {
        self.demand[v] > 0
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    /// Denominator shared by all weights.
    pub fn scale(&self) -> u64 {
        self.scale
    }

    /// Children sorted by vertex id.
    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.children[v]
    }

    pub fn is_leaf(&self, v: VertexId) -> bool {
        self.children[v].is_empty()
    }

    /// Depth-first preorder from the root, children visited by increasing id.
    pub fn preorder(&self) -> &[VertexId] {
        &self.preorder
    }

    /// Distance from the depot, in units.
    pub fn dist(&self, v: VertexId) -> u64 {
        self.dist[v]
    }

    pub fn depth(&self, v: VertexId) -> u32 {
        self.depth[v]
    }

    /// Terminals in increasing vertex order.
    pub fn terminals(&self) -> Vec<VertexId> {
        (0..self.n()).filter(|&v| self.is_terminal(v)).collect()
    }

    pub fn total_demand(&self) -> u64 {
        self.demand.iter().map(|&d| d as u64).sum()
    }

    pub fn is_unit_demand(&self) -> bool {
        self.demand.iter().all(|&d| d <= 1)
    }

    /// Is `a` an ancestor of `b` (or equal)?
    pub fn is_ancestor(&self, a: VertexId, b: VertexId) -> bool {
        let mut v = b;
        loop {
            if v == a {
                return true;
            }
            match self.parent[v] {
                Some(p) if self.depth[p] >= self.depth[a] => v = p,
                _ => return false,
            }
        }
    }

    /// Same tree and capacity with the terminal set replaced.
    pub fn with_terminals(&self, terminals: &[(VertexId, u32)]) -> Result<Self> {
        let mut demand = vec![0; self.n()];
        for &(v, d) in terminals {
            if v >= self.n() || d == 0 {
                return Err(Error::Validation(format!("bad terminal ({v}, {d})")));
            }
            demand[v] = d;
        }
        let mut out = self.clone();
        out.demand = demand;
        Ok(out)
    }

    pub fn with_capacity(&self, capacity: u32) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Validation("capacity must be at least 1".into()));
        }
        let mut out = self.clone();
        out.capacity = capacity;
        Ok(out)
    }

    /// Formats a quantity measured in units as a reduced rational string.
    pub fn format_units(&self, units: u128) -> String {
        format_rational(units, self.scale as u128)
    }
}

/// `num/den` reduced, printed as `"p"` or `"p/q"`.
pub fn format_rational(num: u128, den: u128) -> String {
    let g = num_integer::gcd(num, den).max(1);
    let (p, q) = (num / g, den / g);
    if q == 1 {
        p.to_string()
    } else {
        format!("{p}/{q}")
    }
}

/// Root distances of an instance together with the terminal extremes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distances {
    pub dist: Vec<u64>,
    pub d_min: u64,
    pub d_max: u64,
}

pub fn distances(instance: &Instance) -> Result<Distances> {
    let terminals = instance.terminals();
    if terminals.is_empty() {
        return Err(Error::EmptyInstance);
    }
    let dist: Vec<u64> = (0..instance.n()).map(|v| instance.dist(v)).collect();
    let d_min = terminals.iter().map(|&v| dist[v]).min().unwrap_or(0);
    let d_max = terminals.iter().map(|&v| dist[v]).max().unwrap_or(0);
    Ok(Distances { dist, d_min, d_max })
}
