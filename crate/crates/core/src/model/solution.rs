use serde::Serialize;

use super::instance::{Instance, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Claim {
    pub v: VertexId,
    pub units: u32,
}

/// A depot-rooted tour, represented by the demand it claims. Its cost is the
/// canonical closed walk over the minimal subtree spanning the depot and the
/// claimed terminals.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Tour {
    claims: Vec<Claim>,
}

impl Tour {
    /// Claims are sorted by vertex and repeated vertices are merged.
    pub fn new(mut claims: Vec<Claim>) -> Self {
        claims.sort();
        let mut merged: Vec<Claim> = Vec::with_capacity(claims.len());
        for c in claims {
            match merged.last_mut() {
                Some(last) if last.v == c.v => last.units += c.units,
                _ => merged.push(c),
            }
        }
        Self { claims: merged }
    }

    /// One unit at each listed terminal.
    pub fn from_terminals<I: IntoIterator<Item = VertexId>>(terminals: I) -> Self {
        Self::new(terminals.into_iter().map(|v| Claim { v, units: 1 }).collect())
    }

    pub fn claims(&self) -> &[Claim] {
        &self.claims
    }

    pub fn units(&self) -> u64 {
        self.claims.iter().map(|c| c.units as u64).sum()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.claims.iter().map(|c| c.v)
    }

    pub fn is_empty(&self) -> bool {
        self.claims.is_empty()
    }
}

/// Twice the weight of the union of root paths of the given vertices.
/// Vertices outside the tree are ignored.
pub fn subtree_cost<I: IntoIterator<Item = VertexId>>(instance: &Instance, vertices: I) -> u64 {
    let mut marked = vec![false; instance.n()];
    let mut total = 0u64;
    for v in vertices {
        if v >= instance.n() {
            continue;
        }
        let mut u = v;
        while !marked[u] && u != instance.root() {
            marked[u] = true;
            total += instance.weight(u);
            u = instance.parent(u).expect("non-root vertex has a parent");
        }
    }
    2 * total
}

/// Canonical cost of a tour; 0 for an empty tour.
pub fn tour_cost(instance: &Instance, tour: &Tour) -> u64 {
    subtree_cost(instance, tour.vertices())
}

/// A set of tours with its cached total cost (in units).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    tours: Vec<Tour>,
    cost: u64,
}

impl Solution {
    /// Empty tours are dropped and the rest sorted, so equal tour sets give
    /// equal solutions.
    pub fn new(instance: &Instance, tours: Vec<Tour>) -> Self {
        let mut tours: Vec<Tour> = tours.into_iter().filter(|t| !t.is_empty()).collect();
        tours.sort();
        let cost = tours.iter().map(|t| tour_cost(instance, t)).sum();
        Self { tours, cost }
    }

    pub fn empty() -> Self {
        Self { tours: Vec::new(), cost: 0 }
    }

    pub fn tours(&self) -> &[Tour] {
        &self.tours
    }

    pub fn into_tours(self) -> Vec<Tour> {
        self.tours
    }

    pub fn cost(&self) -> u64 {
        self.cost
    }

    /// Union of two solutions over the same tree.
    pub fn union(instance: &Instance, parts: impl IntoIterator<Item = Solution>) -> Self {
        let tours = parts.into_iter().flat_map(|s| s.tours).collect();
        Self::new(instance, tours)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Capacity,
    Coverage,
    UnknownVertex,
    ZeroUnits,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Offending tour, if the violation belongs to one.
    pub tour: Option<usize>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
    /// Recomputed total cost in units.
    pub total_cost: u64,
}

/// Checks capacity, coverage and claim sanity, and recomputes the cost.
pub fn verify(instance: &Instance, solution: &Solution) -> VerifyReport {
    let mut violations = Vec::new();
    let mut covered = vec![0u64; instance.n()];
    let mut total_cost = 0;
    let k = instance.capacity() as u64;
    for (i, tour) in solution.tours().iter().enumerate() {
        for c in tour.claims() {
            if c.v >= instance.n() || !instance.is_terminal(c.v) {
                violations.push(Violation {
                    kind: ViolationKind::UnknownVertex,
                    tour: Some(i),
                    detail: format!("vertex {} is not a terminal", c.v),
                });
                continue;
            }
            if c.units == 0 {
                violations.push(Violation {
                    kind: ViolationKind::ZeroUnits,
                    tour: Some(i),
                    detail: format!("claim on {} covers no demand", c.v),
                });
            }
            covered[c.v] += c.units as u64;
        }
        if tour.units() > k {
            violations.push(Violation {
                kind: ViolationKind::Capacity,
                tour: Some(i),
                detail: format!("tour carries {} units, capacity {}", tour.units(), k),
            });
        }
        total_cost += tour_cost(instance, tour);
    }
    for (v, &c) in covered.iter().enumerate() {
        let d = instance.demand(v) as u64;
        if c != d && instance.is_terminal(v) {
            violations.push(Violation {
                kind: ViolationKind::Coverage,
                tour: None,
                detail: format!("terminal {v} covered {c} of {d} units"),
            });
        }
    }
    VerifyReport { feasible: violations.is_empty(), violations, total_cost }
}
