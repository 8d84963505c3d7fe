//! Splittable demands: each terminal of demand `d ≥ 2` becomes the root of a
//! complete binary tree with `d` unit leaves on zero-weight edges.

use crate::budget::Budgets;
use crate::error::{Error, Result};
use crate::model::{verify, Claim, Instance, Solution, Tour, VertexMap};

/// Unit-demand expansion. Heap layout per terminal `v`: node 0 is `v`, node
/// `i` has children `2i+1` and `2i+2`, leaves are nodes `d−1 ..= 2d−2`; new
/// vertices get consecutive ids after the original ones.
pub fn expand(instance: &Instance, budgets: &Budgets) -> Result<(Instance, VertexMap)> {
    let n = instance.n();
    let extra: u64 = (0..n).map(|v| instance.demand(v) as u64).filter(|&d| d >= 2).map(|d| 2 * d - 2).sum();
    if n as u64 + extra > budgets.expansion_vertices {
        return Err(Error::Budget(format!(
            "expansion needs {} vertices, budget is {}; peel full tours first (--peel) or raise expansion_vertices",
            n as u64 + extra,
            budgets.expansion_vertices
        )));
    }
    let mut parent: Vec<Option<usize>> = (0..n).map(|v| instance.parent(v)).collect();
    let mut weight: Vec<u64> = (0..n).map(|v| instance.weight(v)).collect();
    let mut demand: Vec<u32> = (0..n).map(|v| instance.demand(v)).collect();
    let mut map = VertexMap::identity(n);
    for v in 0..n {
        let d = instance.demand(v) as usize;
        if d < 2 {
            continue;
        }
        demand[v] = 0;
        let base = parent.len();
        // heap node i >= 1 lives at id base + i - 1
        let id = |i: usize| if i == 0 { v } else { base + i - 1 };
        for i in 1..2 * d - 1 {
            parent.push(Some(id((i - 1) / 2)));
            weight.push(0);
            demand.push(if i >= d - 1 { 1 } else { 0 });
        }
        for i in d - 1..2 * d - 1 {
            map.link(v, id(i));
        }
    }
    let out = Instance::new(instance.root(), parent, weight, demand, instance.capacity(), instance.scale())?;
    Ok((out, map))
}

/// Merges claims on expansion leaves back into `(terminal, units)` claims.
pub fn contract_solution(original: &Instance, map: &VertexMap, solution: &Solution) -> Result<Solution> {
    let back = map.pull_back(original, solution)?;
    let report = verify(original, &back);
    if !report.feasible {
        return Err(Error::Infeasible(format!("contracted solution: {:?}", report.violations.first())));
    }
    Ok(back)
}

/// Dispatches `⌊d/k⌋` full tours from every terminal with `d > threshold·k`,
/// leaving `d mod k`. `None` disables peeling.
pub fn peel_full_tours(instance: &Instance, threshold: Option<u64>) -> Result<(Instance, Vec<Tour>)> {
    let Some(t) = threshold else {
        return Ok((instance.clone(), Vec::new()));
    };
    let k = instance.capacity();
    let mut prepaid = Vec::new();
    let mut rest = Vec::new();
    for v in instance.terminals() {
        let d = instance.demand(v);
        if d as u64 > t.saturating_mul(k as u64) {
            prepaid.extend((0..d / k).map(|_| Tour::new(vec![Claim { v, units: k }])));
            if !d.is_multiple_of(k) {
                rest.push((v, d % k));
            }
        } else {
            rest.push((v, d));
        }
    }
    Ok((instance.with_terminals(&rest)?, prepaid))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_copies() {
        let inst = Instance::from_edges(2, 0, &[(1, 0, 2)], &[(1, 3)], 2, 1).unwrap();
        let (exp, map) = expand(&inst, &Budgets::default()).unwrap();
        assert_eq!(exp.n(), 6);
        assert_eq!(exp.terminals(), vec![3, 4, 5]);
        assert_eq!(map.forward(1), &[1, 3, 4, 5]);
        assert!(exp.terminals().iter().all(|&v| exp.dist(v) == 2));
        let sol = Solution::new(&exp, vec![Tour::from_terminals([3, 4]), Tour::from_terminals([5])]);
        let back = contract_solution(&inst, &map, &sol).unwrap();
        assert_eq!(back.tours()[0].claims(), &[Claim { v: 1, units: 1 }]);
        assert_eq!(back.tours()[1].claims(), &[Claim { v: 1, units: 2 }]);
        assert_eq!(back.cost(), sol.cost());
    }

    #[test]
    fn unit_demand_is_identity() {
        let inst = Instance::from_edges(3, 0, &[(1, 0, 1), (2, 0, 1)], &[(1, 1), (2, 1)], 2, 1).unwrap();
        let (exp, map) = expand(&inst, &Budgets::default()).unwrap();
        assert_eq!(exp, inst);
        assert_eq!(map, VertexMap::identity(3));
    }

    #[test]
    fn peel_arithmetic() {
        let inst = Instance::from_edges(2, 0, &[(1, 0, 3)], &[(1, 5)], 2, 1).unwrap();
        let (rest, tours) = peel_full_tours(&inst, Some(1)).unwrap();
        assert_eq!(tours.len(), 2);
        assert_eq!(rest.demand(1), 1);
        let (same, none) = peel_full_tours(&inst, None).unwrap();
        assert_eq!((same, none.len()), (inst.clone(), 0));
        assert!(expand(&inst, &Budgets { expansion_vertices: 5, ..Budgets::default() }).is_err());
    }
}
