//! Candidate value sets `X` for rounding at critical vertices.

use std::collections::BTreeMap;

use num_rational::Ratio;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::model::{Solution, VertexId};
use crate::transforms::HatTree;

fn binomial(n: u64, r: u64) -> u128 {
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Every `min(size, k−L+1)`-subset of `[L, k]` in lexicographic order.
pub fn exhaustive_x_sets(l: u32, k: u32, size: usize, budget: u64) -> Result<Vec<Vec<u32>>> {
    let pool: Vec<u32> = (l..=k).collect();
    let r = size.min(pool.len());
    let count = binomial(pool.len() as u64, r as u64);
    if count > budget as u128 {
        return Err(Error::Budget(format!(
            "{count} candidate X sets (C({}, {r})) exceed the budget of {budget}; lower x_set_size, raise L, \
             pick another x_strategy or raise x_candidates",
            pool.len()
        )));
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        out.push(idx.iter().map(|&i| pool[i]).collect());
        let Some(i) = (0..r).rev().find(|&i| idx[i] != i + pool.len() - r) else {
            break;
        };
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
    Ok(out)
}

/// `⌈L·(1+ε)^t⌉` inside `[L, k]`, with `k` always present. Keeps the first
/// `size − 1` grid values when there are too many.
pub fn geometric_grid(l: u32, k: u32, epsilon: Ratio<u64>, size: usize) -> Vec<u32> {
    let factor = 1.0 + epsilon.to_f64().unwrap_or(1.0);
    let mut grid = Vec::new();
    let mut x = l as f64;
    loop {
        let v = x.ceil() as u32;
        if v >= k {
            break;
        }
        if grid.last() != Some(&v) {
            grid.push(v);
        }
        x *= factor;
    }
    grid.truncate(size.saturating_sub(1));
    grid.push(k);
    grid
}

/// Per critical vertex, the demands that tours of `warm` (a solution on the
/// hat tree) deliver into each attached component, clamped to `[L, k]`: the
/// `size − 1` most frequent ones (smaller first on ties), plus `k`.
pub fn heuristic_x_sets(hat: &HatTree, warm: &Solution, l: u32, size: usize) -> BTreeMap<VertexId, Vec<u32>> {
    let inst = &hat.instance;
    let k = inst.capacity();
    let mut tour_of = vec![usize::MAX; inst.n()];
    for (i, t) in warm.tours().iter().enumerate() {
        for v in t.vertices() {
            tour_of[v] = i;
        }
    }
    let mut freq: BTreeMap<VertexId, BTreeMap<u32, u64>> = BTreeMap::new();
    for c in &hat.components {
        let mut per_tour: BTreeMap<usize, u32> = BTreeMap::new();
        let mut stack = vec![c.root];
        while let Some(v) = stack.pop() {
            if inst.is_terminal(v) && tour_of[v] != usize::MAX {
                *per_tour.entry(tour_of[v]).or_default() += inst.demand(v);
            }
            stack.extend(inst.children(v).iter().copied());
        }
        let f = freq.entry(c.critical).or_default();
        for s in per_tour.into_values() {
            *f.entry(s.clamp(l, k)).or_default() += 1;
        }
    }
    freq.into_iter()
        .map(|(z, f)| {
            let mut ranked: Vec<(u32, u64)> = f.into_iter().filter(|&(v, _)| v != k).collect();
            ranked.sort_by_key(|&(v, n)| (std::cmp::Reverse(n), v));
            let mut x: Vec<u32> = ranked.into_iter().take(size.saturating_sub(1)).map(|(v, _)| v).collect();
            x.push(k);
            x.sort_unstable();
            (z, x)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_in_order() {
        let got = exhaustive_x_sets(2, 5, 2, 100).unwrap();
        assert_eq!(got, vec![vec![2, 3], vec![2, 4], vec![2, 5], vec![3, 4], vec![3, 5], vec![4, 5]]);
        assert_eq!(exhaustive_x_sets(1, 3, 9, 100).unwrap(), vec![vec![1, 2, 3]]);
        assert!(matches!(exhaustive_x_sets(1, 40, 20, 1000), Err(Error::Budget(_))));
    }

    #[test]
    fn grid_values() {
        assert_eq!(geometric_grid(1, 10, Ratio::new(1, 1), 10), vec![1, 2, 4, 8, 10]);
        assert_eq!(geometric_grid(3, 10, Ratio::new(1, 2), 10), vec![3, 5, 7, 10]);
        assert_eq!(geometric_grid(1, 10, Ratio::new(1, 1), 3), vec![1, 2, 10]);
    }
}
