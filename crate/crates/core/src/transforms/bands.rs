//! Distance bands. Terminal `v` lies in band `i` when
//! `b^i ≤ dist(v) < b^(i+1)` with `b = 1/ε`. For an offset `i0`, the bands
//! `i0 + j·b` become the sets `Y_j` and the bands strictly between two of
//! them are merged into `Z_j`; each resulting set has bounded distances.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Instance, Solution, Tour, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "kind", content = "j", rename_all = "snake_case")]
pub enum BandTag {
    Y(i64),
    Z(i64),
}

#[derive(Clone, Debug)]
pub struct BandSet {
    pub tag: BandTag,
    pub terminals: Vec<VertexId>,
    /// The full tree with the terminal set restricted to `terminals`.
    pub instance: Instance,
}

#[derive(Clone, Debug)]
pub struct DistanceBands {
    pub inv_eps: u32,
    pub i0: u32,
    /// Terminals at distance 0; each is served by its own free tour.
    pub at_depot: Vec<VertexId>,
    pub sets: Vec<BandSet>,
}

fn check_base(inv_eps: u32) -> Result<()> {
    if inv_eps < 2 {
        return Err(Error::Validation(format!("inv_eps must be at least 2, got {inv_eps}")));
    }
    Ok(())
}

/// Band index of a positive distance `units / scale`.
pub fn band_index(units: u64, scale: u64, base: u32) -> i64 {
    assert!(units > 0, "distance 0 has no band");
    let (units, scale, base) = (units as u128, scale as u128, base as u128);
    let mut i = 0i64;
    if units >= scale {
        // largest i with base^i * scale <= units
        let mut p = scale;
        while p * base <= units {
            p *= base;
            i += 1;
        }
    } else {
        // smallest j >= 1 with units * base^j >= scale; band is -j
        let mut p = units;
        while p < scale {
            p *= base;
            i -= 1;
        }
    }
    i
}

pub fn band_tag(band: i64, inv_eps: u32, i0: u32) -> BandTag {
    let t = band - i0 as i64;
    let inv = inv_eps as i64;
    let j = t.div_euclid(inv);
    if t.rem_euclid(inv) == 0 {
        BandTag::Y(j)
    } else {
        BandTag::Z(j)
    }
}

pub fn split_by_distance(instance: &Instance, inv_eps: u32, i0: u32) -> Result<DistanceBands> {
    check_base(inv_eps)?;
    if i0 >= inv_eps {
        return Err(Error::Validation(format!("offset {i0} must be below {inv_eps}")));
    }
    let mut at_depot = Vec::new();
    let mut groups: std::collections::BTreeMap<BandTag, Vec<VertexId>> = Default::default();
    for v in instance.terminals() {
        let d = instance.dist(v);
        if d == 0 {
            at_depot.push(v);
            continue;
        }
        let tag = band_tag(band_index(d, instance.scale(), inv_eps), inv_eps, i0);
        groups.entry(tag).or_default().push(v);
    }
    let sets = groups
        .into_iter()
        .map(|(tag, terminals)| {
            let with: Vec<_> = terminals.iter().map(|&v| (v, instance.demand(v))).collect();
            Ok(BandSet { tag, instance: instance.with_terminals(&with)?, terminals })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DistanceBands { inv_eps, i0, at_depot, sets })
}

/// `D_max / D_min < b^(b-1)` over the given terminals.
pub fn has_bounded_distances(instance: &Instance, terminals: &[VertexId], inv_eps: u32) -> bool {
    let dists = terminals.iter().map(|&v| instance.dist(v) as u128);
    let (Some(lo), Some(hi)) = (dists.clone().min(), dists.max()) else {
        return true;
    };
    let Some(ratio) = (inv_eps as u128).checked_pow(inv_eps - 1) else {
        return true;
    };
    lo.checked_mul(ratio).is_none_or(|bound| hi < bound)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", content = "seed", rename_all = "snake_case")]
pub enum OffsetMode {
    /// Try every offset and keep the cheapest (ties to the smallest offset).
    Best,
    /// One offset drawn from a seeded generator.
    Random(u64),
}

#[derive(Clone, Debug)]
pub struct BandedSolution {
    pub solution: Solution,
    pub i0: u32,
    /// Cost per tried offset, in units.
    pub costs: Vec<(u32, u64)>,
}

fn solve_offset<F>(instance: &Instance, inv_eps: u32, i0: u32, sub_solver: &F) -> Result<Solution>
where
    F: Fn(&Instance) -> Result<Solution> + Sync,
{
    let bands = split_by_distance(instance, inv_eps, i0)?;
    let mut parts: Vec<Solution> = bands.sets.par_iter().map(|set| sub_solver(&set.instance)).collect::<Result<_>>()?;
    let free: Vec<Tour> =
        bands.at_depot.iter().flat_map(|&v| (0..instance.demand(v)).map(move |_| Tour::from_terminals([v]))).collect();
    parts.push(Solution::new(instance, free));
    Ok(Solution::union(instance, parts))
}

/// Solves every band set independently and unions the results.
pub fn solve_banded<F>(instance: &Instance, inv_eps: u32, mode: OffsetMode, sub_solver: F) -> Result<BandedSolution>
where
    F: Fn(&Instance) -> Result<Solution> + Sync,
{
    check_base(inv_eps)?;
    let offsets: Vec<u32> = match mode {
        OffsetMode::Best => (0..inv_eps).collect(),
        OffsetMode::Random(seed) => vec![ChaCha8Rng::seed_from_u64(seed).gen_range(0..inv_eps)],
    };
    let mut best: Option<(u32, Solution)> = None;
    let mut costs = Vec::with_capacity(offsets.len());
    for i0 in offsets {
        let sol = solve_offset(instance, inv_eps, i0, &sub_solver)?;
        costs.push((i0, sol.cost()));
        let better = match &best {
            None => true,
            Some((_, b)) => sol.cost().cmp(&b.cost()) == Ordering::Less,
        };
        if better {
            best = Some((i0, sol));
        }
    }
    let (i0, solution) = best.expect("at least one offset");
    Ok(BandedSolution { solution, i0, costs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star_at(dists: &[u64], scale: u64) -> Instance {
        let edges: Vec<_> = dists.iter().enumerate().map(|(i, &w)| (i + 1, 0, w)).collect();
        let terms: Vec<_> = (1..=dists.len()).map(|v| (v, 1)).collect();
        Instance::from_edges(dists.len() + 1, 0, &edges, &terms, 2, scale).unwrap()
    }

    #[test]
    fn band_indices() {
        assert_eq!(band_index(1, 1, 2), 0);
        assert_eq!(band_index(2, 1, 2), 1);
        assert_eq!(band_index(3, 1, 2), 1);
        assert_eq!(band_index(5, 1, 2), 2);
        // 1/4 with base 2 -> band -2; 1/3 -> [1/4, 1/2) -> -2
        assert_eq!(band_index(1, 4, 2), -2);
        assert_eq!(band_index(1, 3, 2), -2);
        assert_eq!(band_index(3, 4, 2), -1);
    }

    #[test]
    fn hand_split() {
        // dists 1, 2, 5 with base 2 and offset 0: bands 0, 1, 2 -> Y_0, Z_0, Y_1.
        let inst = star_at(&[1, 2, 5], 1);
        let bands = split_by_distance(&inst, 2, 0).unwrap();
        let got: Vec<_> = bands.sets.iter().map(|s| (s.tag, s.terminals.clone())).collect();
        assert_eq!(got, vec![(BandTag::Y(0), vec![1]), (BandTag::Y(1), vec![3]), (BandTag::Z(0), vec![2])]);
        // offset 1: t = -1, 0, 1 -> Z_-1, Y_0, Z_0
        let bands = split_by_distance(&inst, 2, 1).unwrap();
        let got: Vec<_> = bands.sets.iter().map(|s| (s.tag, s.terminals.clone())).collect();
        assert_eq!(got, vec![(BandTag::Y(0), vec![2]), (BandTag::Z(-1), vec![1]), (BandTag::Z(0), vec![3])]);
    }

    #[test]
    fn depot_terminals_are_free() {
        let inst = star_at(&[0, 3], 1);
        let bands = split_by_distance(&inst, 3, 0).unwrap();
        assert_eq!(bands.at_depot, vec![1]);
        let solver = |i: &Instance| Ok(Solution::new(i, vec![Tour::from_terminals(i.terminals())]));
        let out = solve_banded(&inst, 3, OffsetMode::Best, solver).unwrap();
        assert_eq!(out.solution.cost(), 6);
        assert_eq!(out.solution.tours().len(), 2);
        assert_eq!(out.costs.len(), 3);
    }

    #[test]
    fn random_offset_is_seeded() {
        let inst = star_at(&[1, 2, 5, 9], 1);
        let solver = |i: &Instance| Ok(Solution::new(i, vec![Tour::from_terminals(i.terminals())]));
        let a = solve_banded(&inst, 4, OffsetMode::Random(7), solver).unwrap();
        let b = solve_banded(&inst, 4, OffsetMode::Random(7), solver).unwrap();
        assert_eq!(a.i0, b.i0);
        assert_eq!(a.costs.len(), 1);
    }

    #[test]
    fn bounded_ratio() {
        let inst = star_at(&[1, 2, 3, 4], 1);
        assert!(has_bounded_distances(&inst, &[2, 3], 2));
        assert!(!has_bounded_distances(&inst, &[1, 2], 2));
        assert!(has_bounded_distances(&inst, &[1, 2, 3], 3));
        assert!(split_by_distance(&inst, 1, 0).is_err());
        assert!(split_by_distance(&inst, 3, 3).is_err());
    }
}
