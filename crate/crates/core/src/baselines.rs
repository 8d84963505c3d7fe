//! Reference solvers: iterated tour partitioning, a greedy splitter and two
//! exact oracles for small instances.

use std::collections::{BTreeMap, HashMap};

use crate::budget::Budgets;
use crate::error::{Error, Result};
use crate::model::{subtree_cost, Instance, Solution, Tour, VertexId};

/// Terminal tokens in depth-first order (children by id), one entry per
/// demand unit.
pub fn dfs_tokens(instance: &Instance) -> Vec<VertexId> {
    instance.preorder().iter().flat_map(|&v| std::iter::repeat_n(v, instance.demand(v) as usize)).collect()
}

/// Offset-`o` partition of the depth-first token order: the first tour takes
/// `o` tokens (none when `o = 0`), every later tour `k`.
pub fn itp_with_offset(instance: &Instance, offset: usize) -> Solution {
    let tokens = dfs_tokens(instance);
    let k = instance.capacity() as usize;
    let split = offset.min(tokens.len());
    let (head, rest) = tokens.split_at(split);
    let mut tours = Vec::new();
    if !head.is_empty() {
        tours.push(Tour::from_terminals(head.iter().copied()));
    }
    tours.extend(rest.chunks(k).map(|c| Tour::from_terminals(c.iter().copied())));
    Solution::new(instance, tours)
}

/// Offsets are only searched up to this many tokens.
pub const ITP_OFFSET_SEARCH_LIMIT: usize = 10_000;

/// Best offset in `0..k` (smallest on ties) for up to
/// [`ITP_OFFSET_SEARCH_LIMIT`] tokens, offset 0 beyond.
pub fn itp_search(instance: &Instance) -> (usize, Solution) {
    let n = instance.total_demand() as usize;
    let k = instance.capacity() as usize;
    let tries = if n <= ITP_OFFSET_SEARCH_LIMIT { k.min(n.max(1)) } else { 1 };
    let mut best = (0, itp_with_offset(instance, 0));
    for o in 1..tries {
        let sol = itp_with_offset(instance, o);
        if sol.cost() < best.1.cost() {
            best = (o, sol);
        }
    }
    best
}

pub fn itp(instance: &Instance) -> Solution {
    itp_search(instance).1
}

/// Tree-TSP cost plus `dist(first) + dist(last)` per segment of the offset-`o`
/// partition: the length of the closed walks the partition induces.
pub fn itp_bound(instance: &Instance, offset: usize) -> u64 {
    let tokens = dfs_tokens(instance);
    let k = instance.capacity() as usize;
    let split = offset.min(tokens.len());
    let (head, rest) = tokens.split_at(split);
    let mut segments: Vec<&[VertexId]> = Vec::new();
    if !head.is_empty() {
        segments.push(head);
    }
    segments.extend(rest.chunks(k));
    let ends: u64 =
        segments.iter().map(|s| instance.dist(s[0]) + instance.dist(*s.last().expect("segments are non-empty"))).sum();
    subtree_cost(instance, tokens.iter().copied()) + ends
}

/// Fills each tour with the deepest unserved tokens (ties by id).
pub fn greedy(instance: &Instance) -> Solution {
    let mut tokens = dfs_tokens(instance);
    tokens.sort_by_key(|&v| (std::cmp::Reverse(instance.dist(v)), v));
    let k = instance.capacity() as usize;
    Solution::new(instance, tokens.chunks(k).map(|c| Tour::from_terminals(c.iter().copied())).collect())
}

fn require_unit(instance: &Instance, who: &str) -> Result<()> {
    if !instance.is_unit_demand() {
        return Err(Error::Validation(format!("{who} expects unit demands; expand the instance first")));
    }
    Ok(())
}

/// Minimum-cost partition of the terminals into groups of at most `k` by a
/// subset DP over all terminal subsets.
pub fn exact_partition_dp(instance: &Instance, budgets: &Budgets) -> Result<Solution> {
    require_unit(instance, "exact_partition_dp")?;
    let terms = instance.terminals();
    let n = terms.len();
    if n == 0 {
        return Ok(Solution::empty());
    }
    if n > budgets.partition_terminals {
        return Err(Error::Budget(format!(
            "exact_partition_dp handles at most {} terminals, got {n}",
            budgets.partition_terminals
        )));
    }
    let k = instance.capacity();
    let full = (1usize << n) - 1;
    let group_cost: Vec<Option<u64>> = (0..=full)
        .map(|m: usize| {
            (m.count_ones() <= k).then(|| subtree_cost(instance, (0..n).filter(|&i| m >> i & 1 == 1).map(|i| terms[i])))
        })
        .collect();
    let mut best = vec![u64::MAX; full + 1];
    let mut choice = vec![0usize; full + 1];
    best[0] = 0;
    for mask in 1..=full {
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        // submasks of `rest`, each joined with the lowest terminal
        let mut sub = rest;
        loop {
            let group = sub | low;
            if let Some(c) = group_cost[group] {
                let total = c + best[mask ^ group];
                if total < best[mask] {
                    best[mask] = total;
                    choice[mask] = group;
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    let mut tours = Vec::new();
    let mut mask = full;
    while mask != 0 {
        let g = choice[mask];
        tours.push(Tour::from_terminals((0..n).filter(|&i| g >> i & 1 == 1).map(|i| terms[i])));
        mask ^= g;
    }
    let sol = Solution::new(instance, tours);
    debug_assert_eq!(sol.cost(), best[full]);
    Ok(sol)
}

type Open = Vec<u32>;

#[derive(Clone)]
struct Back {
    prev: Open,
    child: Open,
    pairs: Vec<(Option<usize>, Option<usize>)>,
}

type Stage = BTreeMap<Open, (u64, Option<Back>)>;
type Joins = BTreeMap<Open, Vec<(Option<usize>, Option<usize>)>>;

/// All ways of joining open subtours of `a` and `b` pairwise (each at most
/// once, combined demand at most `k`), deduplicated by result. Each matching
/// tried costs one unit of `work`; returns `None` once `work` passes `limit`.
fn joins(a: &[u32], b: &[u32], k: u32, work: &mut u64, limit: u64) -> Option<Joins> {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        i: usize,
        a: &[u32],
        b: &[u32],
        k: u32,
        used: &mut Vec<bool>,
        cur: &mut Vec<Option<usize>>,
        out: &mut Joins,
        work: &mut u64,
        limit: u64,
    ) {
        if *work > limit {
            return;
        }
        if i == a.len() {
            *work += 1;
            let mut pairs: Vec<_> = cur.iter().enumerate().map(|(i, &j)| (Some(i), j)).collect();
            pairs.extend((0..b.len()).filter(|&j| !used[j]).map(|j| (None, Some(j))));
            let mut key: Open = pairs.iter().map(|&(x, y)| x.map_or(0, |x| a[x]) + y.map_or(0, |y| b[y])).collect();
            key.sort_unstable();
            out.entry(key).or_insert(pairs);
            return;
        }
        cur.push(None);
        rec(i + 1, a, b, k, used, cur, out, work, limit);
        cur.pop();
        for j in 0..b.len() {
            if used[j] || a[i] + b[j] > k || (j > 0 && b[j] == b[j - 1] && !used[j - 1]) {
                continue;
            }
            used[j] = true;
            cur.push(Some(j));
            rec(i + 1, a, b, k, used, cur, out, work, limit);
            cur.pop();
            used[j] = false;
        }
    }
    let mut out = BTreeMap::new();
    rec(0, a, b, k, &mut vec![false; b.len()], &mut Vec::new(), &mut out, work, limit);
    (*work <= limit).then_some(out)
}

/// Exact tree DP whose state at a vertex is the multiset of demands of the
/// tours entering its subtree. Children are folded in one at a time; a
/// terminal at an internal vertex acts as an extra zero-weight child. Stored
/// states and tried matchings both count against `config_states`.
pub fn exact_config_dp(instance: &Instance, budgets: &Budgets) -> Result<Solution> {
    require_unit(instance, "exact_config_dp")?;
    if instance.total_demand() == 0 {
        return Ok(Solution::empty());
    }
    let k = instance.capacity();
    let mut states = 0u64;
    let over = || {
        Error::Budget(format!(
            "exact_config_dp exceeded {} states; the instance is too large for the exact oracle",
            budgets.config_states
        ))
    };
    // per vertex: the tables after each folding stage
    let mut stages: HashMap<VertexId, Vec<Stage>> = HashMap::new();
    let mut up: HashMap<VertexId, BTreeMap<Open, u64>> = HashMap::new();
    for &v in instance.preorder().iter().rev() {
        let mut tables: Vec<Stage> = Vec::new();
        let start: Open = if instance.is_terminal(v) { vec![1] } else { Vec::new() };
        tables.push(BTreeMap::from([(start, (0, None))]));
        for &u in instance.children(v) {
            let child = up.remove(&u).expect("children are processed first");
            let prev = tables.last().expect("initial stage");
            let mut next: Stage = BTreeMap::new();
            for (a, (ca, _)) in prev {
                for (b, cb) in &child {
                    let joined = joins(a, b, k, &mut states, budgets.config_states).ok_or_else(over)?;
                    for (key, pairs) in joined {
                        let cost = ca + cb;
                        if next.get(&key).is_none_or(|e| cost < e.0) {
                            let back = Back { prev: a.clone(), child: b.clone(), pairs };
                            next.insert(key, (cost, Some(back)));
                        }
                    }
                }
            }
            states += next.len() as u64;
            if states > budgets.config_states {
                return Err(over());
            }
            tables.push(next);
        }
        let w = instance.weight(v);
        let lifted = tables
            .last()
            .expect("initial stage")
            .iter()
            .map(|(key, (c, _))| (key.clone(), c + 2 * w * key.len() as u64))
            .collect();
        up.insert(v, lifted);
        stages.insert(v, tables);
    }
    let root = instance.root();
    let (best, _) = stages[&root]
        .last()
        .expect("initial stage")
        .iter()
        .min_by_key(|(key, (c, _))| (*c, key.len(), (*key).clone()))
        .map(|(key, e)| (key.clone(), e.0))
        .expect("root table is non-empty");

    // top-down: the open multiset chosen at every vertex
    let mut chosen: Vec<(VertexId, Open)> = Vec::new();
    let mut stack = vec![(root, best)];
    let mut plan: HashMap<VertexId, Vec<Back>> = HashMap::new();
    while let Some((v, key)) = stack.pop() {
        let tables = &stages[&v];
        let mut cur = key.clone();
        let mut backs = Vec::new();
        for (i, &u) in instance.children(v).iter().enumerate().rev() {
            let back = tables[i + 1][&cur].1.clone().expect("folded stage has a back-pointer");
            stack.push((u, back.child.clone()));
            cur = back.prev.clone();
            backs.push(back);
        }
        backs.reverse();
        plan.insert(v, backs);
        chosen.push((v, key));
    }
    // bottom-up: concrete groups, sorted by demand to match the keys
    let mut groups: HashMap<VertexId, Vec<Vec<VertexId>>> = HashMap::new();
    for (v, key) in chosen.into_iter().rev() {
        let mut cur: Vec<Vec<VertexId>> = if instance.is_terminal(v) { vec![vec![v]] } else { Vec::new() };
        for (i, &u) in instance.children(v).iter().enumerate() {
            let back = &plan[&v][i];
            let mut below: Vec<Option<Vec<VertexId>>> =
                groups.remove(&u).expect("child groups built").into_iter().map(Some).collect();
            let mut here: Vec<Option<Vec<VertexId>>> = cur.into_iter().map(Some).collect();
            let mut next = Vec::with_capacity(back.pairs.len());
            for &(x, y) in &back.pairs {
                let mut g = x.and_then(|x| here[x].take()).unwrap_or_default();
                g.extend(y.and_then(|y| below[y].take()).unwrap_or_default());
                next.push(g);
            }
            next.sort_by_key(Vec::len);
            cur = next;
        }
        let sizes: Open = cur.iter().map(|g| g.len() as u32).collect();
        if sizes != key {
            return Err(Error::Internal(format!("exact_config_dp rebuilt {sizes:?} at {v}, expected {key:?}")));
        }
        groups.insert(v, cur);
    }
    let tours = groups.remove(&root).unwrap_or_default().into_iter().map(Tour::from_terminals).collect();
    Ok(Solution::new(instance, tours))
}
