//! Table construction and back-pointer reconstruction.
//!
//! Local tables `f(v, A)` live on component vertices, subtree tables
//! `g(v, A)` on component roots and critical vertices. Absent keys are
//! unreachable configurations.

use std::cmp::Reverse;
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::VertexId;
use crate::transforms::HatTree;

use super::config::{canonical, LocalConfig, SumList, Tag};
use super::params::PtasParams;

pub(crate) trait HasCost {
    fn cost(&self) -> u64;
}

impl HasCost for u64 {
    fn cost(&self) -> u64 {
        *self
    }
}

#[derive(Clone, Debug)]
pub(crate) enum LocalBack {
    Exit,
    Leaf,
    Empty,
    /// Child configurations and, per resulting subtour, the indices of the
    /// parts taken from the first and second child.
    Merge {
        children: Vec<(VertexId, LocalConfig)>,
        pairs: Vec<(Option<usize>, Option<usize>)>,
    },
}

#[derive(Clone, Debug)]
pub(crate) struct LocalEntry {
    pub cost: u64,
    pub back: LocalBack,
}

#[derive(Clone, Debug)]
pub(crate) struct RootEntry {
    pub cost: u64,
    /// Local configuration before the demand floor.
    pub local: LocalConfig,
    pub exit: SumList,
    /// `(passing demand after the floor, exit demand)` per association.
    pub assoc: Vec<(u32, u32)>,
}

#[derive(Clone, Debug)]
pub(crate) struct Step {
    /// The child's configuration before rounding.
    pub orig: SumList,
    /// `(accumulated demand, rounded child demand, count)` merges.
    pub matches: Vec<(u32, u32, u32)>,
}

#[derive(Clone, Debug)]
pub(crate) struct CritEntry {
    pub cost: u64,
    pub x: Option<Arc<Vec<u32>>>,
    pub plan: Vec<Step>,
}

impl HasCost for LocalEntry {
    fn cost(&self) -> u64 {
        self.cost
    }
}

impl HasCost for RootEntry {
    fn cost(&self) -> u64 {
        self.cost
    }
}

impl HasCost for CritEntry {
    fn cost(&self) -> u64 {
        self.cost
    }
}

pub(crate) struct Work {
    pub used: u64,
    limit: u64,
}

impl Work {
    pub fn new(limit: u64) -> Self {
        Self { used: 0, limit }
    }

    fn tick(&mut self) -> Result<()> {
        self.used += 1;
        if self.used > self.limit {
            return Err(Error::Budget(format!(
                "DP generated more than {} candidate states; tighten M/sum_list_cap/x_set_size or raise dp_states",
                self.limit
            )));
        }
        Ok(())
    }
}

fn insert_min<K: Ord, E: HasCost>(table: &mut BTreeMap<K, E>, key: K, entry: E) {
    match table.get(&key) {
        Some(old) if old.cost() <= entry.cost() => {}
        _ => {
            table.insert(key, entry);
        }
    }
}

// ---------------------------------------------------------------- local stage

pub(crate) fn local_leaf() -> BTreeMap<LocalConfig, LocalEntry> {
    BTreeMap::from([(vec![(1, Tag::Ending)], LocalEntry { cost: 0, back: LocalBack::Leaf })])
}

pub(crate) fn local_empty() -> BTreeMap<LocalConfig, LocalEntry> {
    BTreeMap::from([(Vec::new(), LocalEntry { cost: 0, back: LocalBack::Empty })])
}

pub(crate) fn local_exit(m: usize) -> BTreeMap<LocalConfig, LocalEntry> {
    (0..=m).map(|l| (vec![(0, Tag::Passing); l], LocalEntry { cost: 0, back: LocalBack::Exit })).collect()
}

type Pairings = BTreeMap<LocalConfig, Vec<(Option<usize>, Option<usize>)>>;

/// Distinct results of pairing entries of `a` with entries of `b`, each entry
/// used at most once, with the pairing that produced them.
fn local_pairings(a: &[(u32, Tag)], b: &[(u32, Tag)], k: u32) -> Pairings {
    struct Search<'s> {
        a: &'s [(u32, Tag)],
        b: &'s [(u32, Tag)],
        k: u32,
        choice: Vec<Option<usize>>,
        used: Vec<bool>,
        out: Pairings,
    }
    impl Search<'_> {
        fn run(&mut self, i: usize) {
            if i == self.a.len() {
                let mut pairs: Vec<(Option<usize>, Option<usize>)> =
                    self.choice.iter().enumerate().map(|(i, &j)| (Some(i), j)).collect();
                pairs.extend((0..self.b.len()).filter(|&j| !self.used[j]).map(|j| (None, Some(j))));
                let config = canonical(
                    pairs
                        .iter()
                        .map(|&(x, y)| {
                            let (s1, t1) = x.map_or((0, Tag::Ending), |x| self.a[x]);
                            let (s2, t2) = y.map_or((0, Tag::Ending), |y| self.b[y]);
                            let tag = if t1 == Tag::Passing || t2 == Tag::Passing { Tag::Passing } else { Tag::Ending };
                            (s1 + s2, tag)
                        })
                        .collect(),
                );
                self.out.entry(config).or_insert(pairs);
                return;
            }
            let floor = if i > 0 && self.a[i] == self.a[i - 1] { self.choice[i - 1] } else { None };
            if floor.is_none() {
                self.choice.push(None);
                self.run(i + 1);
                self.choice.pop();
            }
            for j in 0..self.b.len() {
                if self.used[j] || (j > 0 && self.b[j] == self.b[j - 1] && !self.used[j - 1]) {
                    continue;
                }
                if Some(j) < floor {
                    continue;
                }
                let (s1, t1) = self.a[i];
                let (s2, t2) = self.b[j];
                if s1 + s2 > self.k || (t1 == Tag::Passing && t2 == Tag::Passing) {
                    continue;
                }
                self.used[j] = true;
                self.choice.push(Some(j));
                self.run(i + 1);
                self.choice.pop();
                self.used[j] = false;
            }
        }
    }
    let mut s = Search { a, b, k, choice: Vec::new(), used: vec![false; b.len()], out: BTreeMap::new() };
    s.run(0);
    s.out
}

/// Table at an internal component vertex from its (one or two) children,
/// given as `(child, edge weight, child table)`.
pub(crate) fn local_merge<E: HasCost>(
    children: &[(VertexId, u64, &BTreeMap<LocalConfig, E>)],
    m: usize,
    k: u32,
    work: &mut Work,
) -> Result<BTreeMap<LocalConfig, LocalEntry>> {
    let mut out = BTreeMap::new();
    match children {
        [(v1, w1, t1)] => {
            for (a1, e1) in t1.iter() {
                work.tick()?;
                let cost = e1.cost() + 2 * a1.len() as u64 * w1;
                let pairs = (0..a1.len()).map(|i| (Some(i), None)).collect();
                let back = LocalBack::Merge { children: vec![(*v1, a1.clone())], pairs };
                insert_min(&mut out, a1.clone(), LocalEntry { cost, back });
            }
        }
        [(v1, w1, t1), (v2, w2, t2)] => {
            for (a1, e1) in t1.iter() {
                for (a2, e2) in t2.iter() {
                    let cost = e1.cost() + e2.cost() + 2 * a1.len() as u64 * w1 + 2 * a2.len() as u64 * w2;
                    for (config, pairs) in local_pairings(a1, a2, k) {
                        work.tick()?;
                        if config.len() > m {
                            continue;
                        }
                        let back = LocalBack::Merge { children: vec![(*v1, a1.clone()), (*v2, a2.clone())], pairs };
                        insert_min(&mut out, config, LocalEntry { cost, back });
                    }
                }
            }
        }
        _ => {
            return Err(Error::Internal(format!("component vertex with {} children", children.len())));
        }
    }
    Ok(out)
}

// ------------------------------------------------------- component-root stage

pub(crate) fn floor_config(config: &LocalConfig, l: u32) -> LocalConfig {
    canonical(config.iter().map(|&(s, t)| if s > 0 && s < l { (l, t) } else { (s, t) }).collect())
}

/// Assignments of each passing demand to an exit entry index, respecting
/// multiplicities and capacity.
fn associations(passing: &[u32], exit: &[(u32, u32)], k: u32) -> Vec<Vec<usize>> {
    fn rec(
        i: usize,
        passing: &[u32],
        exit: &[(u32, u32)],
        k: u32,
        rem: &mut [u32],
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if i == passing.len() {
            out.push(cur.clone());
            return;
        }
        let start = if i > 0 && passing[i] == passing[i - 1] { cur[i - 1] } else { 0 };
        for j in start..exit.len() {
            if rem[j] == 0 || passing[i] + exit[j].0 > k {
                continue;
            }
            rem[j] -= 1;
            cur.push(j);
            rec(i + 1, passing, exit, k, rem, cur, out);
            cur.pop();
            rem[j] += 1;
        }
    }
    let mut rem: Vec<u32> = exit.iter().map(|&(_, n)| n).collect();
    let mut out = Vec::new();
    rec(0, passing, exit, k, &mut rem, &mut Vec::new(), &mut out);
    out
}

/// Subtree table at a component root. `exit` is `None` for leaf components.
pub(crate) fn root_table<F: HasCost, G: HasCost>(
    f: &BTreeMap<LocalConfig, F>,
    exit: Option<&BTreeMap<SumList, G>>,
    spine_weight: u64,
    params: &PtasParams,
    k: u32,
    work: &mut Work,
) -> Result<BTreeMap<SumList, RootEntry>> {
    let l = params.min_subtour_demand;
    let cap = params.sum_list_cap.saturating_add(params.max_tours_per_component);
    let mut floored: BTreeMap<LocalConfig, (u64, &LocalConfig)> = BTreeMap::new();
    for (config, e) in f {
        let key = floor_config(config, l);
        match floored.get(&key) {
            Some(&(c, _)) if c <= e.cost() => {}
            _ => {
                floored.insert(key, (e.cost(), config));
            }
        }
    }
    let mut out = BTreeMap::new();
    for (padded, &(fc, orig)) in &floored {
        let passing: Vec<u32> = padded.iter().filter(|e| e.1 == Tag::Passing).map(|e| e.0).collect();
        let ending = padded.iter().filter(|e| e.1 == Tag::Ending).map(|e| e.0);
        let Some(exit) = exit else {
            work.tick()?;
            if !passing.is_empty() {
                continue;
            }
            let list = SumList::from_values(ending);
            if list.len() <= cap {
                insert_min(
                    &mut out,
                    list,
                    RootEntry { cost: fc, local: orig.clone(), exit: SumList::default(), assoc: Vec::new() },
                );
            }
            continue;
        };
        for (el, ge) in exit {
            let spare = el.tours().checked_sub(passing.len() as u64);
            let Some(spare) = spare else { continue };
            let cost = fc + ge.cost() + 2 * spine_weight * spare;
            for assign in associations(&passing, el.entries(), k) {
                work.tick()?;
                let mut used = vec![0u32; el.len()];
                let mut pairs = Vec::with_capacity(assign.len());
                for (i, &j) in assign.iter().enumerate() {
                    used[j] += 1;
                    pairs.push((passing[i], el.entries()[j].0));
                }
                let list = SumList::from_counts(
                    pairs
                        .iter()
                        .map(|&(p, s)| (p + s, 1))
                        .chain(el.entries().iter().zip(&used).map(|(&(s, n), &u)| (s, n - u)))
                        .chain(ending.clone().map(|s| (s, 1))),
                );
                if list.len() > cap {
                    continue;
                }
                insert_min(&mut out, list, RootEntry { cost, local: orig.clone(), exit: el.clone(), assoc: pairs });
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------- critical stage

pub(crate) fn round_up(x: &[u32], s: u32) -> Option<u32> {
    if s == 0 {
        return Some(0);
    }
    x.get(x.partition_point(|&v| v < s)).copied()
}

fn round_list(list: &SumList, x: &[u32]) -> Option<SumList> {
    let mut out = Vec::with_capacity(list.len());
    for &(s, n) in list.entries() {
        out.push((round_up(x, s)?, n));
    }
    Some(SumList::from_counts(out))
}

/// Distinct results of merging subtours of `b` with subtours of `a`, each
/// subtour merged at most once.
fn merges(b: &SumList, a: &SumList, k: u32) -> BTreeMap<SumList, Vec<(u32, u32, u32)>> {
    let (b, a) = (b.entries(), a.entries());
    let cells: Vec<(usize, usize)> =
        (0..b.len()).flat_map(|p| (0..a.len()).map(move |j| (p, j))).filter(|&(p, j)| b[p].0 + a[j].0 <= k).collect();
    struct Search<'s> {
        b: &'s [(u32, u32)],
        a: &'s [(u32, u32)],
        cells: Vec<(usize, usize)>,
        rem_b: Vec<u32>,
        rem_a: Vec<u32>,
        cur: Vec<(u32, u32, u32)>,
        out: BTreeMap<SumList, Vec<(u32, u32, u32)>>,
    }
    impl Search<'_> {
        fn run(&mut self, idx: usize) {
            if idx == self.cells.len() {
                let list = SumList::from_counts(
                    self.cur
                        .iter()
                        .map(|&(bv, av, c)| (bv + av, c))
                        .chain(self.b.iter().zip(&self.rem_b).map(|(&(v, _), &r)| (v, r)))
                        .chain(self.a.iter().zip(&self.rem_a).map(|(&(v, _), &r)| (v, r))),
                );
                self.out.entry(list).or_insert_with(|| self.cur.clone());
                return;
            }
            let (p, j) = self.cells[idx];
            let most = self.rem_b[p].min(self.rem_a[j]);
            self.run(idx + 1);
            for c in 1..=most {
                self.rem_b[p] -= c;
                self.rem_a[j] -= c;
                self.cur.push((self.b[p].0, self.a[j].0, c));
                self.run(idx + 1);
                self.cur.pop();
                self.rem_b[p] += c;
                self.rem_a[j] += c;
            }
        }
    }
    let mut s = Search {
        b,
        a,
        cells,
        rem_b: b.iter().map(|e| e.1).collect(),
        rem_a: a.iter().map(|e| e.1).collect(),
        cur: Vec::new(),
        out: BTreeMap::new(),
    };
    s.run(0);
    s.out
}

/// Subtree table at a critical vertex from the tables of the attached
/// component roots (left to right) and their attachment weights.
pub(crate) fn critical_table<E: HasCost>(
    children: &[(&BTreeMap<SumList, E>, u64)],
    x_sets: &[Arc<Vec<u32>>],
    params: &PtasParams,
    k: u32,
    work: &mut Work,
) -> Result<BTreeMap<SumList, CritEntry>> {
    let mut out: BTreeMap<SumList, CritEntry> = BTreeMap::new();
    if children.is_empty() {
        out.insert(SumList::default(), CritEntry { cost: 0, x: None, plan: Vec::new() });
        return Ok(out);
    }
    let cap = params.sum_list_cap;
    struct Cell {
        cost: u64,
        prev: SumList,
        child: SumList,
        matches: Vec<(u32, u32, u32)>,
    }
    impl HasCost for Cell {
        fn cost(&self) -> u64 {
            self.cost
        }
    }
    for x in x_sets {
        let rounded: Vec<BTreeMap<SumList, (u64, &SumList)>> = children
            .iter()
            .map(|(table, _)| {
                let mut r: BTreeMap<SumList, (u64, &SumList)> = BTreeMap::new();
                for (orig, e) in table.iter() {
                    if let Some(key) = round_list(orig, x) {
                        match r.get(&key) {
                            Some(&(c, _)) if c <= e.cost() => {}
                            _ => {
                                r.insert(key, (e.cost(), orig));
                            }
                        }
                    }
                }
                r
            })
            .collect();
        let mut steps: Vec<BTreeMap<SumList, Cell>> = Vec::with_capacity(children.len());
        let mut first = BTreeMap::new();
        for (key, &(c, _)) in &rounded[0] {
            work.tick()?;
            if key.len() > cap {
                continue;
            }
            let cost = c + 2 * key.tours() * children[0].1;
            insert_min(
                &mut first,
                key.clone(),
                Cell { cost, prev: SumList::default(), child: key.clone(), matches: Vec::new() },
            );
        }
        steps.push(first);
        for i in 1..children.len() {
            let delta = children[i].1;
            let mut next = BTreeMap::new();
            for (bkey, bcell) in &steps[i - 1] {
                for (akey, &(c, _)) in &rounded[i] {
                    let cost = bcell.cost + c + 2 * akey.tours() * delta;
                    for (list, matches) in merges(bkey, akey, k) {
                        work.tick()?;
                        if list.len() > cap {
                            continue;
                        }
                        insert_min(&mut next, list, Cell { cost, prev: bkey.clone(), child: akey.clone(), matches });
                    }
                }
            }
            steps.push(next);
        }
        let last = steps.last().expect("at least one child");
        for (key, cell) in last {
            if out.get(key).is_some_and(|e| e.cost <= cell.cost) {
                continue;
            }
            let mut plan = Vec::with_capacity(children.len());
            let mut cur = key;
            for i in (0..children.len()).rev() {
                let c = &steps[i][cur];
                let orig = rounded[i][&c.child].1.clone();
                plan.push(Step { orig, matches: c.matches.clone() });
                cur = &c.prev;
            }
            plan.reverse();
            out.insert(key.clone(), CritEntry { cost: cell.cost, x: Some(x.clone()), plan });
        }
    }
    Ok(out)
}

// ----------------------------------------------------------------- driver

#[derive(Clone, Debug, Default)]
pub(crate) struct Piece {
    pub terminals: Vec<VertexId>,
    pub padding: u32,
    pub passing: bool,
}

impl Piece {
    pub fn demand(&self) -> u32 {
        self.terminals.len() as u32 + self.padding
    }

    fn join(mut self, other: Piece) -> Piece {
        self.terminals.extend(other.terminals);
        self.padding += other.padding;
        self.passing |= other.passing;
        self
    }
}

fn pool(pieces: Vec<Piece>) -> BTreeMap<u32, Vec<Piece>> {
    let mut out: BTreeMap<u32, Vec<Piece>> = BTreeMap::new();
    for p in pieces {
        out.entry(p.demand()).or_default().push(p);
    }
    out
}

fn take(pool: &mut BTreeMap<u32, Vec<Piece>>, demand: u32) -> Result<Piece> {
    pool.get_mut(&demand)
        .and_then(Vec::pop)
        .ok_or_else(|| Error::Internal(format!("back-pointer refers to a missing subtour of demand {demand}")))
}

fn drain(pool: BTreeMap<u32, Vec<Piece>>) -> impl Iterator<Item = Piece> {
    pool.into_values().flatten()
}

pub(crate) struct Engine<'a> {
    hat: &'a HatTree,
    params: &'a PtasParams,
    k: u32,
    attached: BTreeMap<VertexId, Vec<usize>>,
    local: HashMap<(usize, VertexId), BTreeMap<LocalConfig, LocalEntry>>,
    root: Vec<BTreeMap<SumList, RootEntry>>,
    crit: HashMap<VertexId, BTreeMap<SumList, CritEntry>>,
    pub work: Work,
}

impl<'a> Engine<'a> {
    pub fn new(hat: &'a HatTree, params: &'a PtasParams) -> Self {
        let mut attached: BTreeMap<VertexId, Vec<usize>> = BTreeMap::new();
        for c in &hat.components {
            attached.entry(c.critical).or_default().push(c.id);
        }
        Self {
            hat,
            params,
            k: hat.instance.capacity(),
            attached,
            local: HashMap::new(),
            root: vec![BTreeMap::new(); hat.components.len()],
            crit: HashMap::new(),
            work: Work::new(params.budgets.dp_states),
        }
    }

    /// Fills the local tables of component `c` bottom-up.
    pub fn run_local(&mut self, c: usize) -> Result<()> {
        let comp = &self.hat.components[c];
        let inst = &self.hat.instance;
        let mut order = Vec::new();
        let mut stack = vec![comp.root];
        while let Some(v) = stack.pop() {
            order.push(v);
            if Some(v) != comp.exit {
                stack.extend(self.hat.component_children(c, v));
            }
        }
        for &v in order.iter().rev() {
            let table = if Some(v) == comp.exit {
                local_exit(self.params.max_tours_per_component)
            } else {
                let kids: Vec<VertexId> = self.hat.component_children(c, v).collect();
                if kids.is_empty() {
                    if inst.is_terminal(v) {
                        local_leaf()
                    } else {
                        local_empty()
                    }
                } else {
                    let inputs: Vec<_> = kids.iter().map(|&u| (u, inst.weight(u), &self.local[&(c, u)])).collect();
                    local_merge(&inputs, self.params.max_tours_per_component, self.k, &mut self.work)?
                }
            };
            self.local.insert((c, v), table);
        }
        Ok(())
    }

    pub fn local_table(&self, c: usize) -> &BTreeMap<LocalConfig, LocalEntry> {
        &self.local[&(c, self.hat.components[c].root)]
    }

    fn run_root(&mut self, c: usize) -> Result<()> {
        let comp = &self.hat.components[c];
        let f = &self.local[&(c, comp.root)];
        let table = match comp.exit {
            None => root_table::<_, u64>(f, None, 0, self.params, self.k, &mut self.work)?,
            Some(x) => {
                let exit = self.crit.entry(x).or_insert_with(|| {
                    BTreeMap::from([(SumList::default(), CritEntry { cost: 0, x: None, plan: Vec::new() })])
                });
                let spine = self.hat.instance.dist(x) - self.hat.instance.dist(comp.root);
                root_table(f, Some(&*exit), spine, self.params, self.k, &mut self.work)?
            }
        };
        self.root[c] = table;
        Ok(())
    }

    fn run_critical(&mut self, z: VertexId, x_sets: &[Arc<Vec<u32>>]) -> Result<()> {
        let comps = self.attached.get(&z).cloned().unwrap_or_default();
        let children: Vec<_> = comps.iter().map(|&c| (&self.root[c], self.hat.components[c].delta)).collect();
        let table = critical_table(&children, x_sets, self.params, self.k, &mut self.work)?;
        self.crit.insert(z, table);
        Ok(())
    }

    /// Runs all three stages bottom-up. `x_sets(z)` yields the candidate
    /// rounding sets at critical vertex `z`.
    pub fn run(&mut self, x_sets: &dyn Fn(VertexId) -> Result<Vec<Arc<Vec<u32>>>>) -> Result<()> {
        let inst = &self.hat.instance;
        let mut order: Vec<VertexId> = self.attached.keys().copied().collect();
        order.sort_by_key(|&z| (Reverse(inst.depth(z)), z));
        for z in order {
            for c in self.attached[&z].clone() {
                self.run_local(c)?;
                self.run_root(c)?;
            }
            let xs = x_sets(z)?;
            self.run_critical(z, &xs)?;
        }
        Ok(())
    }

    /// Cheapest entry at the depot: fewest tours, then smallest list on ties.
    pub fn best(&self) -> Result<(SumList, u64)> {
        let table =
            self.crit.get(&self.hat.instance.root()).ok_or_else(|| Error::Internal("depot table missing".into()))?;
        table
            .iter()
            .min_by(|(ka, ea), (kb, eb)| (ea.cost, ka.tours(), *ka).cmp(&(eb.cost, kb.tours(), *kb)))
            .map(|(k, e)| (k.clone(), e.cost))
            .ok_or_else(|| {
                Error::Infeasible("no complete configuration survives the caps; loosen M, L or sum_list_cap".into())
            })
    }

    fn recon_local(&self, c: usize, config: &LocalConfig) -> Result<Vec<Piece>> {
        let comp = &self.hat.components[c];
        let broken = || Error::Internal(format!("broken local back-pointer in component {c}"));
        // top-down: assign a configuration to every vertex
        let mut assigned: Vec<(VertexId, LocalConfig)> = Vec::new();
        let mut stack = vec![(comp.root, config.clone())];
        while let Some((v, cfg)) = stack.pop() {
            let entry = self.local.get(&(c, v)).and_then(|t| t.get(&cfg)).ok_or_else(broken)?;
            if let LocalBack::Merge { children, .. } = &entry.back {
                for (u, a) in children {
                    stack.push((*u, a.clone()));
                }
            }
            assigned.push((v, cfg));
        }
        let mut done: HashMap<VertexId, Vec<Piece>> = HashMap::new();
        for (v, cfg) in assigned.into_iter().rev() {
            let entry = &self.local[&(c, v)][&cfg];
            let mut pieces = match &entry.back {
                LocalBack::Exit => (0..cfg.len()).map(|_| Piece { passing: true, ..Piece::default() }).collect(),
                LocalBack::Leaf => vec![Piece { terminals: vec![v], padding: 0, passing: false }],
                LocalBack::Empty => Vec::new(),
                LocalBack::Merge { children, pairs } => {
                    let mut parts: Vec<Vec<Option<Piece>>> = Vec::new();
                    for (u, _) in children {
                        parts.push(done.remove(u).ok_or_else(broken)?.into_iter().map(Some).collect());
                    }
                    let mut out = Vec::with_capacity(pairs.len());
                    for &(x, y) in pairs {
                        let mut piece = Piece::default();
                        if let Some(i) = x {
                            piece = piece.join(parts[0][i].take().ok_or_else(broken)?);
                        }
                        if let Some(j) = y {
                            piece = piece.join(parts.get_mut(1).and_then(|p| p[j].take()).ok_or_else(broken)?);
                        }
                        out.push(piece);
                    }
                    out
                }
            };
            pieces.sort_by_key(|p| (p.demand(), if p.passing { Tag::Passing } else { Tag::Ending }));
            let keys: LocalConfig =
                pieces.iter().map(|p| (p.demand(), if p.passing { Tag::Passing } else { Tag::Ending })).collect();
            if keys != cfg {
                return Err(Error::Internal(format!("local reconstruction at {v} gave {keys:?}, expected {cfg:?}")));
            }
            done.insert(v, pieces);
        }
        done.remove(&comp.root).ok_or_else(broken)
    }

    fn recon_root(&self, c: usize, list: &SumList) -> Result<Vec<Piece>> {
        let comp = &self.hat.components[c];
        let entry =
            self.root[c].get(list).ok_or_else(|| Error::Internal(format!("component {c} has no entry {list:?}")))?;
        let l = self.params.min_subtour_demand;
        let mut pieces = self.recon_local(c, &entry.local)?;
        for p in &mut pieces {
            let d = p.demand();
            if d > 0 && d < l {
                p.padding += l - d;
            }
        }
        let (passing, ending): (Vec<Piece>, Vec<Piece>) = pieces.into_iter().partition(|p| p.passing);
        let mut out = ending;
        if let Some(x) = comp.exit {
            let mut below = pool(self.recon_critical(x, &entry.exit)?);
            let mut up = pool(passing);
            for &(p, s) in &entry.assoc {
                let a = take(&mut up, p)?;
                let b = take(&mut below, s)?;
                out.push(a.join(b));
            }
            if up.values().any(|v| !v.is_empty()) {
                return Err(Error::Internal(format!("component {c}: unassociated passing subtour")));
            }
            out.extend(drain(below));
        } else if !passing.is_empty() {
            return Err(Error::Internal(format!("leaf component {c} has passing subtours")));
        }
        for p in &mut out {
            p.passing = false;
        }
        let got = SumList::from_values(out.iter().map(Piece::demand));
        if &got != list {
            return Err(Error::Internal(format!("component {c} rebuilt {got:?}, expected {list:?}")));
        }
        Ok(out)
    }

    fn recon_critical(&self, z: VertexId, list: &SumList) -> Result<Vec<Piece>> {
        let entry = self
            .crit
            .get(&z)
            .and_then(|t| t.get(list))
            .ok_or_else(|| Error::Internal(format!("critical vertex {z} has no entry {list:?}")))?;
        let comps = self.attached.get(&z).cloned().unwrap_or_default();
        if comps.len() != entry.plan.len() {
            return Err(Error::Internal(format!("plan at {z} does not match its components")));
        }
        let mut cur: Vec<Piece> = Vec::new();
        for (i, step) in entry.plan.iter().enumerate() {
            let mut child = self.recon_root(comps[i], &step.orig)?;
            if let Some(x) = &entry.x {
                for p in &mut child {
                    let d = p.demand();
                    let r = round_up(x, d).ok_or_else(|| Error::Internal(format!("demand {d} not roundable")))?;
                    p.padding += r - d;
                }
            }
            if i == 0 {
                cur = child;
                continue;
            }
            let mut acc = pool(std::mem::take(&mut cur));
            let mut add = pool(child);
            for &(b, a, n) in &step.matches {
                for _ in 0..n {
                    let joined = take(&mut acc, b)?.join(take(&mut add, a)?);
                    if joined.demand() > self.k {
                        return Err(Error::Internal(format!("merge at {z} exceeds capacity")));
                    }
                    cur.push(joined);
                }
            }
            cur.extend(drain(acc));
            cur.extend(drain(add));
        }
        let got = SumList::from_values(cur.iter().map(Piece::demand));
        if &got != list {
            return Err(Error::Internal(format!("critical vertex {z} rebuilt {got:?}, expected {list:?}")));
        }
        Ok(cur)
    }

    /// Concrete subtours for a depot entry.
    pub fn reconstruct(&self, list: &SumList) -> Result<Vec<Piece>> {
        self.recon_critical(self.hat.instance.root(), list)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairings_cover_all_matchings() {
        let a = vec![(1, Tag::Ending), (1, Tag::Ending)];
        let b = vec![(1, Tag::Ending)];
        let got: Vec<LocalConfig> = local_pairings(&a, &b, 3).into_keys().collect();
        assert_eq!(
            got,
            vec![vec![(1, Tag::Ending), (1, Tag::Ending), (1, Tag::Ending)], vec![(1, Tag::Ending), (2, Tag::Ending)]]
        );
        // two passing entries never merge
        let p = vec![(0, Tag::Passing)];
        assert_eq!(local_pairings(&p, &p, 3).len(), 1);
    }

    #[test]
    fn merges_respect_capacity() {
        let b = SumList::from_values([2, 3]);
        let a = SumList::from_values([2]);
        let got: Vec<SumList> = merges(&b, &a, 4).into_keys().collect();
        assert_eq!(got, vec![SumList::from_values([2, 2, 3]), SumList::from_values([3, 4])]);
    }

    #[test]
    fn association_symmetry() {
        // two equal passing demands, exit list {(1, 1), (2, 1)}: three assignments up to symmetry
        let got = associations(&[1, 1], &[(1, 1), (2, 1)], 5);
        assert_eq!(got, vec![vec![0, 1]]);
        let got = associations(&[1, 1], &[(1, 2), (2, 1)], 5);
        assert_eq!(got, vec![vec![0, 0], vec![0, 1]]);
    }

    #[test]
    fn rounding() {
        assert_eq!(round_up(&[2, 4], 3), Some(4));
        assert_eq!(round_up(&[2, 4], 2), Some(2));
        assert_eq!(round_up(&[2, 4], 5), None);
        assert_eq!(round_list(&SumList::from_values([1, 3]), &[2, 4]), Some(SumList::from_values([2, 4])));
    }
}
