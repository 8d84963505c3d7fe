//! The configuration DP over the hat tree: local tables inside components,
//! subtree tables at component roots, and subtree tables at critical vertices
//! with rounding to a candidate value set.

mod config;
mod engine;
mod params;
mod xsets;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

pub use config::{canonical, LocalConfig, SumList, Tag};
pub use params::{inverse_epsilon, theory_constants, theory_d_tilde, PtasParams, TheoryConstants, XStrategy};
pub use xsets::{exhaustive_x_sets, geometric_grid, heuristic_x_sets};

use crate::baselines::itp;
use crate::decomposition::decompose;
use crate::error::{Error, Result};
use crate::model::{is_normalized, normalize, verify, Instance, Solution, Tour, VertexId, VertexMap};
use crate::transforms::{build_hat_tree, lift_solution, HatTree};
use engine::{Engine, Work};

/// Cost-only local table at the root of component `component` of `hat`.
pub fn local_dp(hat: &HatTree, component: usize, params: &PtasParams) -> Result<BTreeMap<LocalConfig, u64>> {
    if component >= hat.components.len() {
        return Err(Error::Validation(format!("no component {component}")));
    }
    let mut engine = Engine::new(hat, params);
    engine.run_local(component)?;
    Ok(engine.local_table(component).iter().map(|(k, e)| (k.clone(), e.cost)).collect())
}

/// Subtree table at a component root from its local table `f`, the subtree
/// table at its exit (`None` for leaf components) and the spine weight.
pub fn subtree_dp_component_root(
    f: &BTreeMap<LocalConfig, u64>,
    exit: Option<&BTreeMap<SumList, u64>>,
    spine_weight: u64,
    params: &PtasParams,
    k: u32,
) -> Result<BTreeMap<SumList, u64>> {
    let mut work = Work::new(params.budgets.dp_states);
    let t = engine::root_table(f, exit, spine_weight, params, k, &mut work)?;
    Ok(t.into_iter().map(|(key, e)| (key, e.cost)).collect())
}

/// Subtree table at a critical vertex from `(table, attachment weight)` per
/// attached component root, minimised over the candidate sets `x_sets`.
pub fn subtree_dp_critical(
    children: &[(BTreeMap<SumList, u64>, u64)],
    x_sets: &[Vec<u32>],
    params: &PtasParams,
    k: u32,
) -> Result<BTreeMap<SumList, u64>> {
    let mut work = Work::new(params.budgets.dp_states);
    let xs: Vec<Arc<Vec<u32>>> = x_sets.iter().map(|x| Arc::new(x.clone())).collect();
    let inputs: Vec<_> = children.iter().map(|(t, w)| (t, *w)).collect();
    let t = engine::critical_table(&inputs, &xs, params, k, &mut work)?;
    Ok(t.into_iter().map(|(key, e)| (key, e.cost)).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct PtasReport {
    pub components: usize,
    pub critical_vertices: usize,
    pub gamma_k: u64,
    pub d_tilde: u64,
    pub x_strategy: XStrategy,
    /// DP candidate states generated.
    pub dp_states: u64,
    pub theory_guarantee: bool,
    /// Cost of the reconstructed solution on the hat tree, in units.
    pub hat_cost: u64,
}

#[derive(Clone, Debug)]
pub struct PtasOutput {
    pub solution: Solution,
    pub report: PtasReport,
}

type XProvider = Box<dyn Fn(VertexId) -> Result<Vec<Arc<Vec<u32>>>>>;

fn x_provider(hat: &HatTree, params: &PtasParams) -> Result<XProvider> {
    let k = hat.instance.capacity();
    let l = params.min_subtour_demand;
    match params.x_strategy {
        XStrategy::Exhaustive => {
            let all: Vec<Arc<Vec<u32>>> = exhaustive_x_sets(l, k, params.x_set_size, params.budgets.x_candidates)?
                .into_iter()
                .map(Arc::new)
                .collect();
            Ok(Box::new(move |_| Ok(all.clone())))
        }
        XStrategy::GeometricGrid => {
            let grid = Arc::new(geometric_grid(l, k, params.epsilon, params.x_set_size));
            Ok(Box::new(move |_| Ok(vec![grid.clone()])))
        }
        XStrategy::FromHeuristic => {
            let warm = itp(&hat.instance);
            let sets = heuristic_x_sets(hat, &warm, l, params.x_set_size);
            Ok(Box::new(move |z| Ok(vec![Arc::new(sets.get(&z).cloned().unwrap_or_else(|| vec![k]))])))
        }
    }
}

/// Runs the full scheme: normalize, decompose, build the hat tree, fill the
/// tables bottom-up, rebuild the cheapest depot entry and lift it back.
pub fn solve_ptas(instance: &Instance, params: &PtasParams) -> Result<PtasOutput> {
    let k = instance.capacity();
    params.validate(k)?;
    if !instance.is_unit_demand() {
        return Err(Error::Validation("solve_ptas expects unit demands; expand splittable instances first".into()));
    }
    let empty_report = |d_tilde| PtasReport {
        components: 0,
        critical_vertices: 0,
        gamma_k: params.gamma_k,
        d_tilde,
        x_strategy: params.x_strategy,
        dp_states: 0,
        theory_guarantee: params.theory_guarantee(k),
        hat_cost: 0,
    };
    if instance.total_demand() == 0 {
        return Ok(PtasOutput { solution: Solution::empty(), report: empty_report(params.d_tilde.unwrap_or(1)) });
    }
    let (norm, map) = if is_normalized(instance) {
        (instance.clone(), VertexMap::identity(instance.n()))
    } else {
        normalize(instance)?
    };
    let dec = decompose(&norm, params.gamma_k)?;
    let d_tilde = match params.d_tilde {
        Some(d) => d,
        None => theory_d_tilde(&norm, params.epsilon)?,
    };
    let hat = build_hat_tree(&norm, &dec, d_tilde)?;
    let provider = x_provider(&hat, params)?;
    let mut engine = Engine::new(&hat, params);
    engine.run(&*provider)?;
    let (key, value) = engine.best()?;
    let pieces = engine.reconstruct(&key)?;
    let mut tours = Vec::with_capacity(pieces.len());
    for p in pieces {
        if p.demand() > k {
            return Err(Error::Internal(format!("rebuilt subtour of demand {} exceeds capacity", p.demand())));
        }
        tours.push(Tour::from_terminals(p.terminals));
    }
    let on_hat = Solution::new(&hat.instance, tours);
    if on_hat.cost() != value {
        return Err(Error::Internal(format!("rebuilt cost {} differs from table value {value}", on_hat.cost())));
    }
    let lifted = lift_solution(&norm, &hat, &on_hat)?;
    let solution = map.pull_back(instance, &lifted)?;
    let check = verify(instance, &solution);
    if !check.feasible {
        return Err(Error::Internal(format!("final solution infeasible: {:?}", check.violations.first())));
    }
    let report = PtasReport {
        components: dec.len(),
        critical_vertices: hat.critical.len(),
        dp_states: engine.work.used,
        hat_cost: on_hat.cost(),
        ..empty_report(d_tilde)
    };
    Ok(PtasOutput { solution, report })
}
