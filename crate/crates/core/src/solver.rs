//! One entry point for every algorithm, with optional distance banding and
//! splittable handling, producing a verified solution and its metadata.

use serde::Serialize;

use crate::baselines::{exact_config_dp, greedy, itp_search};
use crate::bounds::{lb_edge, LbMode};
use crate::budget::Budgets;
use crate::error::{Error, Result};
use crate::model::{format_rational, verify, Instance, Solution};
use crate::ptas_dp::{inverse_epsilon, solve_ptas, PtasParams, PtasReport};
use crate::splittable::{contract_solution, expand, peel_full_tours};
use crate::transforms::{has_bounded_distances, solve_banded, OffsetMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Ptas,
    Itp,
    /// The configuration-DP oracle.
    Exact,
    Greedy,
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ptas" => Ok(Self::Ptas),
            "itp" => Ok(Self::Itp),
            "exact" => Ok(Self::Exact),
            "greedy" => Ok(Self::Greedy),
            other => Err(Error::Parse(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub algorithm: Algorithm,
    /// Required for [`Algorithm::Ptas`].
    pub ptas: Option<PtasParams>,
    /// `(1/ε, offset mode)` for the distance-band reduction.
    pub bands: Option<(u32, OffsetMode)>,
    pub splittable: bool,
    /// Peeling threshold; only used with `splittable`.
    pub peel: Option<u64>,
    pub budgets: Budgets,
}

impl SolveOptions {
    pub fn new(algorithm: Algorithm) -> Self {
        Self { algorithm, ptas: None, bands: None, splittable: false, peel: None, budgets: Budgets::default() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BandsMeta {
    pub inv_eps: u32,
    pub offset_mode: OffsetMode,
    pub chosen_offset: u32,
    pub costs: Vec<(u32, String)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SplittableMeta {
    pub expanded_vertices: usize,
    pub peel_threshold: Option<u64>,
    pub prepaid_tours: usize,
    /// Set whenever tours were peeled: optimality is not preserved.
    pub heuristic_preprocessing: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveMeta {
    pub algorithm: Algorithm,
    pub capacity: u32,
    pub terminals: usize,
    pub total_demand: u64,
    pub tours: usize,
    pub cost: String,
    pub lb_edge_ceiling: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ptas_params: Option<PtasParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ptas: Option<PtasReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theory_guarantee: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub itp_offset: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bands: Option<BandsMeta>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub splittable: Option<SplittableMeta>,
}

#[derive(Clone, Debug)]
pub struct SolveOutput {
    pub solution: Solution,
    pub meta: SolveMeta,
}

#[derive(Default)]
struct Side {
    ptas: Option<PtasReport>,
    itp_offset: Option<usize>,
}

fn base_solve(instance: &Instance, opts: &SolveOptions) -> Result<(Solution, Side)> {
    let mut side = Side::default();
    let sol = match opts.algorithm {
        Algorithm::Ptas => {
            let params = opts.ptas.as_ref().ok_or_else(|| Error::Validation("ptas needs parameters".into()))?;
            let out = solve_ptas(instance, params)?;
            side.ptas = Some(out.report);
            out.solution
        }
        Algorithm::Itp => {
            let (o, sol) = itp_search(instance);
            side.itp_offset = Some(o);
            sol
        }
        Algorithm::Exact => exact_config_dp(instance, &opts.budgets)?,
        Algorithm::Greedy => greedy(instance),
    };
    Ok((sol, side))
}

fn unit_solve(instance: &Instance, opts: &SolveOptions) -> Result<(Solution, Side, Option<BandsMeta>)> {
    match opts.bands {
        None => {
            let (sol, side) = base_solve(instance, opts)?;
            Ok((sol, side, None))
        }
        Some((inv_eps, mode)) => {
            let out = solve_banded(instance, inv_eps, mode, |sub| base_solve(sub, opts).map(|r| r.0))?;
            let meta = BandsMeta {
                inv_eps,
                offset_mode: mode,
                chosen_offset: out.i0,
                costs: out.costs.iter().map(|&(i, c)| (i, instance.format_units(c as u128))).collect(),
            };
            Ok((out.solution, Side::default(), Some(meta)))
        }
    }
}

/// The scheme's guarantee needs terminal distances within a bounded ratio,
/// either by construction or through the band reduction.
fn distances_bounded(instance: &Instance, params: &PtasParams, opts: &SolveOptions) -> bool {
    if opts.bands.is_some() {
        return true;
    }
    match inverse_epsilon(params.epsilon) {
        Ok(inv) if inv >= 2 => has_bounded_distances(instance, &instance.terminals(), inv as u32),
        _ => false,
    }
}

/// Solves `instance` and verifies the result before returning it.
pub fn solve(instance: &Instance, opts: &SolveOptions) -> Result<SolveOutput> {
    if !opts.splittable && !instance.is_unit_demand() {
        return Err(Error::Validation("instance has non-unit demands; solve it as splittable".into()));
    }
    let (solution, side, bands, split) = if opts.splittable {
        let (reduced, prepaid) = peel_full_tours(instance, opts.peel)?;
        let (unit, map) = expand(&reduced, &opts.budgets)?;
        let (sol, side, bands) = unit_solve(&unit, opts)?;
        let back = contract_solution(&reduced, &map, &sol)?;
        let meta = SplittableMeta {
            expanded_vertices: unit.n(),
            peel_threshold: opts.peel,
            prepaid_tours: prepaid.len(),
            heuristic_preprocessing: !prepaid.is_empty(),
        };
        let mut tours = back.into_tours();
        tours.extend(prepaid);
        (Solution::new(instance, tours), side, bands, Some(meta))
    } else {
        let (sol, side, bands) = unit_solve(instance, opts)?;
        (sol, side, bands, None)
    };
    let report = verify(instance, &solution);
    if !report.feasible {
        return Err(Error::Infeasible(format!("{:?} produced {:?}", opts.algorithm, report.violations.first())));
    }
    let lb = lb_edge(instance, LbMode::Ceiling);
    let meta = SolveMeta {
        algorithm: opts.algorithm,
        capacity: instance.capacity(),
        terminals: instance.terminals().len(),
        total_demand: instance.total_demand(),
        tours: solution.tours().len(),
        cost: instance.format_units(solution.cost() as u128),
        lb_edge_ceiling: format_rational(*lb.numer(), *lb.denom() * instance.scale() as u128),
        theory_guarantee: opts
            .ptas
            .as_ref()
            .filter(|_| opts.algorithm == Algorithm::Ptas)
            .map(|p| p.theory_guarantee(instance.capacity()) && distances_bounded(instance, p, opts)),
        ptas_params: opts.ptas.clone().filter(|_| opts.algorithm == Algorithm::Ptas),
        ptas: side.ptas,
        itp_offset: side.itp_offset,
        bands,
        splittable: split,
    };
    Ok(SolveOutput { solution, meta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::star;

    #[test]
    fn splittable_needs_flag() {
        let inst = Instance::from_edges(2, 0, &[(1, 0, 1)], &[(1, 3)], 2, 1).unwrap();
        let opts = SolveOptions::new(Algorithm::Exact);
        assert!(solve(&inst, &opts).is_err());
        let out = solve(&inst, &SolveOptions { splittable: true, ..opts }).unwrap();
        assert_eq!(out.solution.cost(), 4);
        assert_eq!(out.meta.splittable.unwrap().expanded_vertices, 6);
    }

    #[test]
    fn metadata_records_algorithm() {
        let inst = star(&[1, 1, 4], 2).unwrap();
        let out = solve(&inst, &SolveOptions::new(Algorithm::Itp)).unwrap();
        assert_eq!(out.meta.itp_offset, Some(0));
        assert_eq!(out.meta.cost, "12");
        assert_eq!(out.meta.lb_edge_ceiling, "12");
    }
}
