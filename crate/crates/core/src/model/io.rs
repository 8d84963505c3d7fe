//! JSON instance and solution files.
//!
//! Instance: `{"n", "root", "edges": [{"child", "parent", "weight"}],
//! "terminals": [{"v", "demand"}], "capacity"}` with weights written as
//! rational strings (`"3"`, `"3/2"`, or `"1.5"` on input).
//! Solution: `{"tours": [{"claims": [{"v", "units"}]}], "cost"}`.

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::instance::{format_rational, Instance, VertexId};
use super::solution::{Claim, Solution, Tour};

#[derive(Serialize, Deserialize)]
struct EdgeRecord {
    child: VertexId,
    parent: VertexId,
    weight: String,
}

fn unit_demand() -> u32 {
    1
}

#[derive(Serialize, Deserialize)]
struct TerminalRecord {
    v: VertexId,
    #[serde(default = "unit_demand")]
    demand: u32,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    n: usize,
    root: VertexId,
    edges: Vec<EdgeRecord>,
    terminals: Vec<TerminalRecord>,
    capacity: u32,
}

#[derive(Serialize, Deserialize)]
struct ClaimRecord {
    v: VertexId,
    units: u32,
}

#[derive(Serialize, Deserialize)]
struct TourRecord {
    claims: Vec<ClaimRecord>,
}

#[derive(Serialize, Deserialize)]
struct SolutionFile {
    tours: Vec<TourRecord>,
    cost: String,
}

/// Parses `"p"`, `"p/q"` or a decimal literal into an exact rational.
pub fn parse_rational(s: &str) -> Result<Ratio<i128>> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational {s:?}"));
    if let Some((int, frac)) = s.split_once('.') {
        let negative = int.starts_with('-');
        let int_part: i128 = if int.is_empty() || int == "-" { 0 } else { int.parse().map_err(|_| bad())? };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 30 {
            return Err(bad());
        }
        let den = 10i128.pow(frac.len() as u32);
        let frac_num: i128 = frac.parse().map_err(|_| bad())?;
        let mag = int_part.abs() * den + frac_num;
        return Ok(Ratio::new(if negative { -mag } else { mag }, den));
    }
    let r: Ratio<i128> = s.parse().map_err(|_| bad())?;
    Ok(r)
}

pub fn read_instance(bytes: &[u8]) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_slice(bytes).map_err(|e| Error::Parse(e.to_string()))?;
    let mut weights = Vec::with_capacity(file.edges.len());
    for e in &file.edges {
        let w =
            parse_rational(&e.weight).map_err(|err| Error::Parse(format!("edge child {}: weight: {err}", e.child)))?;
        if w < Ratio::from_integer(0) {
            return Err(Error::Validation(format!("edge child {} has negative weight {}", e.child, e.weight)));
        }
        weights.push(w);
    }
    let scale = weights.iter().fold(1i128, |acc, w| acc.lcm(w.denom()));
    let scale_u64 = u64::try_from(scale).map_err(|_| Error::Validation("weight denominators too large".into()))?;
    let mut edges = Vec::with_capacity(file.edges.len());
    for (e, w) in file.edges.iter().zip(&weights) {
        let units = w.numer() * (scale / w.denom());
        let units = u64::try_from(units).map_err(|_| Error::Validation("edge weight too large".into()))?;
        edges.push((e.child, e.parent, units));
    }
    if file.edges.len() + 1 != file.n {
        return Err(Error::Validation(format!(
            "{} vertices need {} edges, found {}",
            file.n,
            file.n.saturating_sub(1),
            file.edges.len()
        )));
    }
    let terminals: Vec<_> = file.terminals.iter().map(|t| (t.v, t.demand)).collect();
    Instance::from_edges(file.n, file.root, &edges, &terminals, file.capacity, scale_u64)
}

pub fn write_instance(instance: &Instance) -> String {
    let edges = (0..instance.n())
        .filter(|&v| v != instance.root())
        .map(|v| EdgeRecord {
            child: v,
            parent: instance.parent(v).expect("non-root has parent"),
            weight: instance.format_units(instance.weight(v) as u128),
        })
        .collect();
    let terminals =
        instance.terminals().into_iter().map(|v| TerminalRecord { v, demand: instance.demand(v) }).collect();
    let file = InstanceFile { n: instance.n(), root: instance.root(), edges, terminals, capacity: instance.capacity() };
    let mut s = serde_json::to_string_pretty(&file).expect("instance serializes");
    s.push('\n');
    s
}

fn solution_file(instance: &Instance, solution: &Solution) -> SolutionFile {
    SolutionFile {
        tours: solution
            .tours()
            .iter()
            .map(|t| TourRecord { claims: t.claims().iter().map(|c| ClaimRecord { v: c.v, units: c.units }).collect() })
            .collect(),
        cost: instance.format_units(solution.cost() as u128),
    }
}

pub fn solution_to_json(instance: &Instance, solution: &Solution) -> serde_json::Value {
    serde_json::to_value(solution_file(instance, solution)).expect("solution serializes")
}

pub fn write_solution(instance: &Instance, solution: &Solution) -> String {
    let mut s = serde_json::to_string_pretty(&solution_file(instance, solution)).expect("solution serializes");
    s.push('\n');
    s
}

/// Reads a solution for `instance`. The stated cost must match the
/// recomputed canonical cost.
pub fn read_solution(bytes: &[u8], instance: &Instance) -> Result<Solution> {
    let file: SolutionFile = serde_json::from_slice(bytes).map_err(|e| Error::Parse(e.to_string()))?;
    let tours = file
        .tours
        .iter()
        .map(|t| Tour::new(t.claims.iter().map(|c| Claim { v: c.v, units: c.units }).collect()))
        .collect();
    let solution = Solution::new(instance, tours);
    let stated = parse_rational(&file.cost).map_err(|e| Error::Parse(format!("cost: {e}")))?;
    let actual = Ratio::new(solution.cost() as i128, instance.scale() as i128);
    if stated != actual {
        return Err(Error::Validation(format!(
            "stated cost {} differs from recomputed {}",
            file.cost,
            format_rational(solution.cost() as u128, instance.scale() as u128)
        )));
    }
    Ok(solution)
}
