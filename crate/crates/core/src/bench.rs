//! Runs algorithms over a corpus, verifies every output and tabulates cost
//! against the edge-load bound.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{lb_edge, LbMode};
use crate::error::Result;
use crate::model::{format_rational, Instance};
use crate::solver::{solve, SolveMeta, SolveOptions};

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub instance: String,
    pub label: String,
    pub terminals: usize,
    pub capacity: u32,
    pub cost: String,
    pub lb_edge_ceiling: String,
    /// `cost / lb` to six decimals, `"-"` when the bound is 0.
    pub ratio: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
    pub meta: SolveMeta,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

fn ratio(cost: u64, lb: &crate::bounds::Rational) -> String {
    if *lb.numer() == 0 {
        return "-".into();
    }
    // cost / lb rounded to 6 decimals, in integers
    let scaled = (cost as u128 * lb.denom() * 1_000_000 * 2 + lb.numer()) / (2 * lb.numer());
    format!("{}.{:06}", scaled / 1_000_000, scaled % 1_000_000)
}

/// Labelled solver configurations for one instance.
pub type ConfigFn<'a> = dyn Fn(&Instance) -> Result<Vec<(String, SolveOptions)>> + Sync + 'a;

/// Runs every labelled configuration on every named instance. Instances run
/// concurrently; rows come out in corpus order, then configuration order.
/// Any infeasible output or solver error aborts the run.
pub fn run_bench(corpus: &[(String, Instance)], configs: &ConfigFn<'_>, timings: bool) -> Result<BenchReport> {
    let rows: Vec<Vec<BenchRow>> = corpus
        .par_iter()
        .map(|(name, inst)| {
            let lb = lb_edge(inst, LbMode::Ceiling);
            configs(inst)?
                .iter()
                .map(|(label, opts)| {
                    let start = Instant::now();
                    let out = solve(inst, opts)?;
                    let elapsed = start.elapsed().as_secs_f64() * 1e3;
                    Ok(BenchRow {
                        instance: name.clone(),
                        label: label.clone(),
                        terminals: inst.terminals().len(),
                        capacity: inst.capacity(),
                        cost: out.meta.cost.clone(),
                        lb_edge_ceiling: format_rational(*lb.numer(), *lb.denom() * inst.scale() as u128),
                        ratio: ratio(out.solution.cost(), &lb),
                        runtime_ms: timings.then_some(elapsed),
                        meta: out.meta,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(BenchReport { rows: rows.into_iter().flatten().collect() })
}

/// Plain-text table of a report.
pub fn render_table(report: &BenchReport) -> String {
    let mut header = vec!["instance", "algo", "n'", "k", "cost", "lb_edge", "ratio"];
    let timed = report.rows.iter().any(|r| r.runtime_ms.is_some());
    if timed {
        header.push("ms");
    }
    let mut cells: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
    for r in &report.rows {
        let mut row = vec![
            r.instance.clone(),
            r.label.clone(),
            r.terminals.to_string(),
            r.capacity.to_string(),
            r.cost.clone(),
            r.lb_edge_ceiling.clone(),
            r.ratio.clone(),
        ];
        if timed {
            row.push(r.runtime_ms.map_or("-".into(), |t| format!("{t:.2}")));
        }
        cells.push(row);
    }
    let widths: Vec<usize> =
        (0..cells[0].len()).map(|c| cells.iter().map(|row| row[c].len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for row in cells {
        let line: Vec<String> = row.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::star;
    use crate::solver::Algorithm;

    #[test]
    fn ratios() {
        let lb = crate::bounds::Rational::new(12, 1);
        assert_eq!(ratio(12, &lb), "1.000000");
        assert_eq!(ratio(16, &lb), "1.333333");
        assert_eq!(ratio(5, &crate::bounds::Rational::new(0, 1)), "-");
    }

    #[test]
    fn table_and_determinism() {
        let corpus = vec![("s".to_string(), star(&[1, 1, 4], 2).unwrap())];
        let configs = vec![
            ("exact".to_string(), SolveOptions::new(Algorithm::Exact)),
            ("itp".to_string(), SolveOptions::new(Algorithm::Itp)),
        ];
        let f = |_: &Instance| Ok(configs.clone());
        let a = run_bench(&corpus, &f, false).unwrap();
        let b = run_bench(&corpus, &f, false).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let t = render_table(&a);
        assert!(t.lines().nth(1).unwrap().ends_with("1.000000"));
    }
}
