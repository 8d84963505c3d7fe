use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use tree_cvrp::bench::{render_table, run_bench};
use tree_cvrp::bounds::{lb_edge, lb_radial, tree_tsp_cost, LbMode, Rational};
use tree_cvrp::budget::Budgets;
use tree_cvrp::decomposition::{check_decomposition, decompose, sum_component_root_distances};
use tree_cvrp::generate::{caterpillar, fig5, random_binary, random_tree, star};
use tree_cvrp::model::io::{read_instance, read_solution, solution_to_json, write_instance};
use tree_cvrp::model::{format_rational, is_normalized, normalize, verify, Instance};
use tree_cvrp::ptas_dp::{theory_d_tilde, PtasParams};
use tree_cvrp::solver::{solve, Algorithm, SolveOptions};
use tree_cvrp::transforms::{build_hat_tree, has_bounded_distances, split_by_distance, OffsetMode};
use tree_cvrp::Error;

#[derive(Parser)]
#[command(name = "tree-cvrp", version, about = "Capacitated vehicle routing on trees")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate an instance.
    Gen(GenArgs),
    /// Solve an instance and write the verified solution with metadata.
    Solve(SolveArgs),
    /// Check a solution against an instance.
    Verify { instance: PathBuf, solution: PathBuf },
    /// Lower bounds and tree-TSP cost.
    Lb { instance: PathBuf },
    /// Component decomposition of the normalized instance.
    Decompose {
        instance: PathBuf,
        #[arg(long)]
        gamma_k: u64,
    },
    /// Hat tree or distance bands.
    Transform {
        instance: PathBuf,
        #[command(subcommand)]
        kind: TransformKind,
    },
    /// Run several algorithms over a corpus.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    RandomBinary,
    RandomTree,
    Caterpillar,
    Star,
    Fig5,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long, default_value_t = 8)]
    terminals: usize,
    /// Vertex count for random_tree.
    #[arg(long, default_value_t = 12)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    k: u32,
    #[arg(long, default_value_t = 5)]
    max_weight: u64,
    #[arg(long, default_value_t = 1)]
    max_demand: u32,
    /// Spine length for caterpillar.
    #[arg(long, default_value_t = 9)]
    len: usize,
    /// Comma-separated leaf weights for star.
    #[arg(long, default_value = "1,1,4")]
    weights: String,
    /// Subtree count for fig5.
    #[arg(long, default_value_t = 3)]
    m: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct PtasArgs {
    /// ε = 1/m.
    #[arg(long, default_value = "1/2")]
    eps: String,
    /// Caps that never bind (exact search on small instances).
    #[arg(long)]
    exhaustive: bool,
    /// `L=..,M=..,xsize=..,sumcap=..,xstrategy=..,gammak=..,dtilde=..`
    #[arg(long = "override")]
    overrides: Option<String>,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, default_value = "ptas")]
    algo: String,
    #[command(flatten)]
    ptas: PtasArgs,
    /// Split terminals into distance bands with base 1/ε = INV.
    #[arg(long)]
    bands: Option<u32>,
    /// `best` or `random:SEED`.
    #[arg(long, default_value = "best")]
    offset: String,
    #[arg(long)]
    splittable: bool,
    /// Peel full tours from terminals with demand above PEEL·k (splittable only).
    #[arg(long)]
    peel: Option<u64>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum TransformKind {
    Hat {
        #[arg(long)]
        gamma_k: u64,
        #[arg(long)]
        d_tilde: Option<u64>,
        #[arg(long, default_value = "1/2")]
        eps: String,
    },
    Bands {
        #[arg(long)]
        inv_eps: u32,
        #[arg(long, default_value_t = 0)]
        i0: u32,
    },
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of instance files (`*.json`, by name).
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "random-binary")]
    family: Family,
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[arg(long, default_value_t = 8)]
    terminals: usize,
    #[arg(long, default_value_t = 3)]
    k: u32,
    #[arg(long, default_value_t = 5)]
    max_weight: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated: exact, itp, greedy, ptas.
    #[arg(long, default_value = "exact,itp,greedy")]
    algos: String,
    #[command(flatten)]
    ptas: PtasArgs,
    #[arg(long)]
    json: Option<PathBuf>,
    /// Record runtimes (makes the report non-reproducible).
    #[arg(long)]
    timings: bool,
}

fn parse_eps(s: &str) -> tree_cvrp::Result<num_rational::Ratio<u64>> {
    s.parse().map_err(|_| Error::Parse(format!("bad epsilon {s:?}")))
}

fn load(path: &Path) -> anyhow::Result<Instance> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(read_instance(&bytes)?)
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value");
    s.push('\n');
    s
}

fn fmt_units(inst: &Instance, r: &Rational) -> String {
    format_rational(*r.numer(), *r.denom() * inst.scale() as u128)
}

fn ptas_params(inst: &Instance, args: &PtasArgs, budgets: Budgets) -> tree_cvrp::Result<PtasParams> {
    let eps = parse_eps(&args.eps)?;
    let k = inst.capacity();
    let base = PtasParams::from_epsilon(eps, k)?;
    let mut p =
        if args.exhaustive { PtasParams { epsilon: eps, ..PtasParams::exhaustive(inst, base.gamma_k) } } else { base };
    if let Some(o) = &args.overrides {
        p = p.with_overrides(o)?;
    }
    p.budgets = budgets;
    Ok(p)
}

fn gen(a: &GenArgs) -> anyhow::Result<()> {
    let inst = match a.family {
        Family::RandomBinary => random_binary(a.terminals, a.k, a.max_weight, a.seed)?,
        Family::RandomTree => random_tree(a.n, a.k, a.max_weight, a.max_demand, a.seed)?,
        Family::Caterpillar => caterpillar(a.len, a.k)?,
        Family::Star => {
            let w: Vec<u64> = a
                .weights
                .split(',')
                .map(|s| s.trim().parse::<u64>().map_err(|_| Error::Parse(format!("bad weight {s:?}"))))
                .collect::<Result<_, _>>()?;
            star(&w, a.k)?
        }
        Family::Fig5 => fig5(a.k, a.m)?.instance,
    };
    emit(a.out.as_deref(), &write_instance(&inst))
}

fn solve_cmd(a: &SolveArgs) -> anyhow::Result<()> {
    let inst = load(&a.instance)?;
    let budgets = Budgets::from_env()?;
    let algorithm: Algorithm = a.algo.parse()?;
    let offset = match a.offset.as_str() {
        "best" => OffsetMode::Best,
        s => match s.strip_prefix("random:").and_then(|n| n.parse().ok()) {
            Some(seed) => OffsetMode::Random(seed),
            None => bail!(Error::Parse(format!("offset must be best or random:SEED, got {s:?}"))),
        },
    };
    let opts = SolveOptions {
        algorithm,
        ptas: if algorithm == Algorithm::Ptas { Some(ptas_params(&inst, &a.ptas, budgets)?) } else { None },
        bands: a.bands.map(|b| (b, offset)),
        splittable: a.splittable,
        peel: a.peel,
        budgets,
    };
    let out = solve(&inst, &opts)?;
    let mut doc = solution_to_json(&inst, &out.solution);
    doc["metadata"] = serde_json::to_value(&out.meta)?;
    emit(a.out.as_deref(), &pretty(&doc))
}

fn verify_cmd(instance: &Path, solution: &Path) -> anyhow::Result<()> {
    let inst = load(instance)?;
    let bytes = fs::read(solution).with_context(|| format!("reading {}", solution.display()))?;
    let sol = read_solution(&bytes, &inst)?;
    let report = verify(&inst, &sol);
    print!(
        "{}",
        pretty(&json!({
            "feasible": report.feasible,
            "violations": report.violations,
            "cost": inst.format_units(report.total_cost as u128),
        }))
    );
    if !report.feasible {
        bail!(Error::Infeasible(format!("{} violation(s)", report.violations.len())));
    }
    Ok(())
}

fn lb_cmd(instance: &Path) -> anyhow::Result<()> {
    let inst = load(instance)?;
    let tsp = tree_tsp_cost(&inst, &inst.terminals());
    print!(
        "{}",
        pretty(&json!({
            "edge_ceiling": fmt_units(&inst, &lb_edge(&inst, LbMode::Ceiling)),
            "edge_fractional": fmt_units(&inst, &lb_edge(&inst, LbMode::Fractional)),
            "radial": fmt_units(&inst, &lb_radial(&inst)),
            "tree_tsp": inst.format_units(tsp as u128),
        }))
    );
    Ok(())
}

fn normalized(inst: &Instance) -> anyhow::Result<Instance> {
    Ok(if is_normalized(inst) { inst.clone() } else { normalize(inst)?.0 })
}

fn decompose_cmd(instance: &Path, gamma_k: u64) -> anyhow::Result<()> {
    let inst = normalized(&load(instance)?)?;
    let dec = decompose(&inst, gamma_k)?;
    let check = check_decomposition(&inst, &dec, gamma_k);
    print!(
        "{}",
        pretty(&json!({
            "vertices": inst.n(),
            "decomposition": dec,
            "check": check,
            "sum_root_distances": inst.format_units(sum_component_root_distances(&inst, &dec) as u128),
        }))
    );
    if !check.ok {
        bail!(Error::Internal("decomposition check failed".into()));
    }
    Ok(())
}

fn transform_cmd(instance: &Path, kind: &TransformKind) -> anyhow::Result<()> {
    let raw = load(instance)?;
    let doc = match kind {
        TransformKind::Hat { gamma_k, d_tilde, eps } => {
            let inst = normalized(&raw)?;
            let dec = decompose(&inst, *gamma_k)?;
            let d = match d_tilde {
                Some(d) => *d,
                None => theory_d_tilde(&inst, parse_eps(eps)?)?,
            };
            let hat = build_hat_tree(&inst, &dec, d)?;
            json!({
                "d_tilde": d,
                "vertices": hat.instance.n(),
                "critical": hat.critical,
                "components": hat.components,
            })
        }
        TransformKind::Bands { inv_eps, i0 } => {
            let bands = split_by_distance(&raw, *inv_eps, *i0)?;
            let sets: Vec<Value> = bands
                .sets
                .iter()
                .map(|s| {
                    json!({
                        "tag": s.tag,
                        "terminals": s.terminals,
                        "bounded": has_bounded_distances(&raw, &s.terminals, *inv_eps),
                    })
                })
                .collect();
            json!({ "inv_eps": inv_eps, "i0": i0, "at_depot": bands.at_depot, "sets": sets })
        }
    };
    print!("{}", pretty(&doc));
    Ok(())
}

fn bench_cmd(a: &BenchArgs) -> anyhow::Result<()> {
    let budgets = Budgets::from_env()?;
    let (corpus, source): (Vec<(String, Instance)>, Value) = match &a.corpus {
        Some(dir) => {
            let mut files: Vec<PathBuf> = fs::read_dir(dir)
                .with_context(|| format!("reading {}", dir.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            files.sort();
            let mut out = Vec::new();
            for f in &files {
                let name = f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                out.push((name, load(f)?));
            }
            (out, json!({ "dir": dir.display().to_string() }))
        }
        None => {
            let mut out = Vec::new();
            for i in 0..a.count {
                let seed = a.seed.wrapping_add(i as u64);
                let inst = match a.family {
                    Family::RandomBinary => random_binary(a.terminals, a.k, a.max_weight, seed)?,
                    Family::RandomTree => random_tree(2 * a.terminals, a.k, a.max_weight, 1, seed)?,
                    Family::Caterpillar => caterpillar(a.terminals.max(2) - 1, a.k)?,
                    Family::Star => star(&vec![1; a.terminals], a.k)?,
                    Family::Fig5 => fig5(a.k, 3)?.instance,
                };
                out.push((format!("{i:04}"), inst));
            }
            let family = a.family.to_possible_value().map(|v| v.get_name().to_string());
            (
                out,
                json!({
                    "family": family, "count": a.count, "terminals": a.terminals,
                    "k": a.k, "max_weight": a.max_weight, "seed": a.seed,
                }),
            )
        }
    };
    let mut algos = Vec::new();
    for name in a.algos.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        algos.push((name.to_string(), name.parse::<Algorithm>()?));
    }
    // PTAS parameters depend on the instance, so configurations are built per run.
    let configs = |inst: &Instance| {
        algos
            .iter()
            .map(|(label, algorithm)| {
                let mut o = SolveOptions { budgets, ..SolveOptions::new(*algorithm) };
                if *algorithm == Algorithm::Ptas {
                    o.ptas = Some(ptas_params(inst, &a.ptas, budgets)?);
                }
                Ok((label.clone(), o))
            })
            .collect()
    };
    let report = run_bench(&corpus, &configs, a.timings)?;
    print!("{}", render_table(&report));
    if let Some(path) = &a.json {
        let doc = json!({ "corpus": source, "report": report });
        fs::write(path, pretty(&doc)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match &cli.cmd {
        Cmd::Gen(a) => gen(a),
        Cmd::Solve(a) => solve_cmd(a),
        Cmd::Verify { instance, solution } => verify_cmd(instance, solution),
        Cmd::Lb { instance } => lb_cmd(instance),
        Cmd::Decompose { instance, gamma_k } => decompose_cmd(instance, *gamma_k),
        Cmd::Transform { instance, kind } => transform_cmd(instance, kind),
        Cmd::Bench(a) => bench_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::Budget(_)) => ExitCode::from(3),
                _ => ExitCode::from(1),
            }
        }
    }
}
