//! Command-line harness for the cluster routing solvers: generate instances,
//! run a solver or the exact oracle, verify solution files, and execute
//! seeded benchmark sweeps with ratio reports.
//!
//! Exit codes: 0 success, 2 infeasible instance, 3 bound or validity
//! violation, 4 configuration error.

use std::fmt::Write as _;
use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use gcrp_core::graphkit::Walk;
use gcrp_core::instance::{
    classify, generate_random, parse_instance, serialize_instance, CrossMode, EndpointsMode,
    GenParams, MetricInstance, Status,
};
use gcrp_core::metric::Cost;
use gcrp_core::oracle::{exact_gcrp, OracleConfig};
use gcrp_core::runner::{run_bench, run_bench_with, BenchAlgorithm, BenchConfig};
use gcrp_core::solver::{
    solve, solve_specified, solve_unspecified_cross, solve_unspecified_intra, GcrpSolution,
    SolveError,
};
use gcrp_core::validity::check_tour;

const EXIT_INFEASIBLE: u8 = 2;
const EXIT_VIOLATION: u8 = 3;
const EXIT_CONFIG: u8 = 4;

#[derive(Parser)]
#[command(
    name = "gcrp",
    about = "Cluster routing solvers and benchmarks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance file.
    Gen(GenArgs),
    /// Solve an instance and emit a solution document.
    Solve(SolveArgs),
    /// Compute the exact optimum of an instance.
    Oracle(OracleArgs),
    /// Verify a solution file against its instance.
    Check(CheckArgs),
    /// Run a seeded benchmark sweep and emit a ratio report.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "frac-v", default_value_t = 0.5)]
    frac_v: f64,
    #[arg(long = "frac-e", default_value_t = 0.3)]
    frac_e: f64,
    /// Endpoint mode: given | free
    #[arg(long, default_value = "free")]
    ends: String,
    /// Cross-edge layout: auto | none | chain | matching | cycle
    #[arg(long, default_value = "auto")]
    cross: String,
    /// Coordinate grid side length.
    #[arg(long = "box", default_value_t = 1000)]
    coordinate_box: i64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    /// alg2 | alg3 | alg4 | auto
    #[arg(long, default_value = "auto")]
    alg: String,
    /// Solution file path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    instance: PathBuf,
    #[arg(long = "oracle-cap")]
    oracle_cap: Option<usize>,
}

#[derive(Args)]
struct CheckArgs {
    instance: PathBuf,
    solution: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Optional config file with the same keys as the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed range, e.g. 0..50
    #[arg(long)]
    seeds: Option<String>,
    /// Comma-separated n:k pairs, e.g. 7:2,8:3
    #[arg(long)]
    sizes: Option<String>,
    #[arg(long = "frac-v")]
    frac_v: Option<f64>,
    #[arg(long = "frac-e")]
    frac_e: Option<f64>,
    /// Comma-separated subset of alg2,alg3,alg4
    #[arg(long)]
    algs: Option<String>,
    #[arg(long = "oracle-cap")]
    oracle_cap: Option<usize>,
    /// Skip oracle optima (no ratio columns).
    #[arg(long = "no-oracle", default_value_t = false)]
    no_oracle: bool,
    /// Report destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Harness self-test: inflate reported costs so the bound check must fire.
    #[arg(long = "self-test-broken-solver", hide = true, default_value_t = false)]
    broken_solver: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Check(args) => cmd_check(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn cmd_gen(args: GenArgs) -> Result<u8> {
    let endpoints_mode = match args.ends.as_str() {
        "given" => EndpointsMode::Given,
        "free" => EndpointsMode::Free,
        other => {
            eprintln!("error: --ends must be given|free, got '{other}'");
            return Ok(EXIT_CONFIG);
        }
    };
    let cross_mode = match args.cross.as_str() {
        "auto" => CrossMode::Auto,
        "none" => CrossMode::None,
        "chain" => CrossMode::Chain,
        "matching" => CrossMode::Matching,
        "cycle" => CrossMode::Cycle,
        other => {
            eprintln!("error: --cross must be auto|none|chain|matching|cycle, got '{other}'");
            return Ok(EXIT_CONFIG);
        }
    };
    let params = GenParams {
        n: args.n,
        k: args.k,
        frac_required_v: args.frac_v,
        frac_required_e: args.frac_e,
        endpoints_mode,
        cross_mode,
        coordinate_box: args.coordinate_box,
    };
    let inst = match generate_random(&params, args.seed) {
        Ok(inst) => inst,
        Err(err) => {
            eprintln!("error: {err}");
            return Ok(EXIT_CONFIG);
        }
    };
    let text = serialize_instance(&inst);
    match &args.out {
        Some(path) => {
            fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
            println!(
                "wrote {} (n={} k={} seed={})",
                path.display(),
                args.n,
                args.k,
                args.seed
            );
        }
        None => print!("{text}"),
    }
    Ok(0)
}

fn load_instance(path: &Path) -> Result<Result<MetricInstance, u8>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    match parse_instance(&text) {
        Ok(inst) => Ok(Ok(inst)),
        Err(err) => {
            eprintln!("error: {}: {err}", path.display());
            Ok(Err(EXIT_CONFIG))
        }
    }
}

fn cmd_solve(args: SolveArgs) -> Result<u8> {
    let inst = match load_instance(&args.instance)? {
        Ok(inst) => inst,
        Err(code) => return Ok(code),
    };
    let verdict = classify(&inst);
    if verdict.status != Status::Feasible {
        println!(
            "infeasible: {:?} (case {:?}, witness {:?})",
            verdict.status, verdict.case_tag, verdict.witness
        );
        return Ok(EXIT_INFEASIBLE);
    }
    let outcome = match args.alg.as_str() {
        "auto" => solve(&inst),
        "alg2" => solve_specified(&inst),
        "alg3" => solve_unspecified_intra(&inst),
        "alg4" => solve_unspecified_cross(&inst),
        other => {
            eprintln!("error: --alg must be alg2|alg3|alg4|auto, got '{other}'");
            return Ok(EXIT_CONFIG);
        }
    };
    let sol = match outcome {
        Ok(sol) => sol,
        Err(SolveError::WrongCase { expected, got }) => {
            eprintln!(
                "error: algorithm '{}' requires case {expected:?}, but the instance is {got:?}",
                args.alg
            );
            return Ok(EXIT_CONFIG);
        }
        Err(SolveError::Infeasible(v)) => {
            println!("infeasible: {:?} (witness {:?})", v.status, v.witness);
            return Ok(EXIT_INFEASIBLE);
        }
        Err(err) => {
            println!("infeasible structure: {err}");
            return Ok(EXIT_INFEASIBLE);
        }
    };
    let doc = render_solution(&sol);
    println!(
        "{} cost {} tour-len {}",
        sol.algorithm,
        sol.tour.cost,
        sol.tour.seq.len()
    );
    match &args.out {
        Some(path) => {
            fs::write(path, &doc).with_context(|| format!("writing {}", path.display()))?;
        }
        None => print!("{doc}"),
    }
    Ok(0)
}

fn render_solution(sol: &GcrpSolution) -> String {
    let mut out = String::from("gcrp-solution v1\n");
    let _ = writeln!(out, "algorithm {}", sol.algorithm);
    let _ = writeln!(out, "cost {}", sol.tour.cost);
    let seq: Vec<String> = sol.tour.seq.iter().map(|v| v.to_string()).collect();
    let _ = writeln!(out, "tour {}", seq.join(" "));
    for (cluster, (s, t)) in &sol.per_cluster.ends {
        let _ = writeln!(out, "ends {cluster} {s} {t}");
    }
    for (cluster, path) in &sol.per_cluster.paths {
        let seq: Vec<String> = path.seq.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "path {cluster} {}", seq.join(" "));
    }
    out
}

fn parse_solution(text: &str) -> Result<(String, Cost, Vec<usize>)> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| anyhow!("empty solution file"))?;
    if header.trim() != "gcrp-solution v1" {
        return Err(anyhow!("line 1: expected header 'gcrp-solution v1'"));
    }
    let mut algorithm = None;
    let mut cost = None;
    let mut tour = None;
    for (i, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("algorithm ") {
            algorithm = Some(rest.trim().to_string());
        } else if let Some(rest) = line.strip_prefix("cost ") {
            cost = Some(
                rest.trim()
                    .parse::<Cost>()
                    .map_err(|_| anyhow!("line {}: bad cost", i + 1))?,
            );
        } else if let Some(rest) = line.strip_prefix("tour") {
            let seq: Result<Vec<usize>> = rest
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| anyhow!("line {}: bad tour", i + 1))
                })
                .collect();
            tour = Some(seq?);
        }
    }
    Ok((
        algorithm.ok_or_else(|| anyhow!("missing algorithm line"))?,
        cost.ok_or_else(|| anyhow!("missing cost line"))?,
        tour.ok_or_else(|| anyhow!("missing tour line"))?,
    ))
}

fn cmd_check(args: CheckArgs) -> Result<u8> {
    let inst = match load_instance(&args.instance)? {
        Ok(inst) => inst,
        Err(code) => return Ok(code),
    };
    let text = fs::read_to_string(&args.solution)
        .with_context(|| format!("reading {}", args.solution.display()))?;
    let (algorithm, cost, seq) = match parse_solution(&text) {
        Ok(parsed) => parsed,
        Err(err) => {
            eprintln!("error: {}: {err}", args.solution.display());
            return Ok(EXIT_CONFIG);
        }
    };
    let walk = Walk {
        seq,
        closed: true,
        cost,
    };
    let violations = check_tour(&inst, &walk);
    if violations.is_empty() {
        println!("ok: {algorithm} cost {cost} passes all validity checks");
        Ok(0)
    } else {
        for v in &violations {
            println!("violation: {v}");
        }
        Ok(EXIT_VIOLATION)
    }
}

fn cmd_oracle(args: OracleArgs) -> Result<u8> {
    let inst = match load_instance(&args.instance)? {
        Ok(inst) => inst,
        Err(code) => return Ok(code),
    };
    let cfg = OracleConfig {
        gcrp_cap: args.oracle_cap,
        ..OracleConfig::default()
    };
    match exact_gcrp(&inst, &cfg) {
        Ok(res) => {
            let seq: Vec<String> = res.witness.seq.iter().map(|v| v.to_string()).collect();
            println!("optimum {}", res.opt_cost);
            println!("witness {}", seq.join(" "));
            println!("nodes-explored {}", res.nodes_explored);
            Ok(0)
        }
        Err(gcrp_core::oracle::OracleError::Infeasible(msg)) => {
            println!("infeasible: {msg}");
            Ok(EXIT_INFEASIBLE)
        }
        Err(gcrp_core::oracle::OracleError::CapExceeded { what, size, cap }) => {
            eprintln!("error: {what} size {size} exceeds cap {cap}");
            Ok(EXIT_CONFIG)
        }
        Err(err) => {
            eprintln!("error: {err}");
            Ok(EXIT_CONFIG)
        }
    }
}

fn cmd_bench(args: BenchArgs) -> Result<u8> {
    let config = match build_bench_config(&args)? {
        Ok(config) => config,
        Err(code) => return Ok(code),
    };
    let outcome = if args.broken_solver {
        run_bench_with(&config, |inst| {
            let mut sol = solve(inst)?;
            sol.tour.cost = sol.tour.cost.saturating_mul(5) + 1;
            Ok(sol)
        })
    } else {
        run_bench(&config)
    };
    let report = match outcome {
        Ok(report) => report,
        Err(err @ gcrp_core::runner::BenchError::OracleCapTooSmall { .. }) => {
            eprintln!("error: {err}");
            return Ok(EXIT_CONFIG);
        }
        Err(err) => {
            eprintln!("error: {err}");
            return Ok(1);
        }
    };
    let tsv = report.to_tsv();
    match &args.out {
        Some(path) => {
            fs::write(path, &tsv).with_context(|| format!("writing {}", path.display()))?;
            println!("wrote {} ({} rows)", path.display(), report.rows.len());
        }
        None => print!("{tsv}"),
    }
    print!("{}", report.summary());
    Ok(report.suggested_exit() as u8)
}

/// Layer the optional config file under the flags; flags win.
fn build_bench_config(args: &BenchArgs) -> Result<Result<BenchConfig, u8>> {
    let mut file_kv: Vec<(String, String)> = Vec::new();
    if let Some(path) = &args.config {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line.split_once(char::is_whitespace) {
                Some((k, v)) => file_kv.push((k.to_string(), v.trim().to_string())),
                None => {
                    eprintln!("error: {}: bad config line '{line}'", path.display());
                    return Ok(Err(EXIT_CONFIG));
                }
            }
        }
    }
    let from_file = |key: &str| -> Option<String> {
        file_kv
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.clone())
    };

    let mut config = BenchConfig::default();
    let seeds_raw = args.seeds.clone().or_else(|| from_file("seeds"));
    if let Some(raw) = seeds_raw {
        match parse_seed_range(&raw) {
            Some(r) => config.seeds = r,
            None => {
                eprintln!("error: bad --seeds '{raw}' (expected a..b)");
                return Ok(Err(EXIT_CONFIG));
            }
        }
    }
    let sizes_raw = args.sizes.clone().or_else(|| from_file("sizes"));
    if let Some(raw) = sizes_raw {
        match parse_sizes(&raw) {
            Some(sizes) => config.sizes = sizes,
            None => {
                eprintln!("error: bad --sizes '{raw}' (expected n:k,n:k)");
                return Ok(Err(EXIT_CONFIG));
            }
        }
    }
    if let Some(v) = args
        .frac_v
        .or_else(|| from_file("frac-v").and_then(|s| s.parse().ok()))
    {
        config.frac_required_v = v;
    }
    if let Some(v) = args
        .frac_e
        .or_else(|| from_file("frac-e").and_then(|s| s.parse().ok()))
    {
        config.frac_required_e = v;
    }
    let algs_raw = args.algs.clone().or_else(|| from_file("algs"));
    if let Some(raw) = algs_raw {
        let mut algorithms = Vec::new();
        for tok in raw.split(',') {
            match tok.trim().parse::<BenchAlgorithm>() {
                Ok(a) => algorithms.push(a),
                Err(err) => {
                    eprintln!("error: {err}");
                    return Ok(Err(EXIT_CONFIG));
                }
            }
        }
        config.algorithms = algorithms;
    }
    if let Some(cap) = args
        .oracle_cap
        .or_else(|| from_file("oracle-cap").and_then(|s| s.parse().ok()))
    {
        config.oracle_cap = cap;
    }
    if args.no_oracle || from_file("no-oracle").map(|v| v == "true").unwrap_or(false) {
        config.use_oracle = false;
    }
    Ok(Ok(config))
}

fn parse_seed_range(raw: &str) -> Option<Range<u64>> {
    let (a, b) = raw.split_once("..")?;
    Some(a.trim().parse().ok()?..b.trim().parse().ok()?)
}

fn parse_sizes(raw: &str) -> Option<Vec<(usize, usize)>> {
    raw.split(',')
        .map(|pair| {
            let (n, k) = pair.trim().split_once(':')?;
            Some((n.trim().parse().ok()?, k.trim().parse().ok()?))
        })
        .collect()
}
