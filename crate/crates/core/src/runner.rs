//! Seeded benchmark sweeps: generate instances, solve, compare against the
//! oracle and render a ratio report. Rows are independent, so the sweep is
//! data-parallel; report assembly stays ordered by (seed, size, algorithm)
//! regardless of completion order.

use std::fmt::Write as _;
use std::ops::Range;
use std::time::Instant;

use crate::instance::{
    generate_random, CrossMode, EndpointsMode, GenError, GenParams, MetricInstance,
};
use crate::metric::Cost;
use crate::oracle::{exact_gcrp, OracleConfig, OracleError};
use crate::solver::{solve, AlgorithmTag, GcrpSolution, SolveError};
use crate::validity::check_tour;

/// Which problem family a bench row exercises; determines the generator's
/// endpoint and cross-edge layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchAlgorithm {
    Alg2,
    Alg3,
    Alg4,
}

impl BenchAlgorithm {
    pub fn all() -> Vec<BenchAlgorithm> {
        vec![
            BenchAlgorithm::Alg2,
            BenchAlgorithm::Alg3,
            BenchAlgorithm::Alg4,
        ]
    }

    fn gen_modes(&self, seed: u64) -> (EndpointsMode, CrossMode) {
        match self {
            BenchAlgorithm::Alg2 => (EndpointsMode::Given, CrossMode::Auto),
            BenchAlgorithm::Alg3 => (EndpointsMode::Free, CrossMode::None),
            BenchAlgorithm::Alg4 => {
                // Alternate the two cross layouts deterministically.
                let cross = if seed.is_multiple_of(2) {
                    CrossMode::Matching
                } else {
                    CrossMode::Cycle
                };
                (EndpointsMode::Free, cross)
            }
        }
    }
}

impl std::fmt::Display for BenchAlgorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BenchAlgorithm::Alg2 => f.write_str("alg2"),
            BenchAlgorithm::Alg3 => f.write_str("alg3"),
            BenchAlgorithm::Alg4 => f.write_str("alg4"),
        }
    }
}

impl std::str::FromStr for BenchAlgorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "alg2" => Ok(BenchAlgorithm::Alg2),
            "alg3" => Ok(BenchAlgorithm::Alg3),
            "alg4" => Ok(BenchAlgorithm::Alg4),
            other => Err(format!(
                "unknown algorithm '{other}' (expected alg2|alg3|alg4)"
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub seeds: Range<u64>,
    /// (n, k) pairs; every combination with every seed becomes one instance.
    pub sizes: Vec<(usize, usize)>,
    pub frac_required_v: f64,
    pub frac_required_e: f64,
    pub algorithms: Vec<BenchAlgorithm>,
    /// Content cap for the exact oracle.
    pub oracle_cap: usize,
    /// Compute oracle optima and ratio columns.
    pub use_oracle: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            seeds: 0..20,
            sizes: vec![(7, 2), (8, 3)],
            frac_required_v: 0.5,
            frac_required_e: 0.3,
            algorithms: BenchAlgorithm::all(),
            oracle_cap: OracleConfig::DEFAULT_GCRP_CAP,
            use_oracle: true,
        }
    }
}

/// One solved instance of the report.
#[derive(Debug, Clone)]
pub struct ReportRow {
    pub instance_id: String,
    pub algorithm: AlgorithmTag,
    pub cost: Cost,
    pub oracle: Option<Cost>,
    /// Proven ratio ceiling of the algorithm that produced the tour.
    pub ceiling: (Cost, Cost),
    /// Exact check `cost * den > num * oracle` when the oracle is known.
    pub bound_violated: bool,
    pub validity_violations: usize,
    pub wall_micros: u128,
}

impl ReportRow {
    pub fn ratio(&self) -> Option<f64> {
        self.oracle.map(|o| {
            if o == 0 {
                if self.cost == 0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            } else {
                self.cost as f64 / o as f64
            }
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub rows: Vec<ReportRow>,
}

impl SolveReport {
    pub fn any_violation(&self) -> bool {
        self.rows
            .iter()
            .any(|r| r.bound_violated || r.validity_violations > 0)
    }

    /// Process exit code the report calls for: 0 clean, 3 on any bound or
    /// validity violation.
    pub fn suggested_exit(&self) -> i32 {
        if self.any_violation() {
            3
        } else {
            0
        }
    }

    /// Tab-separated rows, stable across runs for a fixed config (timing is
    /// reported only in the summary, which keeps the file byte-identical).
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("instance\talgorithm\tcost\toracle\tratio\tceiling\tmargin\n");
        for r in &self.rows {
            let (oracle, ratio, margin) = match (r.oracle, r.ratio()) {
                (Some(o), Some(rat)) => {
                    let ceiling = r.ceiling.0 as f64 / r.ceiling.1 as f64;
                    (
                        o.to_string(),
                        format!("{rat:.6}"),
                        format!("{:.6}", ceiling - rat),
                    )
                }
                _ => (String::new(), String::new(), String::new()),
            };
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.instance_id,
                r.algorithm,
                r.cost,
                oracle,
                ratio,
                format_args!("{:.6}", r.ceiling.0 as f64 / r.ceiling.1 as f64),
                margin,
            );
        }
        out
    }

    /// Human summary: max observed ratio per algorithm plus failures.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let total_micros: u128 = self.rows.iter().map(|r| r.wall_micros).sum();
        let _ = writeln!(
            out,
            "# rows {}  violations {}  solve-time {:.1} ms",
            self.rows.len(),
            self.rows
                .iter()
                .filter(|r| r.bound_violated || r.validity_violations > 0)
                .count(),
            total_micros as f64 / 1000.0
        );
        for tag in [
            AlgorithmTag::Alg2,
            AlgorithmTag::Alg3T1,
            AlgorithmTag::Alg3T2,
            AlgorithmTag::Alg4,
            AlgorithmTag::TsppCase,
        ] {
            let rows: Vec<&ReportRow> = self.rows.iter().filter(|r| r.algorithm == tag).collect();
            if rows.is_empty() {
                continue;
            }
            let max_ratio = rows
                .iter()
                .filter_map(|r| r.ratio())
                .fold(f64::NAN, |a, b| if a.is_nan() || b > a { b } else { a });
            let ceiling = rows[0].ceiling;
            if max_ratio.is_nan() {
                let _ = writeln!(out, "# {tag}: rows {}", rows.len());
            } else {
                let status = if rows.iter().any(|r| r.bound_violated) {
                    "FAILURE"
                } else {
                    "ok"
                };
                let _ = writeln!(
                    out,
                    "# {tag}: rows {}  max-ratio {max_ratio:.4}  ceiling {:.4}  {status}",
                    rows.len(),
                    ceiling.0 as f64 / ceiling.1 as f64,
                );
            }
        }
        out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("size n = {n} exceeds oracle cap {cap}; raise --oracle-cap or disable the oracle")]
    OracleCapTooSmall { n: usize, cap: usize },
    #[error("empty size list")]
    NoSizes,
    #[error("instance generation failed for seed {seed}: {source}")]
    Gen { seed: u64, source: GenError },
    #[error("solver failed on {id}: {source}")]
    Solve { id: String, source: SolveError },
    #[error("oracle failed on {id}: {source}")]
    Oracle { id: String, source: OracleError },
}

/// Run the sweep with the production solver.
pub fn run_bench(config: &BenchConfig) -> Result<SolveReport, BenchError> {
    run_bench_with(config, solve)
}

/// Run the sweep with a caller-provided solver (used to mutation-test the
/// harness: a broken solver must trip the bound check).
pub fn run_bench_with<F>(config: &BenchConfig, solver: F) -> Result<SolveReport, BenchError>
where
    F: Fn(&MetricInstance) -> Result<GcrpSolution, SolveError> + Sync,
{
    if config.sizes.is_empty() {
        if config.seeds.is_empty() {
            return Ok(SolveReport { rows: Vec::new() });
        }
        return Err(BenchError::NoSizes);
    }
    if config.use_oracle {
        for &(n, _) in &config.sizes {
            if n > config.oracle_cap {
                return Err(BenchError::OracleCapTooSmall {
                    n,
                    cap: config.oracle_cap,
                });
            }
        }
    }
    let mut jobs: Vec<(u64, usize, usize, BenchAlgorithm)> = Vec::new();
    for seed in config.seeds.clone() {
        for &(n, k) in &config.sizes {
            for &alg in &config.algorithms {
                jobs.push((seed, n, k, alg));
            }
        }
    }
    let run = |job: &(u64, usize, usize, BenchAlgorithm)| -> Result<ReportRow, BenchError> {
        bench_row(config, *job, &solver)
    };
    let rows: Result<Vec<ReportRow>, BenchError> = map_jobs(&jobs, run);
    Ok(SolveReport { rows: rows? })
}

/// Sequential sweep entry point, kept available regardless of features so
/// benchmarks can compare both code paths.
pub fn run_bench_sequential<F>(config: &BenchConfig, solver: F) -> Result<SolveReport, BenchError>
where
    F: Fn(&MetricInstance) -> Result<GcrpSolution, SolveError> + Sync,
{
    if config.sizes.is_empty() {
        return Ok(SolveReport { rows: Vec::new() });
    }
    let mut jobs: Vec<(u64, usize, usize, BenchAlgorithm)> = Vec::new();
    for seed in config.seeds.clone() {
        for &(n, k) in &config.sizes {
            for &alg in &config.algorithms {
                jobs.push((seed, n, k, alg));
            }
        }
    }
    let rows: Result<Vec<ReportRow>, BenchError> = jobs
        .iter()
        .map(|job| bench_row(config, *job, &solver))
        .collect();
    Ok(SolveReport { rows: rows? })
}

#[cfg(feature = "parallel")]
fn map_jobs<J: Sync, R: Send, E: Send>(
    jobs: &[J],
    f: impl Fn(&J) -> Result<R, E> + Sync + Send,
) -> Result<Vec<R>, E> {
    use rayon::prelude::*;
    jobs.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_jobs<J: Sync, R: Send, E: Send>(
    jobs: &[J],
    f: impl Fn(&J) -> Result<R, E> + Sync + Send,
) -> Result<Vec<R>, E> {
    jobs.iter().map(f).collect()
}

fn bench_row<F>(
    config: &BenchConfig,
    (seed, n, k, alg): (u64, usize, usize, BenchAlgorithm),
    solver: &F,
) -> Result<ReportRow, BenchError>
where
    F: Fn(&MetricInstance) -> Result<GcrpSolution, SolveError> + Sync,
{
    let (endpoints_mode, cross_mode) = alg.gen_modes(seed);
    let params = GenParams {
        n,
        k: k.min(n),
        frac_required_v: config.frac_required_v,
        frac_required_e: config.frac_required_e,
        endpoints_mode,
        cross_mode,
        ..GenParams::default()
    };
    let inst = generate_random(&params, seed).map_err(|source| BenchError::Gen { seed, source })?;
    let instance_id = format!("s{seed}-n{n}-k{k}-{alg}");
    let started = Instant::now();
    let sol = solver(&inst).map_err(|source| BenchError::Solve {
        id: instance_id.clone(),
        source,
    })?;
    let wall_micros = started.elapsed().as_micros();
    let validity_violations = check_tour(&inst, &sol.tour).len();
    let oracle = if config.use_oracle {
        let cfg = OracleConfig {
            gcrp_cap: Some(config.oracle_cap),
            ..OracleConfig::default()
        };
        Some(
            exact_gcrp(&inst, &cfg)
                .map_err(|source| BenchError::Oracle {
                    id: instance_id.clone(),
                    source,
                })?
                .opt_cost,
        )
    } else {
        None
    };
    let ceiling = sol.algorithm.ceiling();
    let bound_violated = match oracle {
        Some(o) => sol.tour.cost * ceiling.1 > ceiling.0 * o,
        None => false,
    };
    Ok(ReportRow {
        instance_id,
        algorithm: sol.algorithm,
        cost: sol.tour.cost,
        oracle,
        ceiling,
        bound_violated,
        validity_violations,
        wall_micros,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> BenchConfig {
        BenchConfig {
            seeds: 0..6,
            sizes: vec![(6, 2), (7, 3)],
            ..BenchConfig::default()
        }
    }

    #[test]
    fn bench_runs_clean() {
        let report = run_bench(&small_config()).unwrap();
        assert_eq!(report.rows.len(), 6 * 2 * 3);
        assert!(!report.any_violation());
        assert_eq!(report.suggested_exit(), 0);
    }

    #[test]
    fn tsv_is_reproducible_and_time_free() {
        let a = run_bench(&small_config()).unwrap();
        let b = run_bench(&small_config()).unwrap();
        assert_eq!(a.to_tsv(), b.to_tsv());
        assert!(!a.to_tsv().contains("micros"));
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let config = small_config();
        let par = run_bench(&config).unwrap();
        let seq = run_bench_sequential(&config, solve).unwrap();
        assert_eq!(par.to_tsv(), seq.to_tsv());
    }

    #[test]
    fn empty_seed_range_is_empty_report() {
        let config = BenchConfig {
            seeds: 5..5,
            ..small_config()
        };
        let report = run_bench(&config).unwrap();
        assert!(report.rows.is_empty());
        assert_eq!(report.suggested_exit(), 0);
    }

    #[test]
    fn oracle_cap_is_checked_upfront() {
        let config = BenchConfig {
            sizes: vec![(20, 3)],
            ..small_config()
        };
        assert!(matches!(
            run_bench(&config),
            Err(BenchError::OracleCapTooSmall { n: 20, .. })
        ));
    }

    #[test]
    fn broken_solver_trips_the_bound_check() {
        let config = small_config();
        let report = run_bench_with(&config, |inst| {
            let mut sol = solve(inst)?;
            // Mutation: report a wildly inflated cost.
            sol.tour.cost *= 5;
            Ok(sol)
        })
        .unwrap();
        assert!(report.rows.iter().any(|r| r.bound_violated));
        assert_eq!(report.suggested_exit(), 3);
    }

    #[test]
    fn summary_mentions_every_observed_tag() {
        let report = run_bench(&small_config()).unwrap();
        let summary = report.summary();
        assert!(summary.contains("alg2"));
        assert!(summary.contains("max-ratio"));
    }
}
