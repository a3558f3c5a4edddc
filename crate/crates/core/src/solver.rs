//! The cluster routing solvers and their case dispatch.
//!
//! * specified endpoints: per-cluster paths stitched through the directed
//!   arc router (2.4-approximation), with cross-cluster required edges
//!   preshrunk into merged clusters first;
//! * unspecified endpoints, intra-cluster required edges only: the better of
//!   a free-path + rural-postman tour and a max-distance-endpoints tour
//!   (13/4-approximation);
//! * unspecified endpoints with cross-cluster required edges: chains of
//!   clusters become super-segments routed by the rural postman
//!   (9/4-approximation); a spanning cross-edge cycle forces the cluster
//!   order and only per-cluster paths remain (3/2 regime).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::arcrouting::{rpp_solve, scp_solve, ArcError, ArcRoute, ArcTask, BoundsLedger};
use crate::graphkit::Walk;
use crate::instance::{
    build_cluster_subgraphs, classify, CaseTag, ClusterSubgraph, FeasibilityVerdict,
    MetricInstance, Status,
};
use crate::metric::{Cost, Metric};
use crate::pathsolver::{grp_closed_walk, tgpp_free_path, tgpp_path, PathError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmTag {
    /// Specified endpoints (ratio 2.4).
    Alg2,
    /// Unspecified, intra-only, free-path + rural postman branch.
    Alg3T1,
    /// Unspecified, intra-only, max-distance endpoints branch.
    Alg3T2,
    /// Unspecified with cross edges, chain reduction (ratio 9/4).
    Alg4,
    /// Cross edges force the full cluster cycle (ratio 3/2 regime).
    TsppCase,
}

impl AlgorithmTag {
    /// The proven worst-case ratio as an exact fraction.
    pub fn ceiling(&self) -> (Cost, Cost) {
        match self {
            AlgorithmTag::Alg2 => (12, 5),
            AlgorithmTag::Alg3T1 | AlgorithmTag::Alg3T2 => (13, 4),
            AlgorithmTag::Alg4 => (9, 4),
            AlgorithmTag::TsppCase => (3, 2),
        }
    }
}

impl fmt::Display for AlgorithmTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AlgorithmTag::Alg2 => "alg2",
            AlgorithmTag::Alg3T1 => "alg3-t1",
            AlgorithmTag::Alg3T2 => "alg3-t2",
            AlgorithmTag::Alg4 => "alg4",
            AlgorithmTag::TsppCase => "tspp-case",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for AlgorithmTag {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "alg2" => Ok(AlgorithmTag::Alg2),
            "alg3-t1" => Ok(AlgorithmTag::Alg3T1),
            "alg3-t2" => Ok(AlgorithmTag::Alg3T2),
            "alg4" => Ok(AlgorithmTag::Alg4),
            "tspp-case" => Ok(AlgorithmTag::TsppCase),
            other => Err(format!("unknown algorithm tag '{other}'")),
        }
    }
}

/// Per-cluster open paths of a solution and their endpoints.
#[derive(Debug, Clone, Default)]
pub struct ClusterPathSet {
    pub paths: BTreeMap<usize, Walk>,
    pub ends: BTreeMap<usize, (usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct GcrpSolution {
    pub tour: Walk,
    pub per_cluster: ClusterPathSet,
    pub ledger: BoundsLedger,
    pub algorithm: AlgorithmTag,
    /// Costs of all candidate tours that were constructed (better-of-two
    /// solvers record both branches).
    pub branch_costs: Vec<(AlgorithmTag, Cost)>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("instance is infeasible: {0:?}")]
    Infeasible(FeasibilityVerdict),
    #[error("solver expects case {expected:?} but instance classifies as {got:?}")]
    WrongCase { expected: CaseTag, got: CaseTag },
    #[error("cross-cluster required edges are unroutable: {0}")]
    CrossStructure(String),
    #[error("cluster {cluster}: {source}")]
    ClusterPath { cluster: usize, source: PathError },
    #[error(transparent)]
    Arc(#[from] ArcError),
}

/// Dispatch on the feasibility verdict.
pub fn solve(inst: &MetricInstance) -> Result<GcrpSolution, SolveError> {
    let verdict = classify(inst);
    if verdict.status != Status::Feasible {
        return Err(SolveError::Infeasible(verdict));
    }
    match verdict.case_tag {
        CaseTag::SpecifiedEnds => solve_specified(inst),
        CaseTag::UnspecifiedIntraOnly => solve_unspecified_intra(inst),
        CaseTag::UnspecifiedWithCrossEdges => solve_unspecified_cross(inst),
    }
}

// ---------------------------------------------------------------------------
// Specified endpoints.

/// Result of shrinking cross-cluster required (t_i, s_j) edges.
#[derive(Debug, Clone)]
pub enum Preshrunk {
    /// Chains of original clusters merged into super-clusters; the reduced
    /// instance has intra-cluster required edges only.
    Chains {
        reduced: MetricInstance,
        chains: Vec<Vec<usize>>,
    },
    /// The cross edges close a single cycle over every cluster; the tour
    /// structure is forced.
    SpanningCycle { order: Vec<usize> },
}

/// Merge clusters joined by required (t_i, s_j) edges into super-clusters
/// whose endpoints are the chain's outer start and end.
pub fn preshrink_cross_edges(inst: &MetricInstance) -> Result<Preshrunk, SolveError> {
    let ends = inst
        .endpoints()
        .expect("preshrink requires specified endpoints");
    let cross = inst.cross_edges();
    let k = inst.k();

    // Cluster-level multigraph of cross edges.
    let mut deg = vec![0usize; k];
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); k]; // (edge idx, other cluster)
    for (ei, &(u, v)) in cross.iter().enumerate() {
        let (i, j) = (inst.cluster_of(u), inst.cluster_of(v));
        deg[i] += 1;
        deg[j] += 1;
        if deg[i] > 2 || deg[j] > 2 {
            let c = if deg[i] > 2 { i } else { j };
            return Err(SolveError::CrossStructure(format!(
                "cluster {c} touches more than two cross edges"
            )));
        }
        adj[i].push((ei, j));
        adj[j].push((ei, i));
    }
    if cross.is_empty() {
        let chains: Vec<Vec<usize>> = (0..k).map(|i| vec![i]).collect();
        return Ok(Preshrunk::Chains {
            reduced: inst.clone(),
            chains,
        });
    }

    // Walk each component of the cluster graph.
    let mut seen = vec![false; k];
    let mut chains: Vec<Vec<usize>> = Vec::new();
    let mut cycle: Option<Vec<usize>> = None;
    for start in 0..k {
        if seen[start] || deg[start] != 1 {
            continue;
        }
        // Chain starting at a degree-one cluster.
        let chain = walk_component(start, &adj, &mut seen, &cross, inst);
        chains.push(chain);
    }
    // Remaining unseen clusters with cross degree two form cycles.
    for start in 0..k {
        if seen[start] || deg[start] != 2 {
            continue;
        }
        let cyc = walk_component(start, &adj, &mut seen, &cross, inst);
        if cycle.is_some() || cyc.len() != k {
            return Err(SolveError::CrossStructure(
                "cross edges close a cycle that does not span every cluster".into(),
            ));
        }
        cycle = Some(cyc);
    }
    if let Some(order) = cycle {
        let order = orient_cycle(&order, inst)?;
        return Ok(Preshrunk::SpanningCycle { order });
    }

    // Orient each chain so every bridge runs end-to-start.
    let mut oriented: Vec<Vec<usize>> = Vec::new();
    for chain in chains {
        let fwd_ok = chain_bridges_valid(&chain, inst);
        if fwd_ok {
            oriented.push(chain);
        } else {
            let mut rev = chain.clone();
            rev.reverse();
            if chain_bridges_valid(&rev, inst) {
                oriented.push(rev);
            } else {
                return Err(SolveError::CrossStructure(format!(
                    "chain {chain:?} admits no end-to-start orientation"
                )));
            }
        }
    }
    for (i, &d) in deg.iter().enumerate() {
        if d == 0 {
            oriented.push(vec![i]);
        }
    }
    oriented.sort_by_key(|c| c[0].min(*c.last().unwrap()));

    // Build the reduced instance: merged clusters, merged endpoints.
    let mut clusters = Vec::with_capacity(oriented.len());
    let mut endpoints = Vec::with_capacity(oriented.len());
    for chain in &oriented {
        let mut merged = Vec::new();
        for &c in chain {
            merged.extend_from_slice(&inst.clusters()[c]);
        }
        clusters.push(merged);
        endpoints.push((ends[chain[0]].0, ends[*chain.last().unwrap()].1));
    }
    let dist: Vec<Cost> = (0..inst.n() * inst.n())
        .map(|i| inst.dist(i / inst.n(), i % inst.n()))
        .collect();
    let reduced = MetricInstance::new(
        inst.n(),
        dist,
        clusters,
        inst.required_vertices().iter().copied(),
        inst.required_edges().iter().copied(),
        Some(endpoints),
    )
    .expect("reduced instance is structurally sound");
    Ok(Preshrunk::Chains {
        reduced,
        chains: oriented,
    })
}

fn walk_component(
    start: usize,
    adj: &[Vec<(usize, usize)>],
    seen: &mut [bool],
    _cross: &[(usize, usize)],
    _inst: &MetricInstance,
) -> Vec<usize> {
    let mut order = vec![start];
    seen[start] = true;
    let mut used_edges: BTreeSet<usize> = BTreeSet::new();
    let mut cur = start;
    loop {
        let next = adj[cur]
            .iter()
            .find(|&&(ei, other)| !used_edges.contains(&ei) && (!seen[other] || other == start));
        match next {
            Some(&(ei, other)) => {
                used_edges.insert(ei);
                if other == start {
                    break; // cycle closed
                }
                seen[other] = true;
                order.push(other);
                cur = other;
            }
            None => break,
        }
    }
    order
}

/// Every consecutive pair in the chain must be joined by a bridge running
/// from the first cluster's end vertex to the second cluster's start vertex.
fn chain_bridges_valid(chain: &[usize], inst: &MetricInstance) -> bool {
    let ends = inst.endpoints().unwrap();
    chain.windows(2).all(|w| {
        inst.cross_edges().iter().any(|&(u, v)| {
            let (i, j) = (inst.cluster_of(u), inst.cluster_of(v));
            ((i, j) == (w[0], w[1]) && u == ends[w[0]].1 && v == ends[w[1]].0)
                || ((j, i) == (w[0], w[1]) && v == ends[w[0]].1 && u == ends[w[1]].0)
        })
    })
}

fn orient_cycle(order: &[usize], inst: &MetricInstance) -> Result<Vec<usize>, SolveError> {
    let valid_cyclic = |ord: &[usize]| {
        (0..ord.len()).all(|p| {
            let pair = [ord[p], ord[(p + 1) % ord.len()]];
            chain_bridges_valid(&pair, inst)
        })
    };
    if valid_cyclic(order) {
        return Ok(order.to_vec());
    }
    let mut rev = order.to_vec();
    rev[1..].reverse();
    if valid_cyclic(&rev) {
        return Ok(rev);
    }
    Err(SolveError::CrossStructure(
        "cross-edge cycle admits no consistent orientation".into(),
    ))
}

/// The block of tour vertices a cluster path contributes, plus its outer
/// connection points.
struct Run {
    seq: Vec<usize>,
    entry: usize,
    exit: usize,
}

/// Open path (or closed loop when start equals end) through one cluster's
/// required content.
fn cluster_path(
    inst: &MetricInstance,
    sub: &ClusterSubgraph,
    s: usize,
    t: usize,
) -> Result<(Walk, Run), SolveError> {
    let cluster = sub.cluster_id;
    let wrap = |source: PathError| SolveError::ClusterPath { cluster, source };
    if s == t {
        if sub.vertices.len() <= 1 {
            let w = Walk {
                seq: vec![s],
                closed: false,
                cost: 0,
            };
            return Ok((
                w.clone(),
                Run {
                    seq: vec![s],
                    entry: s,
                    exit: s,
                },
            ));
        }
        if inst.required_vertices().contains(&s) {
            return Err(SolveError::CrossStructure(format!(
                "cluster {cluster} start equals end at required vertex {s}"
            )));
        }
        let w = grp_closed_walk(&sub.vertices, &sub.edges, inst, s).map_err(wrap)?;
        let mut seq = w.seq.clone();
        seq.push(s);
        return Ok((
            w,
            Run {
                seq,
                entry: s,
                exit: s,
            },
        ));
    }
    let w = tgpp_path(&sub.vertices, &sub.edges, inst, s, t).map_err(wrap)?;
    let run = Run {
        seq: w.seq.clone(),
        entry: s,
        exit: t,
    };
    Ok((w, run))
}

fn splice_closed(inst: &MetricInstance, runs: Vec<Vec<usize>>) -> Walk {
    let seq: Vec<usize> = runs.into_iter().flatten().collect();
    Walk::closed(seq, inst)
}

fn runs_in_route_order(route: &ArcRoute, runs: &[Run]) -> Vec<Vec<usize>> {
    route
        .visits
        .iter()
        .map(|v| {
            let mut seq = runs[v.arc].seq.clone();
            if !v.forward {
                seq.reverse();
            }
            seq
        })
        .collect()
}

/// Specified start/end vertices: per-cluster general paths stitched by the
/// stacker-crane router; tour cost at most 2.4 times the optimum.
pub fn solve_specified(inst: &MetricInstance) -> Result<GcrpSolution, SolveError> {
    let verdict = classify(inst);
    if verdict.status != Status::Feasible {
        return Err(SolveError::Infeasible(verdict));
    }
    if verdict.case_tag != CaseTag::SpecifiedEnds {
        return Err(SolveError::WrongCase {
            expected: CaseTag::SpecifiedEnds,
            got: verdict.case_tag,
        });
    }
    let ends = inst.endpoints().unwrap().to_vec();
    let subs = build_cluster_subgraphs(inst);

    // Per original cluster paths; these survive any chain merging.
    let mut paths = ClusterPathSet::default();
    let mut runs_by_cluster: BTreeMap<usize, Run> = BTreeMap::new();
    for i in 0..inst.k() {
        let (s, t) = ends[i];
        let (walk, run) = cluster_path(inst, &subs[i], s, t)?;
        paths.paths.insert(i, walk);
        paths.ends.insert(i, (s, t));
        runs_by_cluster.insert(i, run);
    }

    match preshrink_cross_edges(inst)? {
        Preshrunk::SpanningCycle { order } => {
            let runs: Vec<Vec<usize>> = order
                .iter()
                .map(|c| runs_by_cluster[c].seq.clone())
                .collect();
            let tour = splice_closed(inst, runs);
            let special_total = order.iter().map(|&c| inst.dist(ends[c].0, ends[c].1)).sum();
            Ok(GcrpSolution {
                tour,
                per_cluster: paths,
                ledger: BoundsLedger {
                    special_total,
                    ..BoundsLedger::default()
                },
                algorithm: AlgorithmTag::Alg2,
                branch_costs: Vec::new(),
            })
        }
        Preshrunk::Chains { reduced: _, chains } => {
            // One run and one arc per chain.
            let mut chain_runs: Vec<Run> = Vec::with_capacity(chains.len());
            for chain in &chains {
                let first = chain[0];
                let last = *chain.last().unwrap();
                let mut seq = Vec::new();
                for &c in chain {
                    seq.extend_from_slice(&runs_by_cluster[&c].seq);
                }
                chain_runs.push(Run {
                    seq,
                    entry: ends[first].0,
                    exit: ends[last].1,
                });
            }
            let arcs: Vec<(usize, usize)> = chain_runs.iter().map(|r| (r.entry, r.exit)).collect();
            let task = ArcTask::directed(arcs);
            let special_total = task.total_length(inst);
            let route = scp_solve(&task, inst)?;
            let tour = splice_closed(inst, runs_in_route_order(&route, &chain_runs));
            Ok(GcrpSolution {
                tour,
                per_cluster: paths,
                ledger: BoundsLedger {
                    special_total,
                    ..BoundsLedger::default()
                },
                algorithm: AlgorithmTag::Alg2,
                branch_costs: Vec::new(),
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Unspecified endpoints, intra-cluster required edges only.

/// Unspecified endpoints without cross edges: better of the free-path +
/// rural-postman tour and the max-distance-endpoints tour; cost at most
/// 13/4 of the optimum.
pub fn solve_unspecified_intra(inst: &MetricInstance) -> Result<GcrpSolution, SolveError> {
    let verdict = classify(inst);
    if verdict.status != Status::Feasible {
        return Err(SolveError::Infeasible(verdict));
    }
    if verdict.case_tag != CaseTag::UnspecifiedIntraOnly {
        return Err(SolveError::WrongCase {
            expected: CaseTag::UnspecifiedIntraOnly,
            got: verdict.case_tag,
        });
    }
    let subs = build_cluster_subgraphs(inst);
    let content: Vec<usize> = (0..inst.k())
        .filter(|&i| !subs[i].vertices.is_empty())
        .collect();

    // Ledger D: per-cluster maximum compatible endpoint distance.
    let max_pairs: Vec<(usize, usize)> = content
        .iter()
        .map(|&i| max_distance_pair(inst, &subs[i]))
        .collect::<Result<_, _>>()?;
    let special_total: Cost = max_pairs.iter().map(|&(s, t)| inst.dist(s, t)).sum();

    if content.is_empty() {
        return Ok(GcrpSolution {
            tour: Walk::empty_closed(),
            per_cluster: ClusterPathSet::default(),
            ledger: BoundsLedger::default(),
            algorithm: AlgorithmTag::Alg3T1,
            branch_costs: vec![(AlgorithmTag::Alg3T1, 0), (AlgorithmTag::Alg3T2, 0)],
        });
    }

    // T1: free per-cluster paths, rural postman over their end pairs.
    let mut t1_paths = ClusterPathSet::default();
    let mut t1_runs: Vec<Run> = Vec::with_capacity(content.len());
    for &i in &content {
        let w = tgpp_free_path(&subs[i].vertices, &subs[i].edges, inst)
            .map_err(|source| SolveError::ClusterPath { cluster: i, source })?;
        let (a, b) = (*w.seq.first().unwrap(), *w.seq.last().unwrap());
        t1_runs.push(Run {
            seq: w.seq.clone(),
            entry: a,
            exit: b,
        });
        t1_paths.ends.insert(i, (a, b));
        t1_paths.paths.insert(i, w);
    }
    let t1_task = ArcTask::undirected(t1_runs.iter().map(|r| (r.entry, r.exit)).collect());
    let t1_route = rpp_solve(&t1_task, inst)?;
    let t1_tour = splice_closed(inst, runs_in_route_order(&t1_route, &t1_runs));

    // T2: endpoints maximizing within-cluster distance, then the specified
    // machinery (directed arcs through the stacker crane).
    let mut t2_paths = ClusterPathSet::default();
    let mut t2_runs: Vec<Run> = Vec::with_capacity(content.len());
    for (pos, &i) in content.iter().enumerate() {
        let (s, t) = max_pairs[pos];
        let (walk, run) = cluster_path(inst, &subs[i], s, t)?;
        t2_paths.paths.insert(i, walk);
        t2_paths.ends.insert(i, (s, t));
        t2_runs.push(run);
    }
    let t2_task = ArcTask::directed(t2_runs.iter().map(|r| (r.entry, r.exit)).collect());
    let t2_route = scp_solve(&t2_task, inst)?;
    let t2_tour = splice_closed(inst, runs_in_route_order(&t2_route, &t2_runs));

    let branch_costs = vec![
        (AlgorithmTag::Alg3T1, t1_tour.cost),
        (AlgorithmTag::Alg3T2, t2_tour.cost),
    ];
    let ledger = BoundsLedger {
        special_total,
        ..BoundsLedger::default()
    };
    let solution = if t2_tour.cost < t1_tour.cost {
        GcrpSolution {
            tour: t2_tour,
            per_cluster: t2_paths,
            ledger,
            algorithm: AlgorithmTag::Alg3T2,
            branch_costs,
        }
    } else {
        GcrpSolution {
            tour: t1_tour,
            per_cluster: t1_paths,
            ledger,
            algorithm: AlgorithmTag::Alg3T1,
            branch_costs,
        }
    };
    Ok(solution)
}

/// The endpoint pair of maximum distance among pairs compatible with the
/// cluster's required structure (degree at most one, no sealed segment);
/// ties broken lexicographically.
fn max_distance_pair(
    inst: &MetricInstance,
    sub: &ClusterSubgraph,
) -> Result<(usize, usize), SolveError> {
    let verts: Vec<usize> = sub.vertices.iter().copied().collect();
    if verts.len() == 1 {
        return Ok((verts[0], verts[0]));
    }
    let degree = |v: usize| sub.edges.iter().filter(|&&(a, b)| a == v || b == v).count();
    let segments =
        crate::pathsolver::build_segments(&sub.vertices, &sub.edges, inst).map_err(|source| {
            SolveError::ClusterPath {
                cluster: sub.cluster_id,
                source,
            }
        })?;
    let same_segment = |a: usize, b: usize| {
        segments
            .iter()
            .any(|s| s.contains_as_end(a) && s.contains_as_end(b))
    };
    let mut best: Option<(Cost, (usize, usize))> = None;
    for (ai, &a) in verts.iter().enumerate() {
        for &b in &verts[ai + 1..] {
            if degree(a) > 1 || degree(b) > 1 {
                continue;
            }
            if segments.len() > 1 && same_segment(a, b) {
                continue;
            }
            let d = inst.dist(a, b);
            let better = match &best {
                Some((bd, bp)) => d > *bd || (d == *bd && (a, b) < *bp),
                None => true,
            };
            if better {
                best = Some((d, (a, b)));
            }
        }
    }
    best.map(|(_, p)| p).ok_or_else(|| {
        SolveError::CrossStructure(format!(
            "cluster {} has no compatible endpoint pair",
            sub.cluster_id
        ))
    })
}

// ---------------------------------------------------------------------------
// Unspecified endpoints with cross-cluster required edges.

/// Unspecified endpoints with cross edges. A spanning cross-edge cycle
/// forces the cluster order (per-cluster fixed-ends paths, ratio 3/2);
/// otherwise chains of clusters collapse into super-segments whose free
/// outer ends maximize the attachment distance, routed by the rural postman
/// (ratio 9/4).
pub fn solve_unspecified_cross(inst: &MetricInstance) -> Result<GcrpSolution, SolveError> {
    let verdict = classify(inst);
    if verdict.status != Status::Feasible {
        return Err(SolveError::Infeasible(verdict));
    }
    if verdict.case_tag != CaseTag::UnspecifiedWithCrossEdges {
        return Err(SolveError::WrongCase {
            expected: CaseTag::UnspecifiedWithCrossEdges,
            got: verdict.case_tag,
        });
    }
    let subs = build_cluster_subgraphs(inst);
    let content: Vec<usize> = (0..inst.k())
        .filter(|&i| !subs[i].vertices.is_empty())
        .collect();
    let cross = inst.cross_edges();

    // Attachment slots per cluster (vertex per incident cross-edge end).
    let mut slots: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new(); // cluster -> (edge, vertex)
    for (ei, &(u, v)) in cross.iter().enumerate() {
        for x in [u, v] {
            let c = inst.cluster_of(x);
            slots.entry(c).or_default().push((ei, x));
        }
    }
    for (&c, list) in &slots {
        if list.len() > 2 {
            return Err(SolveError::CrossStructure(format!(
                "cluster {c} touches {} cross-edge ends",
                list.len()
            )));
        }
        // A single vertex carrying two cross edges leaves no room for any
        // other required content in its cluster.
        if list.len() == 2 && list[0].1 == list[1].1 && subs[c].vertices.len() > 1 {
            return Err(SolveError::CrossStructure(format!(
                "vertex {} carries two cross edges but cluster {c} has more required content",
                list[0].1
            )));
        }
    }

    // Cluster-level components over cross edges.
    let comps = cluster_components(inst, &cross, &content);
    let has_cycle = comps.iter().any(|c| c.is_cycle);
    if has_cycle {
        let cyc = comps.iter().find(|c| c.is_cycle).unwrap();
        if comps.len() != 1 || cyc.clusters.len() != content.len() {
            return Err(SolveError::CrossStructure(
                "cross edges close a cycle that does not span the required clusters".into(),
            ));
        }
        // Forced structure: fixed-ends path in every cluster, stitched along
        // the cycle.
        let mut paths = ClusterPathSet::default();
        let mut runs = Vec::with_capacity(cyc.clusters.len());
        for (pos, &c) in cyc.clusters.iter().enumerate() {
            let edge_in = cyc.edges[(pos + cyc.edges.len() - 1) % cyc.edges.len()];
            let edge_out = cyc.edges[pos];
            let s = endpoint_in_cluster(inst, cross[edge_in], c);
            let t = endpoint_in_cluster(inst, cross[edge_out], c);
            let (walk, run) = cluster_path_free_home(inst, &subs[c], s, t)?;
            paths.ends.insert(c, (s, t));
            paths.paths.insert(c, walk);
            runs.push(run.seq);
        }
        let tour = splice_closed(inst, runs);
        let special_total = cross.iter().map(|&(u, v)| inst.dist(u, v)).sum();
        return Ok(GcrpSolution {
            tour,
            per_cluster: paths,
            ledger: BoundsLedger {
                special_total,
                ..BoundsLedger::default()
            },
            algorithm: AlgorithmTag::TsppCase,
            branch_costs: Vec::new(),
        });
    }

    // Chains and isolated clusters: build super-segments, route with the
    // rural postman, substitute the runs back.
    let mut paths = ClusterPathSet::default();
    let mut seg_runs: Vec<Run> = Vec::new();
    let mut covered: BTreeSet<usize> = BTreeSet::new();
    for comp in &comps {
        let chain = &comp.clusters;
        covered.extend(chain.iter().copied());
        let m = chain.len();
        let mut seq: Vec<usize> = Vec::new();
        let mut outer = (0, 0);
        for (pos, &c) in chain.iter().enumerate() {
            let (s, t) = if m == 1 {
                unreachable!("cross components have at least two clusters");
            } else if pos == 0 {
                let a = endpoint_in_cluster(inst, cross[comp.edges[0]], c);
                let b = far_endpoint(inst, &subs[c], a)?;
                outer.0 = b;
                (b, a)
            } else if pos + 1 == m {
                let a = endpoint_in_cluster(inst, cross[comp.edges[pos - 1]], c);
                let b = far_endpoint(inst, &subs[c], a)?;
                outer.1 = b;
                (a, b)
            } else {
                let s = endpoint_in_cluster(inst, cross[comp.edges[pos - 1]], c);
                let t = endpoint_in_cluster(inst, cross[comp.edges[pos]], c);
                (s, t)
            };
            let (walk, run) = cluster_path_free_home(inst, &subs[c], s, t)?;
            paths.ends.insert(c, (s, t));
            paths.paths.insert(c, walk);
            seq.extend_from_slice(&run.seq);
        }
        seg_runs.push(Run {
            seq,
            entry: outer.0,
            exit: outer.1,
        });
    }
    for &c in &content {
        if covered.contains(&c) {
            continue;
        }
        let w = tgpp_free_path(&subs[c].vertices, &subs[c].edges, inst)
            .map_err(|source| SolveError::ClusterPath { cluster: c, source })?;
        let (a, b) = (*w.seq.first().unwrap(), *w.seq.last().unwrap());
        seg_runs.push(Run {
            seq: w.seq.clone(),
            entry: a,
            exit: b,
        });
        paths.ends.insert(c, (a, b));
        paths.paths.insert(c, w);
    }

    let task = ArcTask::undirected(seg_runs.iter().map(|r| (r.entry, r.exit)).collect());
    let special_total = task.total_length(inst);
    let route = rpp_solve(&task, inst)?;
    let tour = splice_closed(inst, runs_in_route_order(&route, &seg_runs));
    Ok(GcrpSolution {
        tour,
        per_cluster: paths,
        ledger: BoundsLedger {
            special_total,
            ..BoundsLedger::default()
        },
        algorithm: AlgorithmTag::Alg4,
        branch_costs: Vec::new(),
    })
}

/// Like [`cluster_path`], but `s == t` means a single attachment vertex
/// carrying two cross edges (content is exactly that vertex).
fn cluster_path_free_home(
    inst: &MetricInstance,
    sub: &ClusterSubgraph,
    s: usize,
    t: usize,
) -> Result<(Walk, Run), SolveError> {
    if s == t {
        let w = Walk {
            seq: vec![s],
            closed: false,
            cost: 0,
        };
        return Ok((
            w.clone(),
            Run {
                seq: vec![s],
                entry: s,
                exit: s,
            },
        ));
    }
    cluster_path(inst, sub, s, t)
}

/// The vertex of maximum distance from the attachment `a` among compatible
/// choices for the free end of a chain-end cluster.
fn far_endpoint(
    inst: &MetricInstance,
    sub: &ClusterSubgraph,
    a: usize,
) -> Result<usize, SolveError> {
    if sub.vertices.len() == 1 {
        return Ok(a);
    }
    let degree = |v: usize| sub.edges.iter().filter(|&&(x, y)| x == v || y == v).count();
    let segments =
        crate::pathsolver::build_segments(&sub.vertices, &sub.edges, inst).map_err(|source| {
            SolveError::ClusterPath {
                cluster: sub.cluster_id,
                source,
            }
        })?;
    let same_segment = |x: usize, y: usize| {
        segments
            .iter()
            .any(|s| s.contains_as_end(x) && s.contains_as_end(y))
    };
    let mut best: Option<(Cost, usize)> = None;
    for &b in &sub.vertices {
        if b == a || degree(b) > 1 {
            continue;
        }
        if segments.len() > 1 && same_segment(a, b) {
            continue;
        }
        let d = inst.dist(a, b);
        let better = match &best {
            Some((bd, bb)) => d > *bd || (d == *bd && b < *bb),
            None => true,
        };
        if better {
            best = Some((d, b));
        }
    }
    best.map(|(_, b)| b).ok_or_else(|| {
        SolveError::CrossStructure(format!(
            "cluster {} has no compatible free endpoint from {a}",
            sub.cluster_id
        ))
    })
}

fn endpoint_in_cluster(inst: &MetricInstance, edge: (usize, usize), cluster: usize) -> usize {
    if inst.cluster_of(edge.0) == cluster {
        edge.0
    } else {
        edge.1
    }
}

/// A connected component of the cluster-level cross-edge graph. For chains,
/// `clusters` runs end to end and `edges[p]` joins `clusters[p]` to
/// `clusters[p+1]`; for cycles `edges[p]` joins position p to p+1 modulo
/// the length.
struct CrossComponent {
    clusters: Vec<usize>,
    edges: Vec<usize>,
    is_cycle: bool,
}

fn cluster_components(
    inst: &MetricInstance,
    cross: &[(usize, usize)],
    _content: &[usize],
) -> Vec<CrossComponent> {
    let k = inst.k();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); k];
    let mut deg = vec![0usize; k];
    for (ei, &(u, v)) in cross.iter().enumerate() {
        let (i, j) = (inst.cluster_of(u), inst.cluster_of(v));
        adj[i].push((ei, j));
        adj[j].push((ei, i));
        deg[i] += 1;
        deg[j] += 1;
    }
    let mut seen_cluster = vec![false; k];
    let mut used_edge = vec![false; cross.len()];
    let mut out = Vec::new();
    // Chains first: start from degree-one clusters.
    for start in 0..k {
        if seen_cluster[start] || deg[start] != 1 {
            continue;
        }
        let mut clusters = vec![start];
        let mut edges = Vec::new();
        seen_cluster[start] = true;
        let mut cur = start;
        while let Some(&(ei, nxt)) = adj[cur].iter().find(|&&(ei, _)| !used_edge[ei]) {
            used_edge[ei] = true;
            edges.push(ei);
            seen_cluster[nxt] = true;
            clusters.push(nxt);
            cur = nxt;
        }
        out.push(CrossComponent {
            clusters,
            edges,
            is_cycle: false,
        });
    }
    // Remaining components are cycles.
    for start in 0..k {
        if seen_cluster[start] || deg[start] == 0 {
            continue;
        }
        let mut clusters = vec![start];
        let mut edges = Vec::new();
        seen_cluster[start] = true;
        let mut cur = start;
        while let Some(&(ei, nxt)) = adj[cur].iter().find(|&&(ei, _)| !used_edge[ei]) {
            used_edge[ei] = true;
            edges.push(ei);
            if nxt == start {
                break;
            }
            seen_cluster[nxt] = true;
            clusters.push(nxt);
            cur = nxt;
        }
        out.push(CrossComponent {
            clusters,
            edges,
            is_cycle: true,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_random, CrossMode, EndpointsMode, GenParams};
    use crate::oracle::{exact_gcrp, OracleConfig};
    use crate::validity::check_tour;

    fn unit_inst(
        n: usize,
        clusters: Vec<Vec<usize>>,
        required_v: Vec<usize>,
        required_e: Vec<(usize, usize)>,
        ends: Option<Vec<(usize, usize)>>,
    ) -> MetricInstance {
        let mut d = vec![1i64; n * n];
        for v in 0..n {
            d[v * n + v] = 0;
        }
        MetricInstance::new(n, d, clusters, required_v, required_e, ends).unwrap()
    }

    #[test]
    fn alg2_single_cluster_unit_triangle() {
        // one cluster, all vertices required, ends (0, 1): path 0,2,1 plus
        // closing edge
        let inst = unit_inst(
            3,
            vec![vec![0, 1, 2]],
            vec![0, 1, 2],
            vec![],
            Some(vec![(0, 1)]),
        );
        let sol = solve_specified(&inst).unwrap();
        assert_eq!(sol.tour.cost, 3);
        assert!(check_tour(&inst, &sol.tour).is_empty());
        assert_eq!(sol.algorithm, AlgorithmTag::Alg2);
        let opt = exact_gcrp(&inst, &OracleConfig::default()).unwrap();
        assert_eq!(opt.opt_cost, 3);
    }

    #[test]
    fn alg2_two_singletons() {
        let mut d = vec![0i64, 7, 7, 0];
        d[0] = 0;
        let inst = MetricInstance::new(
            2,
            d,
            vec![vec![0], vec![1]],
            [0, 1],
            [],
            Some(vec![(0, 0), (1, 1)]),
        )
        .unwrap();
        let sol = solve_specified(&inst).unwrap();
        assert_eq!(sol.tour.cost, 14);
        assert!(check_tour(&inst, &sol.tour).is_empty());
    }

    #[test]
    fn preshrink_identity_without_cross_edges() {
        let inst = unit_inst(
            4,
            vec![vec![0, 1], vec![2, 3]],
            vec![],
            vec![],
            Some(vec![(0, 1), (2, 3)]),
        );
        match preshrink_cross_edges(&inst).unwrap() {
            Preshrunk::Chains { reduced, chains } => {
                assert_eq!(reduced, inst);
                assert_eq!(chains, vec![vec![0], vec![1]]);
            }
            _ => panic!("expected chains"),
        }
    }

    #[test]
    fn preshrink_merges_single_bridge() {
        // bridge from t_0 = 1 to s_1 = 2
        let inst = unit_inst(
            4,
            vec![vec![0, 1], vec![2, 3]],
            vec![],
            vec![(1, 2)],
            Some(vec![(0, 1), (2, 3)]),
        );
        match preshrink_cross_edges(&inst).unwrap() {
            Preshrunk::Chains { reduced, chains } => {
                assert_eq!(chains, vec![vec![0, 1]]);
                assert_eq!(reduced.k(), 1);
                assert_eq!(reduced.endpoints().unwrap()[0], (0, 3));
                assert_eq!(classify(&reduced).cross_edge_count, 0);
            }
            _ => panic!("expected chains"),
        }
    }

    #[test]
    fn preshrink_chain_of_three() {
        let inst = unit_inst(
            6,
            vec![vec![0, 1], vec![2, 3], vec![4, 5]],
            vec![],
            vec![(1, 2), (3, 4)],
            Some(vec![(0, 1), (2, 3), (4, 5)]),
        );
        match preshrink_cross_edges(&inst).unwrap() {
            Preshrunk::Chains { reduced, chains } => {
                assert_eq!(chains, vec![vec![0, 1, 2]]);
                assert_eq!(reduced.k(), 1);
                assert_eq!(reduced.endpoints().unwrap()[0], (0, 5));
            }
            _ => panic!("expected chains"),
        }
        // the solved tour must traverse both bridges
        let sol = solve_specified(&inst).unwrap();
        assert!(check_tour(&inst, &sol.tour).is_empty());
        assert!(sol.tour.traverses(1, 2));
        assert!(sol.tour.traverses(3, 4));
    }

    #[test]
    fn alg2_chain_solution_matches_oracle_on_forced_instance() {
        let inst = unit_inst(
            4,
            vec![vec![0, 1], vec![2, 3]],
            vec![0, 1, 2, 3],
            vec![(1, 2)],
            Some(vec![(0, 1), (2, 3)]),
        );
        let sol = solve_specified(&inst).unwrap();
        assert!(check_tour(&inst, &sol.tour).is_empty());
        let opt = exact_gcrp(&inst, &OracleConfig::default()).unwrap();
        assert!(sol.tour.cost >= opt.opt_cost);
        assert!(5 * sol.tour.cost <= 12 * opt.opt_cost);
    }

    #[test]
    fn alg3_singletons_reduce_to_tsp() {
        let inst = unit_inst(
            4,
            vec![vec![0], vec![1], vec![2], vec![3]],
            vec![0, 1, 2, 3],
            vec![],
            None,
        );
        let sol = solve_unspecified_intra(&inst).unwrap();
        assert!(check_tour(&inst, &sol.tour).is_empty());
        assert_eq!(sol.tour.cost, 4);
        assert_eq!(sol.branch_costs.len(), 2);
    }

    #[test]
    fn alg3_singletons_within_three_halves_of_tsp() {
        use crate::oracle::exact_tsp;
        for seed in 0..20u64 {
            let params = GenParams {
                n: 7,
                k: 7,
                frac_required_v: 1.0,
                frac_required_e: 0.0,
                cross_mode: CrossMode::None,
                ..GenParams::default()
            };
            let inst = generate_random(&params, seed).unwrap();
            let sol = solve_unspecified_intra(&inst).unwrap();
            let verts: Vec<usize> = (0..7).collect();
            let opt = exact_tsp(&verts, &inst, &OracleConfig::default())
                .unwrap()
                .opt_cost;
            assert!(2 * sol.tour.cost <= 3 * opt, "seed {seed}");
        }
    }

    #[test]
    fn alg3_single_cluster_spanning_path() {
        // required edges form a Hamiltonian path of the single cluster
        let inst = unit_inst(
            4,
            vec![vec![0, 1, 2, 3]],
            vec![],
            vec![(0, 1), (1, 2), (2, 3)],
            None,
        );
        let sol = solve_unspecified_intra(&inst).unwrap();
        assert!(check_tour(&inst, &sol.tour).is_empty());
        assert_eq!(sol.tour.cost, 4);
    }

    #[test]
    fn alg4_single_cross_edge_between_singletons() {
        let mut d = vec![3i64; 4];
        d[0] = 0;
        d[3] = 0;
        let inst = MetricInstance::new(2, d, vec![vec![0], vec![1]], [], [(0, 1)], None).unwrap();
        let sol = solve_unspecified_cross(&inst).unwrap();
        assert!(check_tour(&inst, &sol.tour).is_empty());
        assert_eq!(sol.tour.cost, 6);
        assert_eq!(sol.algorithm, AlgorithmTag::Alg4);
    }

    #[test]
    fn alg4_spanning_cycle_is_forced() {
        // two clusters joined by two cross edges: (1,2) and (3,0)
        let inst = unit_inst(
            4,
            vec![vec![0, 1], vec![2, 3]],
            vec![0, 1, 2, 3],
            vec![(1, 2), (0, 3)],
            None,
        );
        let sol = solve_unspecified_cross(&inst).unwrap();
        assert!(check_tour(&inst, &sol.tour).is_empty());
        assert_eq!(sol.algorithm, AlgorithmTag::TsppCase);
        assert!(sol.tour.traverses(1, 2));
        assert!(sol.tour.traverses(0, 3));
    }

    #[test]
    fn dispatcher_routes_by_case() {
        let given = generate_random(
            &GenParams {
                n: 7,
                k: 2,
                endpoints_mode: EndpointsMode::Given,
                cross_mode: CrossMode::None,
                ..GenParams::default()
            },
            3,
        )
        .unwrap();
        assert_eq!(solve(&given).unwrap().algorithm, AlgorithmTag::Alg2);

        let intra = generate_random(
            &GenParams {
                n: 7,
                k: 2,
                cross_mode: CrossMode::None,
                ..GenParams::default()
            },
            3,
        )
        .unwrap();
        let tag = solve(&intra).unwrap().algorithm;
        assert!(matches!(tag, AlgorithmTag::Alg3T1 | AlgorithmTag::Alg3T2));

        let cross = generate_random(
            &GenParams {
                n: 7,
                k: 2,
                cross_mode: CrossMode::Matching,
                ..GenParams::default()
            },
            3,
        )
        .unwrap();
        let tag = solve(&cross).unwrap().algorithm;
        assert!(matches!(tag, AlgorithmTag::Alg4 | AlgorithmTag::TsppCase));
    }

    #[test]
    fn wrong_case_is_reported() {
        let inst = unit_inst(3, vec![vec![0, 1, 2]], vec![0], vec![], None);
        assert!(matches!(
            solve_specified(&inst),
            Err(SolveError::WrongCase {
                expected: CaseTag::SpecifiedEnds,
                ..
            })
        ));
    }

    #[test]
    fn infeasible_is_rejected_with_verdict() {
        let inst = unit_inst(
            4,
            vec![vec![0, 1, 2, 3]],
            vec![],
            vec![(0, 1), (0, 2), (0, 3)],
            None,
        );
        match solve(&inst) {
            Err(SolveError::Infeasible(v)) => assert_eq!(v.status, Status::InfeasibleDegree),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn solutions_are_deterministic() {
        let params = GenParams {
            n: 8,
            k: 3,
            ..GenParams::default()
        };
        for seed in 0..10u64 {
            let inst = generate_random(&params, seed).unwrap();
            let a = solve(&inst).unwrap();
            let b = solve(&inst).unwrap();
            assert_eq!(a.tour.seq, b.tour.seq);
            assert_eq!(a.tour.cost, b.tour.cost);
        }
    }

    #[test]
    fn validity_over_generated_instances() {
        for seed in 0..40u64 {
            for (mode, cross) in [
                (EndpointsMode::Given, CrossMode::Auto),
                (EndpointsMode::Free, CrossMode::Auto),
            ] {
                let params = GenParams {
                    n: 8,
                    k: 3,
                    endpoints_mode: mode,
                    cross_mode: cross,
                    ..GenParams::default()
                };
                let inst = generate_random(&params, seed).unwrap();
                let sol = solve(&inst).unwrap();
                let viol = check_tour(&inst, &sol.tour);
                assert!(viol.is_empty(), "seed {seed} mode {mode:?}: {viol:?}");
            }
        }
    }
}
