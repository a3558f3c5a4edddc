//! Exact small-instance optima: ground truth for every ratio assertion.
//!
//! Tours and paths get a Held-Karp dynamic program plus an independent
//! permutation enumerator (two routes, cross-checked in tests). Arc tasks
//! are solved by exhaustive arc-order (and orientation) enumeration. The
//! cluster routing optimum enumerates cluster orders times per-cluster block
//! arrangements; a slower enumerator over raw vertex sequences filtered by
//! the validity checker cross-checks it.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use crate::arcrouting::{route_from_visits, ArcTask, ArcVisit};
use crate::graphkit::Walk;
use crate::instance::{build_cluster_subgraphs, classify, MetricInstance, Status};
use crate::metric::{Cost, Metric};
use crate::pathsolver::{build_segments, PathError, Segment};
use crate::validity::check_tour;

/// Enumeration limits. Caps are configuration, not constants; the defaults
/// keep the full test suite at desk scale.
#[derive(Debug, Clone, Default)]
pub struct OracleConfig {
    pub tsp_cap: Option<usize>,
    pub gcrp_cap: Option<usize>,
    pub arc_cap: Option<usize>,
    /// Cooperative cancellation: enumerations poll this flag and abort with
    /// `OracleError::Cancelled` when set.
    pub cancel: Option<Arc<AtomicBool>>,
}

impl OracleConfig {
    pub const DEFAULT_TSP_CAP: usize = 12;
    pub const DEFAULT_GCRP_CAP: usize = 10;
    pub const DEFAULT_ARC_CAP: usize = 6;

    fn tsp_cap(&self) -> usize {
        self.tsp_cap.unwrap_or(Self::DEFAULT_TSP_CAP)
    }

    fn gcrp_cap(&self) -> usize {
        self.gcrp_cap.unwrap_or(Self::DEFAULT_GCRP_CAP)
    }

    fn arc_cap(&self) -> usize {
        self.arc_cap.unwrap_or(Self::DEFAULT_ARC_CAP)
    }

    fn cancelled(&self) -> bool {
        self.cancel
            .as_ref()
            .map(|c| c.load(Ordering::Relaxed))
            .unwrap_or(false)
    }
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub opt_cost: Cost,
    pub witness: Walk,
    pub nodes_explored: u64,
    /// The enumeration cap that applied to this run.
    pub budget: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("{what} size {size} exceeds oracle cap {cap}")]
    CapExceeded {
        what: &'static str,
        size: usize,
        cap: usize,
    },
    #[error("no feasible solution exists: {0}")]
    Infeasible(String),
    #[error("cancelled")]
    Cancelled,
    #[error(transparent)]
    Structure(#[from] PathError),
}

// ---------------------------------------------------------------------------
// Tours and paths.

/// Exact TSP over `vertices` by Held-Karp dynamic programming.
pub fn exact_tsp<M: Metric>(
    vertices: &[usize],
    metric: &M,
    cfg: &OracleConfig,
) -> Result<OracleResult, OracleError> {
    let verts = dedup(vertices);
    let n = verts.len();
    if n > cfg.tsp_cap() {
        return Err(OracleError::CapExceeded {
            what: "tsp",
            size: n,
            cap: cfg.tsp_cap(),
        });
    }
    if n <= 1 {
        return Ok(OracleResult {
            opt_cost: 0,
            witness: Walk {
                seq: verts,
                closed: true,
                cost: 0,
            },
            nodes_explored: 0,
            budget: cfg.tsp_cap(),
        });
    }
    let start = verts[0];
    let others = &verts[1..];
    let (dp, parent, explored) = held_karp_forward(start, others, metric, cfg)?;
    let r = others.len();
    let full = (1usize << r) - 1;
    let mut best = Cost::MAX;
    let mut best_end = 0;
    for i in 0..r {
        let c = dp[full * r + i];
        if c < Cost::MAX {
            let total = c + metric.dist(others[i], start);
            if total < best {
                best = total;
                best_end = i;
            }
        }
    }
    let seq = reconstruct_path(start, others, &parent, full, best_end);
    Ok(OracleResult {
        opt_cost: best,
        witness: Walk::closed(seq, metric),
        nodes_explored: explored,
        budget: cfg.tsp_cap(),
    })
}

/// Exact Hamiltonian path optimum with fixed, half-fixed or free ends.
/// With `s == t` the problem degenerates to the closed tour.
pub fn exact_tsp_path<M: Metric>(
    vertices: &[usize],
    metric: &M,
    s: Option<usize>,
    t: Option<usize>,
    cfg: &OracleConfig,
) -> Result<OracleResult, OracleError> {
    let mut all = vertices.to_vec();
    if let Some(x) = s {
        all.push(x);
    }
    if let Some(x) = t {
        all.push(x);
    }
    let verts = dedup(&all);
    let n = verts.len();
    if n > cfg.tsp_cap() {
        return Err(OracleError::CapExceeded {
            what: "tsp path",
            size: n,
            cap: cfg.tsp_cap(),
        });
    }
    if n <= 1 {
        return Ok(OracleResult {
            opt_cost: 0,
            witness: Walk {
                seq: verts,
                closed: false,
                cost: 0,
            },
            nodes_explored: 0,
            budget: cfg.tsp_cap(),
        });
    }
    match (s, t) {
        (Some(a), Some(b)) if a == b => exact_tsp(&verts, metric, cfg),
        (Some(a), Some(b)) => path_fixed(&verts, metric, a, Some(b), cfg),
        (Some(a), None) => path_fixed(&verts, metric, a, None, cfg),
        (None, Some(b)) => {
            let mut r = path_fixed(&verts, metric, b, None, cfg)?;
            r.witness.seq.reverse();
            Ok(r)
        }
        (None, None) => {
            let mut best: Option<OracleResult> = None;
            let mut explored = 0;
            for &a in &verts {
                let r = path_fixed(&verts, metric, a, None, cfg)?;
                explored += r.nodes_explored;
                if best
                    .as_ref()
                    .map(|b| r.opt_cost < b.opt_cost)
                    .unwrap_or(true)
                {
                    best = Some(r);
                }
            }
            let mut out = best.unwrap();
            out.nodes_explored = explored;
            Ok(out)
        }
    }
}

fn path_fixed<M: Metric>(
    verts: &[usize],
    metric: &M,
    s: usize,
    t: Option<usize>,
    cfg: &OracleConfig,
) -> Result<OracleResult, OracleError> {
    let others: Vec<usize> = verts.iter().copied().filter(|&v| v != s).collect();
    let (dp, parent, explored) = held_karp_forward(s, &others, metric, cfg)?;
    let r = others.len();
    let full = (1usize << r) - 1;
    let mut best = Cost::MAX;
    let mut best_end = 0;
    for i in 0..r {
        if let Some(tv) = t {
            if others[i] != tv {
                continue;
            }
        }
        let c = dp[full * r + i];
        if c < best {
            best = c;
            best_end = i;
        }
    }
    let seq = reconstruct_path(s, &others, &parent, full, best_end);
    Ok(OracleResult {
        opt_cost: best,
        witness: Walk::open(seq, metric),
        nodes_explored: explored,
        budget: cfg.tsp_cap(),
    })
}

/// dp[mask * r + i]: cheapest path from `start` through exactly `mask`,
/// ending at `others[i]`.
fn held_karp_forward<M: Metric>(
    start: usize,
    others: &[usize],
    metric: &M,
    cfg: &OracleConfig,
) -> Result<(Vec<Cost>, Vec<u32>, u64), OracleError> {
    let r = others.len();
    let size = (1usize << r) * r;
    let mut dp = vec![Cost::MAX; size];
    let mut parent = vec![u32::MAX; size];
    let mut explored = 0u64;
    for i in 0..r {
        dp[(1 << i) * r + i] = metric.dist(start, others[i]);
    }
    for mask in 1usize..(1 << r) {
        if explored.is_multiple_of(8192) && cfg.cancelled() {
            return Err(OracleError::Cancelled);
        }
        for i in 0..r {
            if mask & (1 << i) == 0 {
                continue;
            }
            let cur = dp[mask * r + i];
            if cur == Cost::MAX {
                continue;
            }
            for j in 0..r {
                if mask & (1 << j) != 0 {
                    continue;
                }
                let next = mask | (1 << j);
                let cand = cur + metric.dist(others[i], others[j]);
                explored += 1;
                if cand < dp[next * r + j] {
                    dp[next * r + j] = cand;
                    parent[next * r + j] = i as u32;
                }
            }
        }
    }
    Ok((dp, parent, explored))
}

fn reconstruct_path(
    start: usize,
    others: &[usize],
    parent: &[u32],
    full: usize,
    end: usize,
) -> Vec<usize> {
    let r = others.len();
    let mut seq = Vec::with_capacity(r + 1);
    let mut mask = full;
    let mut i = end;
    loop {
        seq.push(others[i]);
        let p = parent[mask * r + i];
        mask &= !(1 << i);
        if p == u32::MAX {
            break;
        }
        i = p as usize;
    }
    seq.push(start);
    seq.reverse();
    seq
}

/// Independent TSP oracle: direct enumeration of vertex orders.
pub fn enumerate_tsp<M: Metric>(
    vertices: &[usize],
    metric: &M,
    cfg: &OracleConfig,
) -> Result<OracleResult, OracleError> {
    let verts = dedup(vertices);
    let n = verts.len();
    if n > 8 {
        return Err(OracleError::CapExceeded {
            what: "tsp enumeration",
            size: n,
            cap: 8,
        });
    }
    if n <= 1 {
        return Ok(OracleResult {
            opt_cost: 0,
            witness: Walk {
                seq: verts,
                closed: true,
                cost: 0,
            },
            nodes_explored: 0,
            budget: 8,
        });
    }
    let start = verts[0];
    let mut rest: Vec<usize> = verts[1..].to_vec();
    let mut best: Option<(Cost, Vec<usize>)> = None;
    let mut explored = 0u64;
    permute_visit(&mut rest, 0, &mut |perm| {
        explored += 1;
        let mut seq = Vec::with_capacity(n);
        seq.push(start);
        seq.extend_from_slice(perm);
        let w = Walk::closed(seq, metric);
        if best.as_ref().map(|(c, _)| w.cost < *c).unwrap_or(true) {
            best = Some((w.cost, w.seq));
        }
    });
    if cfg.cancelled() {
        return Err(OracleError::Cancelled);
    }
    let (opt_cost, seq) = best.unwrap();
    Ok(OracleResult {
        opt_cost,
        witness: Walk::closed(seq, metric),
        nodes_explored: explored,
        budget: 8,
    })
}

/// Independent path oracle: enumeration with endpoint filters.
pub fn enumerate_tsp_path<M: Metric>(
    vertices: &[usize],
    metric: &M,
    s: Option<usize>,
    t: Option<usize>,
    cfg: &OracleConfig,
) -> Result<OracleResult, OracleError> {
    let mut all = vertices.to_vec();
    if let Some(x) = s {
        all.push(x);
    }
    if let Some(x) = t {
        all.push(x);
    }
    let mut verts = dedup(&all);
    let n = verts.len();
    if n > 8 {
        return Err(OracleError::CapExceeded {
            what: "path enumeration",
            size: n,
            cap: 8,
        });
    }
    if n <= 1 {
        return Ok(OracleResult {
            opt_cost: 0,
            witness: Walk {
                seq: verts,
                closed: false,
                cost: 0,
            },
            nodes_explored: 0,
            budget: 8,
        });
    }
    if matches!((s, t), (Some(a), Some(b)) if a == b) {
        return enumerate_tsp(&verts, metric, cfg);
    }
    let mut best: Option<(Cost, Vec<usize>)> = None;
    let mut explored = 0u64;
    permute_visit(&mut verts, 0, &mut |perm| {
        if let Some(a) = s {
            if perm[0] != a {
                return;
            }
        }
        if let Some(b) = t {
            if *perm.last().unwrap() != b {
                return;
            }
        }
        explored += 1;
        let w = Walk::open(perm.to_vec(), metric);
        if best.as_ref().map(|(c, _)| w.cost < *c).unwrap_or(true) {
            best = Some((w.cost, w.seq));
        }
    });
    if cfg.cancelled() {
        return Err(OracleError::Cancelled);
    }
    let (opt_cost, seq) = best.unwrap();
    Ok(OracleResult {
        opt_cost,
        witness: Walk::open(seq, metric),
        nodes_explored: explored,
        budget: 8,
    })
}

// ---------------------------------------------------------------------------
// Arc tasks.

/// Exact stacker-crane optimum: every cyclic arc order with direct metric
/// connectors.
pub fn exact_scp<M: Metric>(
    task: &ArcTask,
    metric: &M,
    cfg: &OracleConfig,
) -> Result<OracleResult, OracleError> {
    debug_assert!(task.directed);
    arc_enumeration(task, metric, cfg, false)
}

/// Exact rural-postman optimum: arc orders times traversal orientations.
pub fn exact_rpp<M: Metric>(
    task: &ArcTask,
    metric: &M,
    cfg: &OracleConfig,
) -> Result<OracleResult, OracleError> {
    debug_assert!(!task.directed);
    arc_enumeration(task, metric, cfg, true)
}

fn arc_enumeration<M: Metric>(
    task: &ArcTask,
    metric: &M,
    cfg: &OracleConfig,
    orientations: bool,
) -> Result<OracleResult, OracleError> {
    let k = task.arcs.len();
    if k > cfg.arc_cap() {
        return Err(OracleError::CapExceeded {
            what: "arcs",
            size: k,
            cap: cfg.arc_cap(),
        });
    }
    if k == 0 {
        return Ok(OracleResult {
            opt_cost: 0,
            witness: Walk::empty_closed(),
            nodes_explored: 0,
            budget: cfg.arc_cap(),
        });
    }
    let mut rest: Vec<usize> = (1..k).collect();
    let mut best: Option<(Cost, Vec<ArcVisit>)> = None;
    let mut explored = 0u64;
    let masks = if orientations { 1usize << k } else { 1 };
    permute_visit(&mut rest, 0, &mut |perm| {
        let mut order = Vec::with_capacity(k);
        order.push(0usize);
        order.extend_from_slice(perm);
        for mask in 0..masks {
            explored += 1;
            let visits: Vec<ArcVisit> = order
                .iter()
                .map(|&a| ArcVisit {
                    arc: a,
                    forward: !orientations || mask & (1 << a) == 0,
                })
                .collect();
            let mut cost: Cost = 0;
            for (p, v) in visits.iter().enumerate() {
                let (a0, a1) = task.arcs[v.arc];
                let (from, to) = if v.forward { (a0, a1) } else { (a1, a0) };
                cost += metric.dist(from, to);
                let nxt = &visits[(p + 1) % k];
                let (b0, b1) = task.arcs[nxt.arc];
                let nxt_from = if nxt.forward { b0 } else { b1 };
                cost += metric.dist(to, nxt_from);
            }
            if best.as_ref().map(|(c, _)| cost < *c).unwrap_or(true) {
                best = Some((cost, visits));
            }
        }
    });
    if cfg.cancelled() {
        return Err(OracleError::Cancelled);
    }
    let (opt_cost, visits) = best.unwrap();
    let route = route_from_visits(task, visits, metric);
    debug_assert_eq!(route.walk.cost, opt_cost);
    Ok(OracleResult {
        opt_cost,
        witness: route.walk,
        nodes_explored: explored,
        budget: cfg.arc_cap(),
    })
}

// ---------------------------------------------------------------------------
// Cluster routing.

/// A candidate contiguous tour block for one cluster.
#[derive(Debug, Clone)]
struct Block {
    run: Vec<usize>,
    cost: Cost,
    entry: usize,
    exit: usize,
}

/// Exact cluster routing optimum: enumerate cluster orders and, per cluster,
/// every arrangement of its required segments (orders, orientations and
/// endpoint choices), constraining cross-cluster required edges to be
/// realized as block connectors.
pub fn exact_gcrp(inst: &MetricInstance, cfg: &OracleConfig) -> Result<OracleResult, OracleError> {
    let verdict = classify(inst);
    if verdict.status != Status::Feasible {
        return Err(OracleError::Infeasible(format!("{:?}", verdict.status)));
    }
    let subs = build_cluster_subgraphs(inst);
    let content: Vec<usize> = (0..inst.k())
        .filter(|&i| !subs[i].vertices.is_empty())
        .collect();
    if content.is_empty() {
        return Ok(OracleResult {
            opt_cost: 0,
            witness: Walk::empty_closed(),
            nodes_explored: 0,
            budget: cfg.gcrp_cap(),
        });
    }
    let content_size: usize = content.iter().map(|&i| subs[i].vertices.len()).sum();
    if content_size > cfg.gcrp_cap() {
        return Err(OracleError::CapExceeded {
            what: "cluster routing",
            size: content_size,
            cap: cfg.gcrp_cap(),
        });
    }

    let mut block_lists: Vec<Vec<Block>> = Vec::with_capacity(content.len());
    for &ci in &content {
        let segments = build_segments(&subs[ci].vertices, &subs[ci].edges, inst)?;
        let mode = match inst.endpoints() {
            Some(ends) => {
                let (s, t) = ends[ci];
                if s == t {
                    // A coinciding start/end revisits its vertex unless the
                    // cluster's content is that single vertex.
                    if subs[ci].vertices.len() > 1 && inst.required_vertices().contains(&s) {
                        return Err(OracleError::Infeasible(format!(
                            "cluster {ci} start equals end at required vertex {s}"
                        )));
                    }
                    BlockMode::Closed(s)
                } else {
                    BlockMode::Fixed(s, t)
                }
            }
            None => BlockMode::Free,
        };
        let blocks = block_arrangements(&segments, mode, inst);
        if blocks.is_empty() {
            return Err(OracleError::Infeasible(format!(
                "cluster {ci} admits no block arrangement"
            )));
        }
        block_lists.push(blocks);
    }

    let cross = inst.cross_edges();
    let mut explored = 0u64;
    let mut best: Option<(Cost, Vec<usize>)> = None;

    // Cluster orders with the first cluster pinned (cyclic symmetry).
    let mut rest: Vec<usize> = (1..content.len()).collect();
    let mut order = Vec::with_capacity(content.len());
    permute_visit(&mut rest, 0, &mut |perm| {
        order.clear();
        order.push(0usize);
        order.extend_from_slice(perm);
        stitch_blocks(&order, &block_lists, &cross, inst, &mut explored, &mut best);
    });
    if cfg.cancelled() {
        return Err(OracleError::Cancelled);
    }
    match best {
        Some((opt_cost, seq)) => {
            let witness = Walk::closed(seq, inst);
            debug_assert_eq!(witness.cost, opt_cost);
            Ok(OracleResult {
                opt_cost,
                witness,
                nodes_explored: explored,
                budget: cfg.gcrp_cap(),
            })
        }
        None => Err(OracleError::Infeasible(
            "no cluster order realizes the cross edges".into(),
        )),
    }
}

/// Depth-first product over per-cluster block choices with cost pruning.
fn stitch_blocks<M: Metric>(
    order: &[usize],
    block_lists: &[Vec<Block>],
    cross: &[(usize, usize)],
    metric: &M,
    explored: &mut u64,
    best: &mut Option<(Cost, Vec<usize>)>,
) {
    #[allow(clippy::too_many_arguments)]
    fn rec<M: Metric>(
        order: &[usize],
        pos: usize,
        chosen: &mut Vec<usize>,
        running: Cost,
        block_lists: &[Vec<Block>],
        cross: &[(usize, usize)],
        metric: &M,
        explored: &mut u64,
        best: &mut Option<(Cost, Vec<usize>)>,
    ) {
        if let Some((bc, _)) = best {
            if running >= *bc {
                return;
            }
        }
        if pos == order.len() {
            *explored += 1;
            // Close the cycle and verify cross-edge realization.
            let first = &block_lists[order[0]][chosen[0]];
            let last = &block_lists[order[order.len() - 1]][chosen[order.len() - 1]];
            let total = running + metric.dist(last.exit, first.entry);
            if let Some((bc, _)) = best {
                if total >= *bc {
                    return;
                }
            }
            let mut connectors: Vec<(usize, usize)> = Vec::with_capacity(order.len());
            for p in 0..order.len() {
                let cur = &block_lists[order[p]][chosen[p]];
                let nxt = &block_lists[order[(p + 1) % order.len()]][chosen[(p + 1) % order.len()]];
                connectors.push((cur.exit, nxt.entry));
            }
            for &(u, v) in cross {
                let hit = connectors
                    .iter()
                    .any(|&(a, b)| (a, b) == (u, v) || (a, b) == (v, u));
                if !hit {
                    return;
                }
            }
            let mut seq = Vec::new();
            for p in 0..order.len() {
                seq.extend_from_slice(&block_lists[order[p]][chosen[p]].run);
            }
            *best = Some((total, seq));
            return;
        }
        for (bi, block) in block_lists[order[pos]].iter().enumerate() {
            let step = if pos == 0 {
                block.cost
            } else {
                let prev = &block_lists[order[pos - 1]][chosen[pos - 1]];
                block.cost + metric.dist(prev.exit, block.entry)
            };
            chosen.push(bi);
            rec(
                order,
                pos + 1,
                chosen,
                running + step,
                block_lists,
                cross,
                metric,
                explored,
                best,
            );
            chosen.pop();
        }
    }
    let mut chosen = Vec::with_capacity(order.len());
    rec(
        order,
        0,
        &mut chosen,
        0,
        block_lists,
        cross,
        metric,
        explored,
        best,
    );
}

#[derive(Debug, Clone, Copy)]
enum BlockMode {
    Free,
    Fixed(usize, usize),
    Closed(usize),
}

/// Every way to lay the cluster's segments into one contiguous block.
fn block_arrangements<M: Metric>(segments: &[Segment], mode: BlockMode, metric: &M) -> Vec<Block> {
    let m = segments.len();
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..m).collect();

    let emit = |order: &[usize], entries: &[usize], out: &mut Vec<Block>| {
        let mut run = Vec::new();
        let mut cost = 0;
        for (p, &si) in order.iter().enumerate() {
            let seg = &segments[si];
            if p > 0 {
                cost += metric.dist(*run.last().unwrap(), entries[p]);
            }
            run.extend(seg.oriented(entries[p]));
            cost += seg.cost;
        }
        match mode {
            BlockMode::Closed(home) => {
                let entry = run[0];
                if run.len() > 1 {
                    cost += metric.dist(*run.last().unwrap(), home);
                    run.push(home);
                }
                out.push(Block {
                    run,
                    cost,
                    entry,
                    exit: home,
                });
            }
            _ => {
                let entry = run[0];
                let exit = *run.last().unwrap();
                out.push(Block {
                    run,
                    cost,
                    entry,
                    exit,
                });
            }
        }
    };

    // Constraints on the first/last segment and their entries per mode.
    let seg_with_end = |v: usize| segments.iter().position(|s| s.contains_as_end(v));

    match mode {
        BlockMode::Fixed(s, t) => {
            let (s_seg, t_seg) = match (seg_with_end(s), seg_with_end(t)) {
                (Some(a), Some(b)) => (a, b),
                _ => return out,
            };
            if s_seg == t_seg {
                if m == 1 && segments[0].contains_as_end(s) && segments[0].contains_as_end(t) {
                    emit(&[0], &[s], &mut out);
                }
                return out;
            }
            let middles: Vec<usize> = (0..m).filter(|&i| i != s_seg && i != t_seg).collect();
            let mut mid = middles.clone();
            permute_visit(&mut mid, 0, &mut |perm| {
                let mut order = vec![s_seg];
                order.extend_from_slice(perm);
                order.push(t_seg);
                orientation_product(segments, &order, Some(s), Some(t), &mut |entries| {
                    emit(&order, entries, &mut out)
                });
            });
        }
        BlockMode::Closed(home) => {
            let home_seg = match seg_with_end(home) {
                Some(i) => i,
                None => return out,
            };
            if m == 1 {
                emit(&[home_seg], &[home], &mut out);
                return out;
            }
            let others: Vec<usize> = (0..m).filter(|&i| i != home_seg).collect();
            let mut rest = others.clone();
            permute_visit(&mut rest, 0, &mut |perm| {
                let mut order = vec![home_seg];
                order.extend_from_slice(perm);
                orientation_product(segments, &order, Some(home), None, &mut |entries| {
                    emit(&order, entries, &mut out)
                });
            });
        }
        BlockMode::Free => {
            permute_visit(&mut idx, 0, &mut |perm| {
                orientation_product(segments, perm, None, None, &mut |entries| {
                    emit(perm, entries, &mut out)
                });
            });
        }
    }
    out
}

/// Visit every combination of segment entry vertices along `order`.
fn orientation_product(
    segments: &[Segment],
    order: &[usize],
    pin_first: Option<usize>,
    pin_last_exit: Option<usize>,
    f: &mut impl FnMut(&[usize]),
) {
    fn rec(
        segments: &[Segment],
        order: &[usize],
        pos: usize,
        entries: &mut Vec<usize>,
        pin_first: Option<usize>,
        pin_last_exit: Option<usize>,
        f: &mut impl FnMut(&[usize]),
    ) {
        if pos == order.len() {
            f(entries);
            return;
        }
        let seg = &segments[order[pos]];
        let mut options = if seg.ends.0 == seg.ends.1 {
            vec![seg.ends.0]
        } else {
            vec![seg.ends.0, seg.ends.1]
        };
        if pos == 0 {
            if let Some(s) = pin_first {
                options.retain(|&e| e == s);
            }
        }
        if pos + 1 == order.len() {
            if let Some(t) = pin_last_exit {
                options.retain(|&e| seg.other_end(e) == t);
            }
        }
        for e in options {
            entries.push(e);
            rec(
                segments,
                order,
                pos + 1,
                entries,
                pin_first,
                pin_last_exit,
                f,
            );
            entries.pop();
        }
    }
    let mut entries = Vec::with_capacity(order.len());
    rec(
        segments,
        order,
        0,
        &mut entries,
        pin_first,
        pin_last_exit,
        f,
    );
}

/// Slower independent cluster-routing oracle: enumerate raw vertex sequences
/// over the required content and keep the cheapest one the validity checker
/// accepts. Assumes each content vertex appears exactly once.
pub fn exact_gcrp_filter(
    inst: &MetricInstance,
    cap: usize,
    cfg: &OracleConfig,
) -> Result<OracleResult, OracleError> {
    let verdict = classify(inst);
    if verdict.status != Status::Feasible {
        return Err(OracleError::Infeasible(format!("{:?}", verdict.status)));
    }
    let subs = build_cluster_subgraphs(inst);
    let mut content: Vec<usize> = subs
        .iter()
        .flat_map(|s| s.vertices.iter().copied())
        .collect();
    content.sort_unstable();
    content.dedup();
    if content.is_empty() {
        return Ok(OracleResult {
            opt_cost: 0,
            witness: Walk::empty_closed(),
            nodes_explored: 0,
            budget: cap,
        });
    }
    if content.len() > cap {
        return Err(OracleError::CapExceeded {
            what: "filter enumeration",
            size: content.len(),
            cap,
        });
    }
    let first = content[0];
    let mut rest: Vec<usize> = content[1..].to_vec();
    let mut best: Option<(Cost, Vec<usize>)> = None;
    let mut explored = 0u64;
    permute_visit(&mut rest, 0, &mut |perm| {
        explored += 1;
        let mut seq = Vec::with_capacity(content.len());
        seq.push(first);
        seq.extend_from_slice(perm);
        let w = Walk::closed(seq, inst);
        if let Some((c, _)) = &best {
            if w.cost >= *c {
                return;
            }
        }
        if check_tour(inst, &w).is_empty() {
            best = Some((w.cost, w.seq));
        }
    });
    if cfg.cancelled() {
        return Err(OracleError::Cancelled);
    }
    match best {
        Some((opt_cost, seq)) => Ok(OracleResult {
            opt_cost,
            witness: Walk::closed(seq, inst),
            nodes_explored: explored,
            budget: cap,
        }),
        None => Err(OracleError::Infeasible(
            "no permutation passes validity".into(),
        )),
    }
}

/// Within-cluster portion of a tour's cost: the L of the ratio ledgers.
pub fn within_cluster_cost(inst: &MetricInstance, walk: &Walk) -> Cost {
    walk.edges()
        .iter()
        .filter(|&&(u, v)| inst.cluster_of(u) == inst.cluster_of(v))
        .map(|&(u, v)| inst.dist(u, v))
        .sum()
}

fn dedup(vertices: &[usize]) -> Vec<usize> {
    let mut v = vertices.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

fn permute_visit(v: &mut Vec<usize>, i: usize, f: &mut impl FnMut(&[usize])) {
    if i == v.len() {
        f(v);
        return;
    }
    for j in i..v.len() {
        v.swap(i, j);
        permute_visit(v, i + 1, f);
        v.swap(i, j);
    }
}
