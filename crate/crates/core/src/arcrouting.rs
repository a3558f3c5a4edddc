//! Arc routing subroutines: closed walks that traverse a set of special
//! directed arcs (stacker crane) or undirected required edges (rural
//! postman). Each problem gets two constructions and a better-of-two
//! selector:
//!
//! * short-arcs: shrink each arc to a node, run Christofides over the node
//!   metric, re-expand in tour order (orientation by direction choice for
//!   directed arcs, by dynamic programming for undirected ones);
//! * long-arcs: complete the arcs into a minimum cycle cover (assignment
//!   problem for directed arcs, perfect matching on endpoints for undirected
//!   ones), connect the cycles by a doubled spanning tree and walk the
//!   resulting Eulerian graph.
//!
//! Outputs are in clean form: special arcs in some cyclic order joined by
//! direct connector edges, so a caller can substitute a path for any arc.

mod assignment;

pub use assignment::min_cost_assignment;

use std::collections::BTreeSet;

use crate::graphkit::{
    eulerian_walk, min_weight_perfect_matching, minimum_spanning_tree, GraphError, MatchingError,
    Multigraph, Walk,
};
use crate::metric::{Cost, CostMatrix, Metric};
use crate::pathsolver::{assemble_cyclic, christofides, PathError, Segment};

/// A set of special arcs over an ambient metric. Directed tasks must
/// traverse each arc from `.0` to `.1`; undirected tasks may traverse
/// either way.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArcTask {
    pub arcs: Vec<(usize, usize)>,
    pub directed: bool,
}

impl ArcTask {
    pub fn directed(arcs: Vec<(usize, usize)>) -> Self {
        ArcTask {
            arcs,
            directed: true,
        }
    }

    pub fn undirected(arcs: Vec<(usize, usize)>) -> Self {
        ArcTask {
            arcs,
            directed: false,
        }
    }

    /// Total special-arc length (the quantity D of the ratio bounds).
    pub fn total_length<M: Metric>(&self, metric: &M) -> Cost {
        self.arcs.iter().map(|&(u, v)| metric.dist(u, v)).sum()
    }
}

/// Quantities tracked by the ratio analyses: L is the within-cluster path
/// total of the reference optimum, D the special-arc total, A the remaining
/// optimum length, and `opt_ref` the oracle optimum when computed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BoundsLedger {
    pub within_cluster: Option<Cost>,
    pub remainder: Option<Cost>,
    pub special_total: Cost,
    pub opt_ref: Option<Cost>,
}

/// One traversal of a special arc inside a route.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArcVisit {
    pub arc: usize,
    pub forward: bool,
}

/// A closed walk in clean form: `visits` orders the arcs; the walk hops
/// between consecutive arc endpoints by direct edges.
#[derive(Debug, Clone)]
pub struct ArcRoute {
    pub visits: Vec<ArcVisit>,
    pub walk: Walk,
}

impl ArcRoute {
    fn empty() -> Self {
        ArcRoute {
            visits: Vec::new(),
            walk: Walk::empty_closed(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArcError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Matching(#[from] MatchingError),
    #[error(transparent)]
    Path(#[from] PathError),
}

pub(crate) fn route_from_visits<M: Metric>(
    task: &ArcTask,
    visits: Vec<ArcVisit>,
    metric: &M,
) -> ArcRoute {
    let mut seq: Vec<usize> = Vec::with_capacity(visits.len() * 2);
    for v in &visits {
        let (a, b) = task.arcs[v.arc];
        let (from, to) = if v.forward { (a, b) } else { (b, a) };
        if seq.last() != Some(&from) {
            seq.push(from);
        }
        if seq.last() != Some(&to) {
            seq.push(to);
        }
    }
    while seq.len() > 1 && seq.first() == seq.last() {
        seq.pop();
    }
    ArcRoute {
        visits,
        walk: Walk::closed(seq, metric),
    }
}

// ---------------------------------------------------------------------------
// Stacker crane (directed arcs).

/// Shrink arcs to nodes with distance min(d(head_i, tail_j), d(head_j,
/// tail_i)), tour the nodes with Christofides, then expand in the cheaper of
/// the two cyclic directions. Output length at most (3/2)A + 2D.
pub fn scp_short_arcs<M: Metric>(task: &ArcTask, metric: &M) -> Result<ArcRoute, ArcError> {
    debug_assert!(task.directed);
    let k = task.arcs.len();
    if k == 0 {
        return Ok(ArcRoute::empty());
    }
    let node_metric = CostMatrix::from_fn(k, |i, j| {
        if i == j {
            return 0;
        }
        let (si, ti) = task.arcs[i];
        let (sj, tj) = task.arcs[j];
        metric.dist(ti, sj).min(metric.dist(tj, si))
    });
    let nodes: Vec<usize> = (0..k).collect();
    let tour = christofides(&nodes, &node_metric)?;
    let order = tour.seq;
    let connector_total = |ord: &[usize]| -> Cost {
        (0..ord.len())
            .map(|p| {
                let (_, t_cur) = task.arcs[ord[p]];
                let (s_next, _) = task.arcs[ord[(p + 1) % ord.len()]];
                metric.dist(t_cur, s_next)
            })
            .sum()
    };
    let mut reversed = order.clone();
    reversed.reverse();
    let chosen = if connector_total(&reversed) < connector_total(&order) {
        reversed
    } else {
        order
    };
    let visits = chosen
        .into_iter()
        .map(|arc| ArcVisit { arc, forward: true })
        .collect();
    Ok(route_from_visits(task, visits, metric))
}

/// The connector structure of a minimum directed cycle cover: each arc's
/// head is assigned a successor arc's tail at minimum total connector cost.
#[derive(Debug, Clone)]
pub struct CycleCover {
    /// Arc indices grouped by cycle, in traversal order.
    pub cycles: Vec<Vec<usize>>,
    pub connector_cost: Cost,
}

/// Complete directed arcs into a minimum-cost set of directed cycles via an
/// exact assignment of arc heads to arc tails.
pub fn directed_cycle_cover<M: Metric>(arcs: &[(usize, usize)], metric: &M) -> CycleCover {
    let k = arcs.len();
    if k == 0 {
        return CycleCover {
            cycles: Vec::new(),
            connector_cost: 0,
        };
    }
    let cost: Vec<Vec<Cost>> = (0..k)
        .map(|i| (0..k).map(|j| metric.dist(arcs[i].1, arcs[j].0)).collect())
        .collect();
    let (succ, connector_cost) = min_cost_assignment(&cost);
    let mut seen = vec![false; k];
    let mut cycles = Vec::new();
    for start in 0..k {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut cur = start;
        while !seen[cur] {
            seen[cur] = true;
            cycle.push(cur);
            cur = succ[cur];
        }
        cycles.push(cycle);
    }
    CycleCover {
        cycles,
        connector_cost,
    }
}

/// Complete the arcs into a directed cycle cover, connect the cycles with a
/// doubled spanning tree and read the arc order off the Eulerian circuit.
/// Output length at most 3A + D.
pub fn scp_long_arcs<M: Metric>(task: &ArcTask, metric: &M) -> Result<ArcRoute, ArcError> {
    debug_assert!(task.directed);
    let k = task.arcs.len();
    if k == 0 {
        return Ok(ArcRoute::empty());
    }
    let cover = directed_cycle_cover(&task.arcs, metric);
    let order = if cover.cycles.len() == 1 {
        cover.cycles[0].clone()
    } else {
        // Inter-cycle spanning tree over minimum vertex-pair distances.
        let cycle_verts: Vec<Vec<usize>> = cover
            .cycles
            .iter()
            .map(|c| {
                let mut vs: Vec<usize> = c
                    .iter()
                    .flat_map(|&a| [task.arcs[a].0, task.arcs[a].1])
                    .collect();
                vs.sort_unstable();
                vs.dedup();
                vs
            })
            .collect();
        let m = cover.cycles.len();
        let cm = CostMatrix::from_fn(m, |a, b| {
            if a == b {
                return 0;
            }
            let mut best = Cost::MAX;
            for &u in &cycle_verts[a] {
                for &v in &cycle_verts[b] {
                    best = best.min(metric.dist(u, v));
                }
            }
            best
        });
        let attach = |a: usize, b: usize| -> (usize, usize) {
            let mut best = (Cost::MAX, (0, 0));
            for &u in &cycle_verts[a] {
                for &v in &cycle_verts[b] {
                    let d = metric.dist(u, v);
                    if (d, (u, v)) < best {
                        best = (d, (u, v));
                    }
                }
            }
            best.1
        };
        let nodes: Vec<usize> = (0..m).collect();
        let (tree, _) = minimum_spanning_tree(&nodes, &cm)?;

        // Directed multigraph: arcs, assignment connectors, and two
        // opposite copies of each tree link. Balanced at every vertex.
        let mut edges: Vec<(usize, usize, Option<usize>)> = Vec::new();
        for cycle in &cover.cycles {
            for (pos, &a) in cycle.iter().enumerate() {
                let next = cycle[(pos + 1) % cycle.len()];
                edges.push((task.arcs[a].0, task.arcs[a].1, Some(a)));
                edges.push((task.arcs[a].1, task.arcs[next].0, None));
            }
        }
        for &(a, b) in &tree {
            let (u, v) = attach(a, b);
            edges.push((u, v, None));
            edges.push((v, u, None));
        }
        let start = task.arcs[0].0;
        let circuit = directed_euler(&edges, start);
        circuit.into_iter().flatten().collect()
    };
    let visits = order
        .into_iter()
        .map(|arc| ArcVisit { arc, forward: true })
        .collect();
    Ok(route_from_visits(task, visits, metric))
}

/// The cheaper of the two stacker-crane constructions; length at most
/// (12/5)A + (7/5)D.
pub fn scp_solve<M: Metric + Sync>(task: &ArcTask, metric: &M) -> Result<ArcRoute, ArcError> {
    let (short, long) = branch_pair(
        || scp_short_arcs(task, metric),
        || scp_long_arcs(task, metric),
    );
    let (short, long) = (short?, long?);
    Ok(if long.walk.cost < short.walk.cost {
        long
    } else {
        short
    })
}

// ---------------------------------------------------------------------------
// Rural postman (undirected required edges).

fn edge_segments<M: Metric>(task: &ArcTask, metric: &M) -> Vec<Segment> {
    task.arcs
        .iter()
        .map(|&(u, v)| {
            if u == v {
                Segment::singleton(u)
            } else {
                Segment {
                    ends: (u, v),
                    path: vec![u, v],
                    cost: metric.dist(u, v),
                }
            }
        })
        .collect()
}

fn route_from_order<M: Metric>(
    task: &ArcTask,
    segments: &[Segment],
    order: &[usize],
    metric: &M,
) -> ArcRoute {
    let walk = assemble_cyclic(segments, order, None, metric);
    // Recover traversal directions from the assembled walk.
    let mut visits = Vec::with_capacity(order.len());
    let mut pos = 0;
    for &arc in order {
        let seg = &segments[arc];
        let entry = walk.seq[pos];
        visits.push(ArcVisit {
            arc,
            forward: entry == task.arcs[arc].0,
        });
        pos += seg.path.len();
    }
    let mut seq = walk.seq;
    while seq.len() > 1 && seq.first() == seq.last() {
        seq.pop();
    }
    let walk = Walk::closed(collapse_repeats(seq), metric);
    ArcRoute { visits, walk }
}

fn collapse_repeats(seq: Vec<usize>) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(seq.len());
    for v in seq {
        if out.last() != Some(&v) {
            out.push(v);
        }
    }
    out
}

/// Shrink each required edge to a node (distance: cheapest endpoint pair),
/// tour the nodes with Christofides, expand with orientations chosen by
/// dynamic programming around the cycle.
pub fn rpp_short_arcs<M: Metric>(task: &ArcTask, metric: &M) -> Result<ArcRoute, ArcError> {
    debug_assert!(!task.directed);
    let k = task.arcs.len();
    if k == 0 {
        return Ok(ArcRoute::empty());
    }
    let segments = edge_segments(task, metric);
    let sm = crate::pathsolver::segment_metric(&segments, metric);
    let nodes: Vec<usize> = (0..k).collect();
    let tour = christofides(&nodes, &sm)?;
    Ok(route_from_order(task, &segments, &tour.seq, metric))
}

/// Complete the required edges into a cycle cover (an exact perfect matching
/// over edge endpoints), connect cycles with a doubled spanning tree, walk
/// the Eulerian graph. Output length at most 3A + D.
pub fn rpp_long_arcs<M: Metric>(task: &ArcTask, metric: &M) -> Result<ArcRoute, ArcError> {
    debug_assert!(!task.directed);
    let k = task.arcs.len();
    if k == 0 {
        return Ok(ArcRoute::empty());
    }
    let segments = edge_segments(task, metric);
    if k == 1 {
        return Ok(route_from_order(task, &segments, &[0], metric));
    }

    // Endpoint slots 2i (arc i tail) and 2i+1 (arc i head); a perfect
    // matching over slots completes the edges into cycles.
    let slot_vertex = |s: usize| {
        let (u, v) = task.arcs[s / 2];
        if s.is_multiple_of(2) {
            u
        } else {
            v
        }
    };
    let slot_metric = CostMatrix::from_fn(2 * k, |a, b| {
        if a == b {
            0
        } else {
            metric.dist(slot_vertex(a), slot_vertex(b))
        }
    });
    let slots: Vec<usize> = (0..2 * k).collect();
    let pairing = min_weight_perfect_matching(&slots, &slot_metric)?;
    let mut mate = vec![usize::MAX; 2 * k];
    for &(a, b) in &pairing {
        mate[a] = b;
        mate[b] = a;
    }

    // Decompose into cycles: alternate arc edges (slot 2i <-> 2i+1) and
    // matching connectors.
    let mut seen_arc = vec![false; k];
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    for start in 0..k {
        if seen_arc[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut slot = 2 * start;
        loop {
            let arc = slot / 2;
            if seen_arc[arc] {
                break;
            }
            seen_arc[arc] = true;
            cycle.push(arc);
            let other = slot ^ 1;
            slot = mate[other];
        }
        cycles.push(cycle);
    }

    let order: Vec<usize> = if cycles.len() == 1 {
        cycles[0].clone()
    } else {
        // Connect cycles with a doubled inter-cycle spanning tree and read
        // the arc order off an Eulerian circuit.
        let cycle_verts: Vec<Vec<usize>> = cycles
            .iter()
            .map(|c| {
                let mut vs: Vec<usize> = c
                    .iter()
                    .flat_map(|&a| [task.arcs[a].0, task.arcs[a].1])
                    .collect();
                vs.sort_unstable();
                vs.dedup();
                vs
            })
            .collect();
        let m = cycles.len();
        let cm = CostMatrix::from_fn(m, |a, b| {
            if a == b {
                return 0;
            }
            let mut best = Cost::MAX;
            for &u in &cycle_verts[a] {
                for &v in &cycle_verts[b] {
                    best = best.min(metric.dist(u, v));
                }
            }
            best
        });
        let nodes: Vec<usize> = (0..m).collect();
        let (tree, _) = minimum_spanning_tree(&nodes, &cm)?;

        let mut vertex_ids: BTreeSet<usize> = BTreeSet::new();
        for &(u, v) in &task.arcs {
            vertex_ids.insert(u);
            vertex_ids.insert(v);
        }
        let mut g = Multigraph::new(vertex_ids.iter().copied());
        for &(u, v) in &task.arcs {
            if u != v {
                g.add_edge(u, v);
            }
        }
        // Matching connectors.
        for &(a, b) in &pairing {
            let (u, v) = (slot_vertex(a), slot_vertex(b));
            if u != v {
                g.add_edge(u, v);
            }
        }
        for &(a, b) in &tree {
            let mut best = (Cost::MAX, (0, 0));
            for &u in &cycle_verts[a] {
                for &v in &cycle_verts[b] {
                    let d = metric.dist(u, v);
                    if (d, (u, v)) < best {
                        best = (d, (u, v));
                    }
                }
            }
            let (u, v) = best.1;
            g.add_edge(u, v);
            g.add_edge(u, v);
        }
        let start = task.arcs[0].0;
        let euler = eulerian_walk(&g, start, start)?;
        // Arc order: first step matching each arc's endpoints claims it.
        let mut remaining: Vec<bool> = vec![true; k];
        let mut order = Vec::with_capacity(k);
        for w in euler.windows(2) {
            let hit = (0..k).find(|&a| {
                let (u, v) = task.arcs[a];
                remaining[a]
                    && ((w[0], w[1]) == (u, v) || (w[0], w[1]) == (v, u) || (u == v && w[0] == u))
            });
            if let Some(a) = hit {
                remaining[a] = false;
                order.push(a);
            }
        }
        // Zero-length arcs at isolated positions may be missed by the
        // window scan; append them at the end.
        for (a, rem) in remaining.iter().enumerate() {
            if *rem {
                order.push(a);
            }
        }
        order
    };
    Ok(route_from_order(task, &segments, &order, metric))
}

/// The cheaper of the two rural-postman constructions; within 3/2 of the
/// optimal walk.
pub fn rpp_solve<M: Metric + Sync>(task: &ArcTask, metric: &M) -> Result<ArcRoute, ArcError> {
    let (short, long) = branch_pair(
        || rpp_short_arcs(task, metric),
        || rpp_long_arcs(task, metric),
    );
    let (short, long) = (short?, long?);
    Ok(if long.walk.cost < short.walk.cost {
        long
    } else {
        short
    })
}

/// Evaluate the two branch constructions, in parallel when enabled.
fn branch_pair<T: Send>(a: impl FnOnce() -> T + Send, b: impl FnOnce() -> T + Send) -> (T, T) {
    #[cfg(feature = "parallel")]
    {
        rayon::join(a, b)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (a(), b())
    }
}

/// Hierholzer over labeled directed edges; returns the labels of arc edges
/// in traversal order (connectors carry no label).
fn directed_euler(edges: &[(usize, usize, Option<usize>)], start: usize) -> Vec<Option<usize>> {
    use std::collections::BTreeMap;
    let mut out_edges: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (id, &(u, _, _)) in edges.iter().enumerate() {
        out_edges.entry(u).or_default().push(id);
    }
    for list in out_edges.values_mut() {
        list.sort_unstable_by(|a, b| b.cmp(a));
    }
    let mut used = vec![false; edges.len()];
    // stack of (vertex, edge taken to reach it)
    let mut stack: Vec<(usize, Option<usize>)> = vec![(start, None)];
    let mut trail: Vec<Option<usize>> = Vec::new();
    while let Some(&(v, _)) = stack.last() {
        let next = loop {
            match out_edges.get_mut(&v).and_then(|l| l.pop()) {
                Some(id) if !used[id] => {
                    used[id] = true;
                    break Some(id);
                }
                Some(_) => continue,
                None => break None,
            }
        };
        match next {
            Some(id) => stack.push((edges[id].1, Some(id))),
            None => {
                let (_, via) = stack.pop().unwrap();
                if let Some(id) = via {
                    trail.push(edges[id].2);
                }
            }
        }
    }
    trail.reverse();
    debug_assert_eq!(
        trail.len(),
        edges.len(),
        "euler circuit must use every edge"
    );
    trail
}
