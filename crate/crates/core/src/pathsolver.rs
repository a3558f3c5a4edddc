//! Tour and path constructions: Christofides cycles, the two fixed-ends path
//! solutions (tree doubling and parity matching), their free-ends variants,
//! and general path construction over required vertex/edge structures.
//!
//! Required edges always form disjoint simple paths here (validated), so a
//! structure decomposes into *segments*: maximal required paths plus isolated
//! required vertices. Constructions work at the segment level (contract,
//! order, orient, splice), which keeps every required edge consecutive and
//! every required vertex visited exactly once by construction.

use std::collections::{BTreeMap, BTreeSet};

use crate::graphkit::{
    connected_components, eulerian_walk, min_weight_perfect_matching, minimum_spanning_tree,
    GraphError, MatchingError, Multigraph, Walk,
};
use crate::metric::{Cost, CostMatrix, Metric};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PathError {
    #[error("start and end coincide")]
    SameEndpoints,
    #[error("no required content to route")]
    EmptyStructure,
    #[error("vertex {0} has required degree > 2")]
    DegreeTooHigh(usize),
    #[error("required edges form a cycle through vertex {0}")]
    RequiredCycle(usize),
    #[error("endpoint {0} is interior to a required path")]
    EndpointInterior(usize),
    #[error("endpoints close off a required path while other content remains")]
    EndpointsSealSegment,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Matching(#[from] MatchingError),
}

/// The two fixed-ends path solutions; `chosen` picks the cheaper.
#[derive(Debug, Clone)]
pub struct PathPair {
    pub s1: Walk,
    pub s2: Walk,
}

impl PathPair {
    pub fn chosen(&self) -> &Walk {
        if self.s2.cost < self.s1.cost {
            &self.s2
        } else {
            &self.s1
        }
    }
}

/// Metric TSP tour: spanning tree, exact matching on odd-degree vertices,
/// Eulerian circuit, shortcut. Cost at most 1.5x the optimal tour.
pub fn christofides<M: Metric>(vertices: &[usize], metric: &M) -> Result<Walk, PathError> {
    if vertices.is_empty() {
        return Err(PathError::EmptyStructure);
    }
    let mut verts = vertices.to_vec();
    verts.sort_unstable();
    verts.dedup();
    if verts.len() == 1 {
        return Ok(Walk {
            seq: verts,
            closed: true,
            cost: 0,
        });
    }
    let (tree, _) = minimum_spanning_tree(&verts, metric)?;
    let odd = odd_degree_vertices(&verts, &tree);
    let matching = min_weight_perfect_matching(&odd, metric)?;
    let mut g = Multigraph::new(verts.iter().copied());
    for &(u, v) in tree.iter().chain(matching.iter()) {
        g.add_edge(u, v);
    }
    let start = verts[0];
    let euler = eulerian_walk(&g, start, start)?;
    let seq = dedup_keep_first(&euler, None);
    Ok(Walk::closed(seq, metric))
}

/// The two classical fixed-ends Hamiltonian path constructions between
/// `s != t`: doubling the spanning tree except along its s-t path, and
/// spanning tree plus a parity-fixing matching. The cheaper one is within
/// 5/3 of the optimal s-t path.
pub fn hoogeveen_fixed_ends<M: Metric>(
    vertices: &[usize],
    metric: &M,
    s: usize,
    t: usize,
) -> Result<PathPair, PathError> {
    if s == t {
        return Err(PathError::SameEndpoints);
    }
    let mut verts = vertices.to_vec();
    verts.push(s);
    verts.push(t);
    verts.sort_unstable();
    verts.dedup();
    let (tree, _) = minimum_spanning_tree(&verts, metric)?;

    // S1: copy every tree edge except those on the s-t tree path.
    let on_path = tree_path_edges(&tree, s, t);
    let mut g1 = Multigraph::new(verts.iter().copied());
    for &(u, v) in &tree {
        g1.add_edge(u, v);
        if !on_path.contains(&norm(u, v)) {
            g1.add_edge(u, v);
        }
    }
    let euler1 = eulerian_walk(&g1, s, t)?;
    let s1 = Walk::open(dedup_keep_first(&euler1, Some(t)), metric);

    // S2: tree plus minimum matching on the wrong-parity vertices.
    let wrong = wrong_parity(&verts, &tree, &[s, t]);
    let matching = min_weight_perfect_matching(&wrong, metric)?;
    let mut g2 = Multigraph::new(verts.iter().copied());
    for &(u, v) in tree.iter().chain(matching.iter()) {
        g2.add_edge(u, v);
    }
    let euler2 = eulerian_walk(&g2, s, t)?;
    let s2 = Walk::open(dedup_keep_first(&euler2, Some(t)), metric);

    Ok(PathPair { s1, s2 })
}

/// Hamiltonian path with zero or one fixed endpoint, within 3/2 of the
/// optimal path of the corresponding variant. Tries every choice of the
/// free end(s), each with an exact parity matching, and keeps the cheapest.
pub fn hoogeveen_free_ends<M: Metric>(
    vertices: &[usize],
    metric: &M,
    fixed_end: Option<usize>,
) -> Result<Walk, PathError> {
    let mut verts = vertices.to_vec();
    if let Some(s) = fixed_end {
        verts.push(s);
    }
    verts.sort_unstable();
    verts.dedup();
    if verts.is_empty() {
        return Err(PathError::EmptyStructure);
    }
    if verts.len() == 1 {
        return Ok(Walk {
            seq: verts,
            closed: false,
            cost: 0,
        });
    }
    let (tree, _) = minimum_spanning_tree(&verts, metric)?;
    let mut best: Option<Walk> = None;
    let mut consider = |s: usize, t: usize| -> Result<(), PathError> {
        let wrong = wrong_parity(&verts, &tree, &[s, t]);
        let matching = min_weight_perfect_matching(&wrong, metric)?;
        let mut g = Multigraph::new(verts.iter().copied());
        for &(u, v) in tree.iter().chain(matching.iter()) {
            g.add_edge(u, v);
        }
        let euler = eulerian_walk(&g, s, t)?;
        let w = Walk::open(dedup_keep_first(&euler, Some(t)), metric);
        if best.as_ref().map(|b| w.cost < b.cost).unwrap_or(true) {
            best = Some(w);
        }
        Ok(())
    };
    match fixed_end {
        Some(s) => {
            for &t in &verts.clone() {
                if t != s {
                    consider(s, t)?;
                }
            }
        }
        None => {
            let vs = verts.clone();
            for i in 0..vs.len() {
                for j in i + 1..vs.len() {
                    consider(vs[i], vs[j])?;
                }
            }
        }
    }
    Ok(best.expect("at least one endpoint pair"))
}

/// A maximal required path (or an isolated required vertex): the unit the
/// splice constructions order and orient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    /// The two traversal ends; equal for a single-vertex segment.
    pub ends: (usize, usize),
    /// Vertex run from `ends.0` to `ends.1`.
    pub path: Vec<usize>,
    pub cost: Cost,
}

impl Segment {
    pub fn singleton(v: usize) -> Self {
        Segment {
            ends: (v, v),
            path: vec![v],
            cost: 0,
        }
    }

    pub fn contains_as_end(&self, v: usize) -> bool {
        self.ends.0 == v || self.ends.1 == v
    }

    /// Path oriented to start at `entry` (must be an end).
    pub fn oriented(&self, entry: usize) -> Vec<usize> {
        if entry == self.ends.0 {
            self.path.clone()
        } else {
            debug_assert_eq!(entry, self.ends.1);
            let mut p = self.path.clone();
            p.reverse();
            p
        }
    }

    pub fn other_end(&self, entry: usize) -> usize {
        if entry == self.ends.0 {
            self.ends.1
        } else {
            self.ends.0
        }
    }
}

/// Decompose a required structure into segments. Fails when some vertex has
/// required degree above two or the edges contain a cycle.
pub fn build_segments<M: Metric>(
    vertices: &BTreeSet<usize>,
    edges: &[(usize, usize)],
    metric: &M,
) -> Result<Vec<Segment>, PathError> {
    let mut deg: BTreeMap<usize, usize> = vertices.iter().map(|&v| (v, 0)).collect();
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(u, v) in edges {
        for x in [u, v] {
            let d = deg.entry(x).or_insert(0);
            *d += 1;
            if *d > 2 {
                return Err(PathError::DegreeTooHigh(x));
            }
        }
        adj.entry(u).or_default().push(v);
        adj.entry(v).or_default().push(u);
    }
    let verts: Vec<usize> = vertices.iter().copied().collect();
    let comps = connected_components(&verts, edges);
    let mut segments = Vec::with_capacity(comps.len());
    for comp in comps {
        if comp.len() == 1 && deg.get(&comp[0]).copied().unwrap_or(0) == 0 {
            segments.push(Segment::singleton(comp[0]));
            continue;
        }
        let comp_set: BTreeSet<usize> = comp.iter().copied().collect();
        let comp_edge_count = edges
            .iter()
            .filter(|&&(u, _)| comp_set.contains(&u))
            .count();
        if comp_edge_count != comp.len() - 1 {
            return Err(PathError::RequiredCycle(comp[0]));
        }
        let mut ends: Vec<usize> = comp.iter().copied().filter(|v| deg[v] == 1).collect();
        if ends.len() != 2 {
            return Err(PathError::RequiredCycle(comp[0]));
        }
        ends.sort_unstable();
        let mut path = vec![ends[0]];
        let mut prev = usize::MAX;
        let mut cur = ends[0];
        while cur != ends[1] {
            let next = adj[&cur]
                .iter()
                .copied()
                .find(|&w| w != prev)
                .expect("path component");
            prev = cur;
            cur = next;
            path.push(cur);
        }
        let cost = metric.path_cost(&path);
        segments.push(Segment {
            ends: (ends[0], ends[1]),
            path,
            cost,
        });
    }
    Ok(segments)
}

/// Contraction of a required structure: one super-vertex per connected
/// component, link costs between components restricted to vertices of
/// required degree at most one, with the realizing vertex pair recorded.
#[derive(Debug, Clone)]
pub struct ContractedGraph {
    pub components: Vec<Vec<usize>>,
    pub link_cost: CostMatrix,
    /// Super edge (i, j) with i < j mapped to the concrete pair (u, v),
    /// u in component i and v in component j.
    pub attachment: BTreeMap<(usize, usize), (usize, usize)>,
}

pub fn contract_components<M: Metric>(
    vertices: &BTreeSet<usize>,
    edges: &[(usize, usize)],
    metric: &M,
) -> ContractedGraph {
    let verts: Vec<usize> = vertices.iter().copied().collect();
    let components = connected_components(&verts, edges);
    let degree = |v: usize| edges.iter().filter(|&&(a, b)| a == v || b == v).count();
    let attach_sets: Vec<Vec<usize>> = components
        .iter()
        .map(|comp| {
            let u: Vec<usize> = comp.iter().copied().filter(|&v| degree(v) <= 1).collect();
            if u.is_empty() {
                comp.clone()
            } else {
                u
            }
        })
        .collect();
    let m = components.len();
    let mut link_cost = CostMatrix::zeros(m);
    let mut attachment = BTreeMap::new();
    for i in 0..m {
        for j in i + 1..m {
            let mut best: Option<(Cost, (usize, usize))> = None;
            for &u in &attach_sets[i] {
                for &v in &attach_sets[j] {
                    let d = metric.dist(u, v);
                    if best.map(|b| (d, (u, v)) < b).unwrap_or(true) {
                        best = Some((d, (u, v)));
                    }
                }
            }
            let (d, pair) = best.expect("nonempty attachment sets");
            link_cost.set(i, j, d);
            attachment.insert((i, j), pair);
        }
    }
    ContractedGraph {
        components,
        link_cost,
        attachment,
    }
}

/// General path construction: open walk from `s` to `t` visiting every
/// required vertex exactly once and traversing every required edge. Builds
/// several segment orders (tree doubling, parity matching, nearest neighbor)
/// and returns the cheapest assembly; the result stays within
/// min(3 OPT - d(s,t), 1.5 OPT + d(s,t)/2) of the optimal such path.
pub fn tgpp_path<M: Metric>(
    required_vertices: &BTreeSet<usize>,
    required_edges: &[(usize, usize)],
    metric: &M,
    s: usize,
    t: usize,
) -> Result<Walk, PathError> {
    if s == t {
        return Err(PathError::SameEndpoints);
    }
    let mut verts = required_vertices.clone();
    verts.insert(s);
    verts.insert(t);
    for &(u, v) in required_edges {
        verts.insert(u);
        verts.insert(v);
    }
    let segments = build_segments(&verts, required_edges, metric)?;
    let s_seg = seg_of_end(&segments, s)?;
    let t_seg = seg_of_end(&segments, t)?;
    if s_seg == t_seg {
        if segments.len() > 1 {
            return Err(PathError::EndpointsSealSegment);
        }
        let seg = &segments[0];
        return Ok(Walk::open(seg.oriented(s), metric));
    }

    let m = segments.len();
    let sm = segment_metric(&segments, metric);
    let nodes: Vec<usize> = (0..m).collect();
    let (tree, _) = minimum_spanning_tree(&nodes, &sm)?;

    let mut orders: Vec<Vec<usize>> = Vec::new();

    // Tree doubling minus the s-t path at the segment level.
    let on_path = tree_path_edges(&tree, s_seg, t_seg);
    let mut g1 = Multigraph::new(0..m);
    for &(u, v) in &tree {
        g1.add_edge(u, v);
        if !on_path.contains(&norm(u, v)) {
            g1.add_edge(u, v);
        }
    }
    orders.push(dedup_keep_first(
        &eulerian_walk(&g1, s_seg, t_seg)?,
        Some(t_seg),
    ));

    // Tree plus parity matching at the segment level.
    let wrong = wrong_parity(&nodes, &tree, &[s_seg, t_seg]);
    let matching = min_weight_perfect_matching(&wrong, &sm)?;
    let mut g2 = Multigraph::new(0..m);
    for &(u, v) in tree.iter().chain(matching.iter()) {
        g2.add_edge(u, v);
    }
    orders.push(dedup_keep_first(
        &eulerian_walk(&g2, s_seg, t_seg)?,
        Some(t_seg),
    ));

    orders.push(nearest_neighbor_order(&sm, m, s_seg, Some(t_seg)));

    let mut best: Option<Walk> = None;
    for order in &orders {
        let w = assemble_open(&segments, order, Some(s), Some(t), metric);
        if best.as_ref().map(|b| w.cost < b.cost).unwrap_or(true) {
            best = Some(w);
        }
    }
    Ok(best.expect("at least one order"))
}

/// Free-ends counterpart of [`tgpp_path`]: open walk over the required
/// structure with both endpoints chosen by the construction.
pub fn tgpp_free_path<M: Metric>(
    required_vertices: &BTreeSet<usize>,
    required_edges: &[(usize, usize)],
    metric: &M,
) -> Result<Walk, PathError> {
    let mut verts = required_vertices.clone();
    for &(u, v) in required_edges {
        verts.insert(u);
        verts.insert(v);
    }
    if verts.is_empty() {
        return Err(PathError::EmptyStructure);
    }
    let segments = build_segments(&verts, required_edges, metric)?;
    let m = segments.len();
    if m == 1 {
        return Ok(Walk::open(segments[0].path.clone(), metric));
    }
    let sm = segment_metric(&segments, metric);
    let mut best: Option<Walk> = None;
    for order in cyclic_orders(&segments, &sm)? {
        // Every rotation of a cyclic order is a candidate open chain.
        for r in 0..order.len() {
            let mut rot = order.clone();
            rot.rotate_left(r);
            let w = assemble_open(&segments, &rot, None, None, metric);
            if best.as_ref().map(|b| w.cost < b.cost).unwrap_or(true) {
                best = Some(w);
            }
        }
    }
    for start in 0..m {
        let order = nearest_neighbor_order(&sm, m, start, None);
        let w = assemble_open(&segments, &order, None, None, metric);
        if best.as_ref().map(|b| w.cost < b.cost).unwrap_or(true) {
            best = Some(w);
        }
    }
    Ok(best.expect("orders are nonempty"))
}

/// Closed walk from `home` through the whole required structure: `home`'s
/// segment is traversed first and the walk returns to `home` at the end.
/// Used for clusters whose start and end vertex coincide.
pub fn grp_closed_walk<M: Metric>(
    required_vertices: &BTreeSet<usize>,
    required_edges: &[(usize, usize)],
    metric: &M,
    home: usize,
) -> Result<Walk, PathError> {
    let mut verts = required_vertices.clone();
    verts.insert(home);
    for &(u, v) in required_edges {
        verts.insert(u);
        verts.insert(v);
    }
    let segments = build_segments(&verts, required_edges, metric)?;
    let home_seg = seg_of_end(&segments, home)?;
    let m = segments.len();
    if m == 1 {
        let seq = segments[0].oriented(home);
        return Ok(Walk::closed(seq, metric));
    }
    let sm = segment_metric(&segments, metric);
    let mut best: Option<Walk> = None;
    for order in cyclic_orders(&segments, &sm)? {
        let mut rot = order.clone();
        let pos = rot.iter().position(|&x| x == home_seg).unwrap();
        rot.rotate_left(pos);
        for dir in 0..2 {
            let mut o = rot.clone();
            if dir == 1 {
                o[1..].reverse();
            }
            let w = assemble_cyclic(&segments, &o, Some(home), metric);
            if best.as_ref().map(|b| w.cost < b.cost).unwrap_or(true) {
                best = Some(w);
            }
        }
    }
    Ok(best.expect("orders are nonempty"))
}

// ---------------------------------------------------------------------------
// Order generation and assembly.

/// Candidate cyclic segment orders: a Christofides tour over the segment
/// metric plus a nearest-neighbor sweep.
fn cyclic_orders<M: Metric>(segments: &[Segment], sm: &M) -> Result<Vec<Vec<usize>>, PathError> {
    let m = segments.len();
    let nodes: Vec<usize> = (0..m).collect();
    let mut orders = vec![christofides(&nodes, sm)?.seq];
    orders.push(nearest_neighbor_order(sm, m, 0, None));
    Ok(orders)
}

fn nearest_neighbor_order<M: Metric>(
    sm: &M,
    m: usize,
    start: usize,
    force_last: Option<usize>,
) -> Vec<usize> {
    let mut order = vec![start];
    let mut left: BTreeSet<usize> = (0..m).filter(|&x| x != start).collect();
    if let Some(t) = force_last {
        left.remove(&t);
    }
    while !left.is_empty() {
        let cur = *order.last().unwrap();
        let next = left
            .iter()
            .copied()
            .min_by_key(|&x| (sm.dist(cur, x), x))
            .unwrap();
        left.remove(&next);
        order.push(next);
    }
    if let Some(t) = force_last {
        if t != start {
            order.push(t);
        }
    }
    order
}

#[derive(Clone, Copy)]
struct OrientState {
    exit: usize,
    cost: Cost,
    parent: usize,
    entry: usize,
}

/// Concatenate segments in `order`, choosing traversal directions by dynamic
/// programming over the at-most-two orientations of each segment. `pin_start`
/// forces the first segment to begin there; `pin_end` forces the last segment
/// to finish there.
pub fn assemble_open<M: Metric>(
    segments: &[Segment],
    order: &[usize],
    pin_start: Option<usize>,
    pin_end: Option<usize>,
    metric: &M,
) -> Walk {
    let layers = orientation_dp(segments, order, pin_start, pin_end, metric, None);
    let seq = reconstruct(segments, order, &layers);
    Walk::open(seq, metric)
}

/// Cyclic variant: adds the connector from the last exit back to the first
/// entry. `home` pins the first segment's entry vertex; without it both
/// entries of the first segment are tried.
pub fn assemble_cyclic<M: Metric>(
    segments: &[Segment],
    order: &[usize],
    home: Option<usize>,
    metric: &M,
) -> Walk {
    let first = &segments[order[0]];
    let entries: Vec<usize> = match home {
        Some(h) => vec![h],
        None => {
            if first.ends.0 == first.ends.1 {
                vec![first.ends.0]
            } else {
                vec![
                    first.ends.0.min(first.ends.1),
                    first.ends.0.max(first.ends.1),
                ]
            }
        }
    };
    let mut best: Option<Walk> = None;
    for entry in entries {
        let layers = orientation_dp(segments, order, Some(entry), None, metric, Some(entry));
        let seq = reconstruct(segments, order, &layers);
        let w = Walk::closed(seq, metric);
        if best.as_ref().map(|b| w.cost < b.cost).unwrap_or(true) {
            best = Some(w);
        }
    }
    best.expect("at least one entry")
}

fn orientation_dp<M: Metric>(
    segments: &[Segment],
    order: &[usize],
    pin_start: Option<usize>,
    pin_end: Option<usize>,
    metric: &M,
    close_to: Option<usize>,
) -> Vec<Vec<OrientState>> {
    let mut layers: Vec<Vec<OrientState>> = Vec::with_capacity(order.len());
    for (pos, &si) in order.iter().enumerate() {
        let seg = &segments[si];
        let mut entries: Vec<usize> = if seg.ends.0 == seg.ends.1 {
            vec![seg.ends.0]
        } else {
            vec![seg.ends.0.min(seg.ends.1), seg.ends.0.max(seg.ends.1)]
        };
        if pos == 0 {
            if let Some(s) = pin_start {
                entries.retain(|&e| e == s);
            }
        }
        if pos + 1 == order.len() {
            if let Some(t) = pin_end {
                entries.retain(|&e| seg.other_end(e) == t);
            }
        }
        debug_assert!(!entries.is_empty(), "pinned endpoint must be a segment end");
        let mut layer = Vec::with_capacity(entries.len());
        for entry in entries {
            let exit = seg.other_end(entry);
            if pos == 0 {
                layer.push(OrientState {
                    exit,
                    cost: 0,
                    parent: 0,
                    entry,
                });
            } else {
                let prev = &layers[pos - 1];
                let (pi, pcost) = prev
                    .iter()
                    .enumerate()
                    .map(|(i, st)| (i, st.cost + metric.dist(st.exit, entry)))
                    .min_by_key(|&(i, c)| (c, i))
                    .unwrap();
                layer.push(OrientState {
                    exit,
                    cost: pcost,
                    parent: pi,
                    entry,
                });
            }
        }
        layers.push(layer);
    }
    if let Some(home) = close_to {
        for st in layers.last_mut().unwrap() {
            st.cost += metric.dist(st.exit, home);
        }
    }
    layers
}

fn reconstruct(segments: &[Segment], order: &[usize], layers: &[Vec<OrientState>]) -> Vec<usize> {
    let last = layers.last().unwrap();
    let mut idx = last
        .iter()
        .enumerate()
        .min_by_key(|&(i, st)| (st.cost, i))
        .map(|(i, _)| i)
        .unwrap();
    let mut entries = vec![0usize; order.len()];
    for pos in (0..order.len()).rev() {
        let st = &layers[pos][idx];
        entries[pos] = st.entry;
        idx = st.parent;
    }
    let mut seq = Vec::new();
    for (pos, &si) in order.iter().enumerate() {
        seq.extend(segments[si].oriented(entries[pos]));
    }
    seq
}

pub(crate) fn segment_metric<M: Metric>(segments: &[Segment], metric: &M) -> CostMatrix {
    CostMatrix::from_fn(segments.len(), |i, j| {
        if i == j {
            return 0;
        }
        let (a, b) = segments[i].ends;
        let (c, d) = segments[j].ends;
        [
            metric.dist(a, c),
            metric.dist(a, d),
            metric.dist(b, c),
            metric.dist(b, d),
        ]
        .into_iter()
        .min()
        .unwrap()
    })
}

fn seg_of_end(segments: &[Segment], v: usize) -> Result<usize, PathError> {
    for (i, seg) in segments.iter().enumerate() {
        if seg.contains_as_end(v) {
            return Ok(i);
        }
        if seg.path.contains(&v) {
            return Err(PathError::EndpointInterior(v));
        }
    }
    Err(PathError::EmptyStructure)
}

fn norm(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

fn odd_degree_vertices(vertices: &[usize], edges: &[(usize, usize)]) -> Vec<usize> {
    let mut deg: BTreeMap<usize, usize> = vertices.iter().map(|&v| (v, 0)).collect();
    for &(u, v) in edges {
        *deg.get_mut(&u).unwrap() += 1;
        *deg.get_mut(&v).unwrap() += 1;
    }
    deg.into_iter()
        .filter(|&(_, d)| d % 2 == 1)
        .map(|(v, _)| v)
        .collect()
}

/// Vertices whose tree parity differs from the desired parity (odd exactly
/// at `want_odd`).
fn wrong_parity(vertices: &[usize], tree: &[(usize, usize)], want_odd: &[usize]) -> Vec<usize> {
    let odd: BTreeSet<usize> = odd_degree_vertices(vertices, tree).into_iter().collect();
    let want: BTreeSet<usize> = want_odd.iter().copied().collect();
    vertices
        .iter()
        .copied()
        .filter(|v| odd.contains(v) != want.contains(v))
        .collect()
}

/// Edges on the unique tree path between `s` and `t`, as normalized pairs.
fn tree_path_edges(tree: &[(usize, usize)], s: usize, t: usize) -> BTreeSet<(usize, usize)> {
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(u, v) in tree {
        adj.entry(u).or_default().push(v);
        adj.entry(v).or_default().push(u);
    }
    let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
    let mut stack = vec![s];
    let mut seen: BTreeSet<usize> = [s].into_iter().collect();
    while let Some(v) = stack.pop() {
        if v == t {
            break;
        }
        for &w in adj.get(&v).into_iter().flatten() {
            if seen.insert(w) {
                parent.insert(w, v);
                stack.push(w);
            }
        }
    }
    let mut out = BTreeSet::new();
    let mut cur = t;
    while cur != s {
        let p = parent[&cur];
        out.insert(norm(p, cur));
        cur = p;
    }
    out
}

/// First occurrences in order; `force_last` is withheld and appended at the
/// end so fixed-destination walks keep their endpoint.
fn dedup_keep_first(walk: &[usize], force_last: Option<usize>) -> Vec<usize> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &v in walk {
        if Some(v) == force_last {
            continue;
        }
        if seen.insert(v) {
            out.push(v);
        }
    }
    if let Some(t) = force_last {
        out.push(t);
    }
    out
}
