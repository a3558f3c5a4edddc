//! Reusable graph primitives: spanning trees, exact matching, connected
//! components, Eulerian walks and the metric shortcut step. Everything here
//! is pure and deterministic (ties broken by vertex order).

mod matching;

pub use matching::{max_weight_matching, min_weight_perfect_matching, MatchingError};

use std::collections::{BTreeMap, BTreeSet};

use crate::metric::{Cost, Metric};

/// An ordered vertex sequence. For a closed walk the edge from the last
/// vertex back to the first is part of the walk (the sequence does not
/// repeat the start).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk {
    pub seq: Vec<usize>,
    pub closed: bool,
    pub cost: Cost,
}

impl Walk {
    pub fn open<M: Metric>(seq: Vec<usize>, metric: &M) -> Self {
        let cost = metric.path_cost(&seq);
        Walk {
            seq,
            closed: false,
            cost,
        }
    }

    pub fn closed<M: Metric>(seq: Vec<usize>, metric: &M) -> Self {
        let mut cost = metric.path_cost(&seq);
        if seq.len() > 1 {
            cost += metric.dist(seq[seq.len() - 1], seq[0]);
        }
        Walk {
            seq,
            closed: true,
            cost,
        }
    }

    pub fn empty_closed() -> Self {
        Walk {
            seq: Vec::new(),
            closed: true,
            cost: 0,
        }
    }

    /// Consecutive vertex pairs, including the wrap-around pair when closed.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self.seq.windows(2).map(|w| (w[0], w[1])).collect();
        if self.closed && self.seq.len() > 1 {
            out.push((self.seq[self.seq.len() - 1], self.seq[0]));
        }
        out
    }

    /// True if `(u, v)` appears as a consecutive pair in either direction.
    pub fn traverses(&self, u: usize, v: usize) -> bool {
        self.edges()
            .iter()
            .any(|&(a, b)| (a, b) == (u, v) || (a, b) == (v, u))
    }

    pub fn recompute_cost<M: Metric>(&self, metric: &M) -> Cost {
        let mut c = metric.path_cost(&self.seq);
        if self.closed && self.seq.len() > 1 {
            c += metric.dist(self.seq[self.seq.len() - 1], self.seq[0]);
        }
        c
    }
}

/// Undirected multigraph: parallel edges allowed, vertices are arbitrary ids.
#[derive(Debug, Clone, Default)]
pub struct Multigraph {
    pub vertices: BTreeSet<usize>,
    pub edges: Vec<(usize, usize)>,
}

impl Multigraph {
    pub fn new(vertices: impl IntoIterator<Item = usize>) -> Self {
        Multigraph {
            vertices: vertices.into_iter().collect(),
            edges: Vec::new(),
        }
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        debug_assert!(self.vertices.contains(&u) && self.vertices.contains(&v));
        self.edges.push((u, v));
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|&(a, b)| (a == v) as usize + (b == v) as usize)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("empty vertex set")]
    EmptyVertexSet,
    #[error("odd vertex count {0} for perfect matching")]
    OddVertexCount(usize),
    #[error("degree parity violated at vertex {0}")]
    ParityViolation(usize),
    #[error("edge set is disconnected")]
    Disconnected,
}

/// Minimum spanning tree over `vertices` under `metric`.
///
/// Kruskal with edges sorted by (cost, u, v); the lexicographic order makes
/// tie-breaking deterministic. Returns the tree edges and their total cost.
pub fn minimum_spanning_tree<M: Metric>(
    vertices: &[usize],
    metric: &M,
) -> Result<(Vec<(usize, usize)>, Cost), GraphError> {
    if vertices.is_empty() {
        return Err(GraphError::EmptyVertexSet);
    }
    let mut edges: Vec<(Cost, usize, usize)> = Vec::new();
    for (i, &u) in vertices.iter().enumerate() {
        for &v in &vertices[i + 1..] {
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            edges.push((metric.dist(a, b), a, b));
        }
    }
    edges.sort_unstable();

    let mut dsu = Dsu::over(vertices);
    let mut tree = Vec::with_capacity(vertices.len().saturating_sub(1));
    let mut total = 0;
    for (c, u, v) in edges {
        if dsu.union(u, v) {
            tree.push((u, v));
            total += c;
            if tree.len() + 1 == vertices.len() {
                break;
            }
        }
    }
    Ok((tree, total))
}

/// Connected components of `(vertices, edges)`; isolated vertices become
/// singleton components. Components are sorted by their smallest vertex and
/// each component lists its vertices in ascending order.
pub fn connected_components(vertices: &[usize], edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut dsu = Dsu::over(vertices);
    for &(u, v) in edges {
        dsu.union(u, v);
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut sorted: Vec<usize> = vertices.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for v in sorted {
        groups.entry(dsu.find(v)).or_default().push(v);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort_by_key(|c| c[0]);
    out
}

/// Eulerian walk from `s` to `t` using every multigraph edge exactly once.
///
/// Requires the usual parity: every vertex even except `s` and `t` (or all
/// even with `s == t`), and the edges connected over non-isolated vertices.
/// Hierholzer's splicing traversal.
pub fn eulerian_walk(g: &Multigraph, s: usize, t: usize) -> Result<Vec<usize>, GraphError> {
    for &v in &g.vertices {
        let d = g.degree(v);
        let want_odd = (v == s) != (v == t);
        if d % 2 != want_odd as usize {
            return Err(GraphError::ParityViolation(v));
        }
    }
    if g.edges.is_empty() {
        return Ok(vec![s]);
    }
    // Connectivity over non-isolated vertices (s must reach every edge).
    let touched: Vec<usize> = g
        .vertices
        .iter()
        .copied()
        .filter(|&v| g.degree(v) > 0 || v == s)
        .collect();
    let comps = connected_components(&touched, &g.edges);
    if comps.len() != 1 {
        return Err(GraphError::Disconnected);
    }

    // Adjacency with edge ids so parallel edges are consumed independently.
    let mut adj: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (id, &(u, v)) in g.edges.iter().enumerate() {
        adj.entry(u).or_default().push((v, id));
        adj.entry(v).or_default().push((u, id));
    }
    for nb in adj.values_mut() {
        // Reverse-sorted so popping from the back takes the smallest neighbor.
        nb.sort_unstable_by(|a, b| b.cmp(a));
    }
    let mut used = vec![false; g.edges.len()];
    let mut stack = vec![s];
    let mut walk = Vec::with_capacity(g.edges.len() + 1);
    while let Some(&v) = stack.last() {
        let next = loop {
            match adj.get_mut(&v).and_then(|nb| nb.pop()) {
                Some((w, id)) => {
                    if !used[id] {
                        used[id] = true;
                        break Some(w);
                    }
                }
                None => break None,
            }
        };
        match next {
            Some(w) => stack.push(w),
            None => {
                walk.push(v);
                stack.pop();
            }
        }
    }
    walk.reverse();
    if walk.len() != g.edges.len() + 1 {
        return Err(GraphError::Disconnected);
    }
    debug_assert_eq!(walk[0], s);
    debug_assert_eq!(*walk.last().unwrap(), t);
    Ok(walk)
}

/// Metric shortcut: drop repeated visits so that every vertex of `keep_once`
/// appears exactly once. Vertices outside `keep_once` are kept as-is. Walk
/// steps listed in `protected` (unordered pairs) are never skipped across:
/// a protected step forces its target vertex to be emitted.
///
/// Under the triangle inequality the result never costs more than the input.
pub fn shortcut<M: Metric>(
    walk: &Walk,
    keep_once: &BTreeSet<usize>,
    protected: &BTreeSet<(usize, usize)>,
    metric: &M,
) -> Walk {
    if walk.seq.len() <= 1 {
        return walk.clone();
    }
    let seq = &walk.seq;
    let nsteps = seq.len() - 1;
    let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };

    // Pass 1: pin the first occurrence of each protected pair as a step.
    let mut pending: BTreeSet<(usize, usize)> = protected.iter().map(|&(a, b)| key(a, b)).collect();
    let mut pinned_step = vec![false; nsteps];
    for i in 0..nsteps {
        let k = key(seq[i], seq[i + 1]);
        if pending.remove(&k) {
            pinned_step[i] = true;
        }
    }

    // Pass 2: per keep-once vertex, keep the occurrence touching a pinned
    // step when one exists (first occurrences otherwise).
    let mut positions: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &v) in seq.iter().enumerate() {
        positions.entry(v).or_default().push(i);
    }
    let touches_pin =
        |i: usize| -> bool { (i < nsteps && pinned_step[i]) || (i > 0 && pinned_step[i - 1]) };
    let mut keep_pos: Vec<bool> = vec![true; seq.len()];
    for (&v, occs) in &positions {
        if !keep_once.contains(&v) || occs.len() == 1 {
            continue;
        }
        let chosen = occs
            .iter()
            .copied()
            .find(|&i| touches_pin(i))
            .unwrap_or(occs[0]);
        for &i in occs {
            keep_pos[i] = i == chosen;
        }
    }

    let mut out: Vec<usize> = Vec::with_capacity(seq.len());
    for (i, &v) in seq.iter().enumerate() {
        if keep_pos[i] {
            out.push(v);
        }
    }
    if walk.closed && out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    let w = if walk.closed {
        Walk::closed(out, metric)
    } else {
        Walk::open(out, metric)
    };
    debug_assert!(w.cost <= walk.cost);
    w
}

/// Union-find over arbitrary vertex ids.
struct Dsu {
    parent: BTreeMap<usize, usize>,
}

impl Dsu {
    fn over(vertices: &[usize]) -> Self {
        Dsu {
            parent: vertices.iter().map(|&v| (v, v)).collect(),
        }
    }

    fn find(&mut self, v: usize) -> usize {
        let p = self.parent[&v];
        if p == v {
            return v;
        }
        let root = self.find(p);
        self.parent.insert(v, root);
        root
    }

    /// Returns true when the union merged two distinct sets.
    fn union(&mut self, u: usize, v: usize) -> bool {
        let (ru, rv) = (self.find(u), self.find(v));
        if ru == rv {
            return false;
        }
        let (lo, hi) = if ru < rv { (ru, rv) } else { (rv, ru) };
        self.parent.insert(hi, lo);
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::CostMatrix;

    fn unit_metric(n: usize) -> CostMatrix {
        CostMatrix::from_fn(n, |u, v| if u == v { 0 } else { 1 })
    }

    #[test]
    fn mst_single_vertex_is_empty() {
        let m = unit_metric(1);
        let (edges, cost) = minimum_spanning_tree(&[0], &m).unwrap();
        assert!(edges.is_empty());
        assert_eq!(cost, 0);
    }

    #[test]
    fn mst_unit_triangle_costs_two() {
        let m = unit_metric(3);
        let (edges, cost) = minimum_spanning_tree(&[0, 1, 2], &m).unwrap();
        assert_eq!(edges.len(), 2);
        assert_eq!(cost, 2);
        // deterministic lexicographic tie-break
        assert_eq!(edges, vec![(0, 1), (0, 2)]);
    }

    #[test]
    fn mst_rejects_empty() {
        let m = unit_metric(1);
        assert_eq!(
            minimum_spanning_tree(&[], &m),
            Err(GraphError::EmptyVertexSet)
        );
    }

    #[test]
    fn components_no_edges_are_singletons() {
        let comps = connected_components(&[0, 1, 2], &[]);
        assert_eq!(comps, vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn components_chain_plus_isolated() {
        let comps = connected_components(&[0, 1, 2, 3], &[(0, 1), (1, 2)]);
        assert_eq!(comps, vec![vec![0, 1, 2], vec![3]]);
    }

    #[test]
    fn euler_circuit_on_triangle() {
        let mut g = Multigraph::new(0..3);
        g.add_edge(0, 1);
        g.add_edge(1, 2);
        g.add_edge(2, 0);
        let walk = eulerian_walk(&g, 0, 0).unwrap();
        assert_eq!(walk.len(), 4);
        assert_eq!(walk[0], 0);
        assert_eq!(walk[3], 0);
    }

    #[test]
    fn euler_open_path() {
        let mut g = Multigraph::new(0..3);
        g.add_edge(0, 1);
        g.add_edge(1, 2);
        assert_eq!(eulerian_walk(&g, 0, 2).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn euler_rejects_bad_parity() {
        let mut g = Multigraph::new(0..3);
        g.add_edge(0, 1);
        g.add_edge(1, 2);
        assert!(matches!(
            eulerian_walk(&g, 0, 1),
            Err(GraphError::ParityViolation(_))
        ));
    }

    #[test]
    fn euler_rejects_disconnected() {
        let mut g = Multigraph::new(0..4);
        g.add_edge(0, 1);
        g.add_edge(0, 1);
        g.add_edge(2, 3);
        g.add_edge(2, 3);
        assert_eq!(eulerian_walk(&g, 0, 0), Err(GraphError::Disconnected));
    }

    #[test]
    fn euler_uses_every_multiedge_once() {
        // doubled tree on 5 vertices rooted at 0
        let tree = [(0, 1), (0, 2), (1, 3), (1, 4)];
        let mut g = Multigraph::new(0..5);
        for &(u, v) in &tree {
            g.add_edge(u, v);
            g.add_edge(u, v);
        }
        let walk = eulerian_walk(&g, 0, 0).unwrap();
        assert_eq!(walk.len(), 9);
        let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for w in walk.windows(2) {
            let k = if w[0] < w[1] {
                (w[0], w[1])
            } else {
                (w[1], w[0])
            };
            *counts.entry(k).or_insert(0) += 1;
        }
        for &(u, v) in &tree {
            assert_eq!(counts[&(u, v)], 2, "tree edge ({u},{v}) used twice");
        }
    }

    #[test]
    fn shortcut_removes_repeat() {
        let m = unit_metric(3);
        let w = Walk::open(vec![0, 1, 0, 2], &m);
        let keep: BTreeSet<usize> = [0, 1, 2].into_iter().collect();
        let s = shortcut(&w, &keep, &BTreeSet::new(), &m);
        assert_eq!(s.seq, vec![0, 1, 2]);
        assert!(s.cost <= w.cost);
    }

    #[test]
    fn shortcut_identity_without_repeats() {
        let m = unit_metric(4);
        let w = Walk::open(vec![0, 1, 2, 3], &m);
        let keep: BTreeSet<usize> = (0..4).collect();
        assert_eq!(shortcut(&w, &keep, &BTreeSet::new(), &m).seq, w.seq);
    }

    #[test]
    fn shortcut_euler_circuit_of_unit_k4() {
        // doubled MST of unit K4 is a star at 0; euler circuit repeats 0
        let m = unit_metric(4);
        let w = Walk::closed(vec![0, 1, 0, 2, 0, 3], &m);
        let keep: BTreeSet<usize> = (0..4).collect();
        let s = shortcut(&w, &keep, &BTreeSet::new(), &m);
        assert_eq!(s.seq.len(), 4);
        assert!(s.cost <= 6);
        assert!(s.closed);
    }

    #[test]
    fn shortcut_preserves_protected_step() {
        let m = CostMatrix::from_fn(4, |u, v| if u == v { 0 } else { 1 });
        // 1 repeats; the step 1->3 is protected so 1 must survive before 3
        let w = Walk::open(vec![0, 1, 2, 1, 3], &m);
        let keep: BTreeSet<usize> = (0..4).collect();
        let protected: BTreeSet<(usize, usize)> = [(1, 3)].into_iter().collect();
        let s = shortcut(&w, &keep, &protected, &m);
        assert!(s.traverses(1, 3));
    }

    #[test]
    fn walk_edges_include_closing_pair() {
        let m = unit_metric(3);
        let w = Walk::closed(vec![0, 1, 2], &m);
        assert_eq!(w.edges(), vec![(0, 1), (1, 2), (2, 0)]);
        assert_eq!(w.cost, 3);
        assert!(w.traverses(2, 0));
        assert!(w.traverses(0, 2));
    }
}
