//! Instance model for the cluster routing problem: a complete metric graph
//! with a cluster partition, required vertices V', required edges E' and
//! optional per-cluster start/end vertices. Also: metric validation,
//! feasibility classification and the per-cluster required subgraphs.

mod format;
mod generate;

pub use format::{parse_instance, serialize_instance, ParseError};
pub use generate::{generate_random, CrossMode, EndpointsMode, GenError, GenParams};

use std::collections::BTreeSet;
use std::fmt;

use crate::metric::{Cost, Metric};

/// Complete edge-weighted metric graph with cluster structure.
///
/// Immutable after construction; all solver entry points take `&MetricInstance`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricInstance {
    n: usize,
    dist: Vec<Cost>,
    clusters: Vec<Vec<usize>>,
    required_vertices: BTreeSet<usize>,
    required_edges: Vec<(usize, usize)>,
    endpoints: Option<Vec<(usize, usize)>>,
    cluster_of: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InstanceError {
    #[error("distance table has {got} entries, expected {expected}")]
    BadDistShape { expected: usize, got: usize },
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
    #[error("expected {expected} clusters, got {got}")]
    BadClusterCount { expected: usize, got: usize },
    #[error("cluster {0} is empty")]
    EmptyCluster(usize),
    #[error("endpoints given for {got} clusters, expected {expected}")]
    BadEndpointCount { expected: usize, got: usize },
    #[error("required edge ({0}, {1}) is a self-loop")]
    SelfLoop(usize, usize),
}

impl MetricInstance {
    /// Structural construction. Shape errors (wrong table size, ids out of
    /// range) are rejected here; semantic invariants are reported by
    /// [`validate_metric`] instead.
    pub fn new(
        n: usize,
        dist: Vec<Cost>,
        clusters: Vec<Vec<usize>>,
        required_vertices: impl IntoIterator<Item = usize>,
        required_edges: impl IntoIterator<Item = (usize, usize)>,
        endpoints: Option<Vec<(usize, usize)>>,
    ) -> Result<Self, InstanceError> {
        if dist.len() != n * n {
            return Err(InstanceError::BadDistShape {
                expected: n * n,
                got: dist.len(),
            });
        }
        if clusters.is_empty() {
            return Err(InstanceError::BadClusterCount {
                expected: 1,
                got: 0,
            });
        }
        let mut cluster_of = vec![usize::MAX; n];
        let mut sorted_clusters = Vec::with_capacity(clusters.len());
        for (i, c) in clusters.into_iter().enumerate() {
            if c.is_empty() {
                return Err(InstanceError::EmptyCluster(i));
            }
            let mut c = c;
            c.sort_unstable();
            c.dedup();
            for &v in &c {
                if v >= n {
                    return Err(InstanceError::VertexOutOfRange(v));
                }
                // A vertex in two clusters keeps the first assignment here;
                // validate_metric reports the partition violation.
                if cluster_of[v] == usize::MAX {
                    cluster_of[v] = i;
                }
            }
            sorted_clusters.push(c);
        }
        let required_vertices: BTreeSet<usize> = required_vertices.into_iter().collect();
        for &v in &required_vertices {
            if v >= n {
                return Err(InstanceError::VertexOutOfRange(v));
            }
        }
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for (u, v) in required_edges {
            if u >= n || v >= n {
                return Err(InstanceError::VertexOutOfRange(u.max(v)));
            }
            if u == v {
                return Err(InstanceError::SelfLoop(u, v));
            }
            edges.push(if u < v { (u, v) } else { (v, u) });
        }
        edges.sort_unstable();
        edges.dedup();
        if let Some(ends) = &endpoints {
            if ends.len() != sorted_clusters.len() {
                return Err(InstanceError::BadEndpointCount {
                    expected: sorted_clusters.len(),
                    got: ends.len(),
                });
            }
            for &(s, t) in ends {
                if s >= n || t >= n {
                    return Err(InstanceError::VertexOutOfRange(s.max(t)));
                }
            }
        }
        Ok(MetricInstance {
            n,
            dist,
            clusters: sorted_clusters,
            required_vertices,
            required_edges: edges,
            endpoints,
            cluster_of,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.clusters.len()
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn cluster_of(&self, v: usize) -> usize {
        self.cluster_of[v]
    }

    pub fn required_vertices(&self) -> &BTreeSet<usize> {
        &self.required_vertices
    }

    pub fn required_edges(&self) -> &[(usize, usize)] {
        &self.required_edges
    }

    pub fn endpoints(&self) -> Option<&[(usize, usize)]> {
        self.endpoints.as_deref()
    }

    /// Required edges with both endpoints in cluster `i`.
    pub fn intra_edges(&self, i: usize) -> Vec<(usize, usize)> {
        self.required_edges
            .iter()
            .copied()
            .filter(|&(u, v)| self.cluster_of[u] == i && self.cluster_of[v] == i)
            .collect()
    }

    /// Required edges whose endpoints lie in different clusters.
    pub fn cross_edges(&self) -> Vec<(usize, usize)> {
        self.required_edges
            .iter()
            .copied()
            .filter(|&(u, v)| self.cluster_of[u] != self.cluster_of[v])
            .collect()
    }

    /// Degree of `v` in the full required-edge subgraph (intra + cross).
    pub fn required_degree(&self, v: usize) -> usize {
        self.required_edges
            .iter()
            .filter(|&&(a, b)| a == v || b == v)
            .count()
    }
}

impl Metric for MetricInstance {
    fn dist(&self, u: usize, v: usize) -> Cost {
        self.dist[u * self.n + v]
    }
}

/// Required content of one cluster: the vertex set that must be visited and
/// the required edges internal to the cluster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterSubgraph {
    pub cluster_id: usize,
    pub vertices: BTreeSet<usize>,
    pub edges: Vec<(usize, usize)>,
}

/// One subgraph per cluster: the cluster's endpoints of required edges
/// (internal or cross-cluster), its required vertices, plus the specified
/// start/end vertices when given. Edge lists carry internal edges only;
/// cross-cluster edges are handled at the stitching level.
pub fn build_cluster_subgraphs(inst: &MetricInstance) -> Vec<ClusterSubgraph> {
    (0..inst.k())
        .map(|i| {
            let edges = inst.intra_edges(i);
            let mut vertices: BTreeSet<usize> = BTreeSet::new();
            for &(u, v) in &inst.required_edges {
                for x in [u, v] {
                    if inst.cluster_of[x] == i {
                        vertices.insert(x);
                    }
                }
            }
            for &v in &inst.clusters[i] {
                if inst.required_vertices.contains(&v) {
                    vertices.insert(v);
                }
            }
            if let Some(ends) = &inst.endpoints {
                vertices.insert(ends[i].0);
                vertices.insert(ends[i].1);
            }
            ClusterSubgraph {
                cluster_id: i,
                vertices,
                edges,
            }
        })
        .collect()
}

/// A single failed instance invariant; violations are data, not failures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricViolation {
    Asymmetry { u: usize, v: usize },
    NonzeroDiagonal { v: usize },
    NonpositiveOffDiagonal { u: usize, v: usize },
    Triangle { u: usize, v: usize, via: usize },
    NotAPartition { vertex: usize },
    EndpointOutsideCluster { cluster: usize, vertex: usize },
}

impl fmt::Display for MetricViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricViolation::Asymmetry { u, v } => {
                write!(f, "symmetry violation ({u},{v})")
            }
            MetricViolation::NonzeroDiagonal { v } => {
                write!(f, "nonzero diagonal at {v}")
            }
            MetricViolation::NonpositiveOffDiagonal { u, v } => {
                write!(f, "nonpositive distance ({u},{v})")
            }
            MetricViolation::Triangle { u, v, via } => {
                write!(f, "triangle violation ({u},{v},{via})")
            }
            MetricViolation::NotAPartition { vertex } => {
                write!(f, "vertex {vertex} not in exactly one cluster")
            }
            MetricViolation::EndpointOutsideCluster { cluster, vertex } => {
                write!(f, "endpoint {vertex} outside cluster {cluster}")
            }
        }
    }
}

/// Check every instance invariant with exact integer comparisons. Empty
/// result means the instance is well-formed.
pub fn validate_metric(inst: &MetricInstance) -> Vec<MetricViolation> {
    let n = inst.n;
    let mut out = Vec::new();
    for v in 0..n {
        if inst.dist(v, v) != 0 {
            out.push(MetricViolation::NonzeroDiagonal { v });
        }
    }
    for u in 0..n {
        for v in u + 1..n {
            if inst.dist(u, v) != inst.dist(v, u) {
                out.push(MetricViolation::Asymmetry { u, v });
            }
            if inst.dist(u, v) <= 0 {
                out.push(MetricViolation::NonpositiveOffDiagonal { u, v });
            }
        }
    }
    for u in 0..n {
        for v in 0..n {
            if v == u {
                continue;
            }
            for via in 0..n {
                if via == u || via == v {
                    continue;
                }
                if inst.dist(u, v) > inst.dist(u, via) + inst.dist(via, v) {
                    out.push(MetricViolation::Triangle { u, v, via });
                }
            }
        }
    }
    let mut seen = vec![0usize; n];
    for c in &inst.clusters {
        for &v in c {
            seen[v] += 1;
        }
    }
    for (v, &count) in seen.iter().enumerate() {
        if count != 1 {
            out.push(MetricViolation::NotAPartition { vertex: v });
        }
    }
    if let Some(ends) = &inst.endpoints {
        for (i, &(s, t)) in ends.iter().enumerate() {
            for v in [s, t] {
                if !inst.clusters[i].contains(&v) {
                    out.push(MetricViolation::EndpointOutsideCluster {
                        cluster: i,
                        vertex: v,
                    });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Feasible,
    InfeasibleCrossEdge,
    InfeasibleDegree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseTag {
    SpecifiedEnds,
    UnspecifiedIntraOnly,
    UnspecifiedWithCrossEdges,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Witness {
    Edge(usize, usize),
    Vertex(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeasibilityVerdict {
    pub status: Status,
    pub case_tag: CaseTag,
    pub cross_edge_count: usize,
    pub witness: Option<Witness>,
}

/// Classify an instance per the two structural obstructions: a cross-cluster
/// required edge that is not a (t_i, s_j) edge under specified endpoints, or
/// a vertex of degree > 2 in the required-edge subgraph. The case tag records
/// endpoint presence and whether cross-cluster required edges exist.
pub fn classify(inst: &MetricInstance) -> FeasibilityVerdict {
    let cross = inst.cross_edges();
    let case_tag = if inst.endpoints.is_some() {
        CaseTag::SpecifiedEnds
    } else if cross.is_empty() {
        CaseTag::UnspecifiedIntraOnly
    } else {
        CaseTag::UnspecifiedWithCrossEdges
    };
    let mut verdict = FeasibilityVerdict {
        status: Status::Feasible,
        case_tag,
        cross_edge_count: cross.len(),
        witness: None,
    };
    if let Some(ends) = &inst.endpoints {
        for &(u, v) in &cross {
            let (i, j) = (inst.cluster_of(u), inst.cluster_of(v));
            let ok = (u == ends[i].1 && v == ends[j].0) || (v == ends[j].1 && u == ends[i].0);
            if !ok {
                verdict.status = Status::InfeasibleCrossEdge;
                verdict.witness = Some(Witness::Edge(u, v));
                return verdict;
            }
        }
    }
    for v in 0..inst.n {
        if inst.required_degree(v) > 2 {
            verdict.status = Status::InfeasibleDegree;
            verdict.witness = Some(Witness::Vertex(v));
            return verdict;
        }
    }
    verdict
}
