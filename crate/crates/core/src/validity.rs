//! Shared solution checker: the conditions every tour must satisfy, used for
//! solver outputs, oracle witnesses and the CLI `check` subcommand.

use std::fmt;

use crate::graphkit::Walk;
use crate::instance::MetricInstance;
use crate::metric::Cost;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidityViolation {
    NotClosed,
    VertexOutOfRange { vertex: usize },
    RequiredVertexCount { vertex: usize, count: usize },
    RequiredEdgeNotTraversed { u: usize, v: usize },
    ClusterNotConsecutive { cluster: usize },
    BlockEndpointMismatch { cluster: usize },
    CostMismatch { stated: Cost, actual: Cost },
}

impl fmt::Display for ValidityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidityViolation::NotClosed => write!(f, "tour is not a closed walk"),
            ValidityViolation::VertexOutOfRange { vertex } => {
                write!(f, "vertex {vertex} out of range")
            }
            ValidityViolation::RequiredVertexCount { vertex, count } => {
                write!(f, "required vertex {vertex} visited {count} times")
            }
            ValidityViolation::RequiredEdgeNotTraversed { u, v } => {
                write!(f, "required edge ({u},{v}) not traversed")
            }
            ValidityViolation::ClusterNotConsecutive { cluster } => {
                write!(f, "cluster {cluster} not visited consecutively")
            }
            ValidityViolation::BlockEndpointMismatch { cluster } => {
                write!(f, "cluster {cluster} block does not run start-to-end")
            }
            ValidityViolation::CostMismatch { stated, actual } => {
                write!(f, "stated cost {stated} differs from recomputed {actual}")
            }
        }
    }
}

/// Check a closed tour against an instance: every required vertex exactly
/// once, every required edge traversed as a consecutive pair, each cluster's
/// tour vertices in one contiguous cyclic block, blocks running start-to-end
/// when endpoints are specified, and the stated cost exact.
pub fn check_tour(inst: &MetricInstance, walk: &Walk) -> Vec<ValidityViolation> {
    let mut out = Vec::new();
    if !walk.closed {
        out.push(ValidityViolation::NotClosed);
    }
    for &v in &walk.seq {
        if v >= inst.n() {
            out.push(ValidityViolation::VertexOutOfRange { vertex: v });
            return out;
        }
    }
    for &v in inst.required_vertices() {
        let count = walk.seq.iter().filter(|&&x| x == v).count();
        if count != 1 {
            out.push(ValidityViolation::RequiredVertexCount { vertex: v, count });
        }
    }
    for &(u, v) in inst.required_edges() {
        if !walk.traverses(u, v) {
            out.push(ValidityViolation::RequiredEdgeNotTraversed { u, v });
        }
    }
    for cluster in 0..inst.k() {
        if !cluster_consecutive(inst, walk, cluster) {
            out.push(ValidityViolation::ClusterNotConsecutive { cluster });
        }
    }
    if let Some(ends) = inst.endpoints() {
        // A closed tour may run in either direction; every block must agree.
        let forward = (0..inst.k()).all(|i| block_runs(inst, walk, i, ends[i].0, ends[i].1));
        let backward = (0..inst.k()).all(|i| block_runs(inst, walk, i, ends[i].1, ends[i].0));
        if !forward && !backward {
            let mut any = false;
            for (i, &(s, t)) in ends.iter().enumerate() {
                if !block_runs(inst, walk, i, s, t) && !block_runs(inst, walk, i, t, s) {
                    out.push(ValidityViolation::BlockEndpointMismatch { cluster: i });
                    any = true;
                }
            }
            if !any {
                // Blocks individually fine but tour directions disagree.
                out.push(ValidityViolation::BlockEndpointMismatch { cluster: 0 });
            }
        }
    }
    let actual = walk.recompute_cost(inst);
    if actual != walk.cost {
        out.push(ValidityViolation::CostMismatch {
            stated: walk.cost,
            actual,
        });
    }
    out
}

/// Tour positions holding vertices of `cluster` must form one contiguous
/// cyclic block: at most two membership flips around the cycle.
fn cluster_consecutive(inst: &MetricInstance, walk: &Walk, cluster: usize) -> bool {
    let len = walk.seq.len();
    if len == 0 {
        return true;
    }
    let member: Vec<bool> = walk
        .seq
        .iter()
        .map(|&v| inst.cluster_of(v) == cluster)
        .collect();
    let mut flips = 0;
    for i in 0..len {
        if member[i] != member[(i + 1) % len] {
            flips += 1;
        }
    }
    flips <= 2
}

/// True when the cluster's contiguous block starts at `s` and ends at `t`
/// (in tour direction). Clusters absent from the tour pass trivially.
fn block_runs(inst: &MetricInstance, walk: &Walk, cluster: usize, s: usize, t: usize) -> bool {
    let len = walk.seq.len();
    let positions: Vec<usize> = (0..len)
        .filter(|&i| inst.cluster_of(walk.seq[i]) == cluster)
        .collect();
    if positions.is_empty() {
        return true;
    }
    if positions.len() == len {
        // Single-cluster tour: any rotation is a valid block.
        return walk.seq.contains(&s) && walk.seq.contains(&t);
    }
    // The block start is a member position whose cyclic predecessor is not a
    // member.
    let member = |i: usize| inst.cluster_of(walk.seq[i % len]) == cluster;
    let first = match positions.iter().find(|&&i| !member((i + len - 1) % len)) {
        Some(&i) => i,
        None => return false,
    };
    let last = (first + positions.len() - 1) % len;
    walk.seq[first] == s && walk.seq[last] == t
}

#[cfg(test)]
mod tests {
    use super::*;

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
    fn accepts_valid_tour() {
        let inst = unit_inst(
            4,
            vec![vec![0, 1], vec![2, 3]],
            vec![0, 1, 2, 3],
            vec![],
            None,
        );
        let walk = Walk::closed(vec![0, 1, 2, 3], &inst);
        assert!(check_tour(&inst, &walk).is_empty());
    }

    #[test]
    fn rejects_split_cluster() {
        let inst = unit_inst(
            4,
            vec![vec![0, 2], vec![1, 3]],
            vec![0, 1, 2, 3],
            vec![],
            None,
        );
        let walk = Walk::closed(vec![0, 1, 2, 3], &inst);
        assert!(check_tour(&inst, &walk)
            .contains(&ValidityViolation::ClusterNotConsecutive { cluster: 0 }));
    }

    #[test]
    fn rejects_missed_required_edge() {
        let inst = unit_inst(4, vec![vec![0, 1, 2, 3]], vec![], vec![(0, 2)], None);
        let walk = Walk::closed(vec![0, 1, 2, 3], &inst);
        assert!(check_tour(&inst, &walk)
            .contains(&ValidityViolation::RequiredEdgeNotTraversed { u: 0, v: 2 }));
    }

    #[test]
    fn counts_duplicate_required_vertex() {
        let inst = unit_inst(3, vec![vec![0, 1, 2]], vec![1], vec![], None);
        let walk = Walk::closed(vec![0, 1, 2, 1], &inst);
        assert!(
            check_tour(&inst, &walk).contains(&ValidityViolation::RequiredVertexCount {
                vertex: 1,
                count: 2
            })
        );
    }

    #[test]
    fn wrap_around_edge_counts_as_traversal() {
        let inst = unit_inst(3, vec![vec![0, 1, 2]], vec![], vec![(0, 2)], None);
        let walk = Walk::closed(vec![0, 1, 2], &inst);
        assert!(check_tour(&inst, &walk).is_empty());
    }

    #[test]
    fn endpoint_blocks_checked_in_both_directions() {
        let inst = unit_inst(
            4,
            vec![vec![0, 1], vec![2, 3]],
            vec![0, 1, 2, 3],
            vec![],
            Some(vec![(0, 1), (2, 3)]),
        );
        let forward = Walk::closed(vec![0, 1, 2, 3], &inst);
        assert!(check_tour(&inst, &forward).is_empty());
        // the same closed walk written in reverse
        let backward = Walk::closed(vec![3, 2, 1, 0], &inst);
        assert!(check_tour(&inst, &backward).is_empty());
        // mixed directions violate the endpoints
        let mixed = Walk::closed(vec![1, 0, 2, 3], &inst);
        assert!(!check_tour(&inst, &mixed).is_empty());
    }

    #[test]
    fn cost_mismatch_detected() {
        let inst = unit_inst(3, vec![vec![0, 1, 2]], vec![], vec![], None);
        let mut walk = Walk::closed(vec![0, 1, 2], &inst);
        walk.cost += 1;
        assert!(check_tour(&inst, &walk)
            .iter()
            .any(|v| matches!(v, ValidityViolation::CostMismatch { .. })));
    }

    #[test]
    fn empty_tour_ok_without_requirements() {
        let inst = unit_inst(3, vec![vec![0, 1, 2]], vec![], vec![], None);
        let walk = Walk::empty_closed();
        assert!(check_tour(&inst, &walk).is_empty());
    }
}
