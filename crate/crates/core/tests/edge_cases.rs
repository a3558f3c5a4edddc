//! Structurally infeasible inputs that pass the coarse classification must
//! surface as typed solver/oracle errors, never as panics or invalid tours.

use gcrp_core::instance::MetricInstance;
use gcrp_core::oracle::{exact_gcrp, OracleConfig, OracleError};
use gcrp_core::solver::{solve, solve_specified, solve_unspecified_cross, SolveError};

fn unit(
    n: usize,
    clusters: Vec<Vec<usize>>,
    rv: Vec<usize>,
    re: Vec<(usize, usize)>,
    ends: Option<Vec<(usize, usize)>>,
) -> MetricInstance {
    let mut d = vec![1i64; n * n];
    for v in 0..n {
        d[v * n + v] = 0;
    }
    MetricInstance::new(n, d, clusters, rv, re, ends).unwrap()
}

#[test]
fn required_cycle_in_cluster() {
    let tri = unit(
        4,
        vec![vec![0, 1, 2, 3]],
        vec![],
        vec![(0, 1), (1, 2), (0, 2)],
        None,
    );
    assert!(matches!(solve(&tri), Err(SolveError::ClusterPath { .. })));
    assert!(matches!(
        exact_gcrp(&tri, &OracleConfig::default()),
        Err(OracleError::Structure(_))
    ));
}

#[test]
fn start_interior_to_required_path() {
    let inst = unit(
        3,
        vec![vec![0, 1, 2]],
        vec![],
        vec![(0, 1), (1, 2)],
        Some(vec![(1, 0)]),
    );
    assert!(matches!(
        solve_specified(&inst),
        Err(SolveError::ClusterPath { .. })
    ));
}

#[test]
fn endpoints_sealing_a_segment() {
    // start and end are the two ends of a required path while vertex 3 is
    // also required
    let inst = unit(
        4,
        vec![vec![0, 1, 2, 3]],
        vec![3],
        vec![(0, 1), (1, 2)],
        Some(vec![(0, 2)]),
    );
    assert!(matches!(
        solve_specified(&inst),
        Err(SolveError::ClusterPath { .. })
    ));
}

#[test]
fn coinciding_ends_at_required_vertex() {
    let inst = unit(
        3,
        vec![vec![0, 1, 2]],
        vec![0, 1],
        vec![],
        Some(vec![(0, 0)]),
    );
    assert!(matches!(
        solve_specified(&inst),
        Err(SolveError::CrossStructure(_))
    ));
    assert!(matches!(
        exact_gcrp(&inst, &OracleConfig::default()),
        Err(OracleError::Infeasible(_))
    ));
}

#[test]
fn cluster_touching_three_cross_edges() {
    let inst = unit(
        6,
        vec![vec![0, 1, 2], vec![3], vec![4], vec![5]],
        vec![],
        vec![(0, 3), (1, 4), (2, 5)],
        None,
    );
    assert!(matches!(
        solve_unspecified_cross(&inst),
        Err(SolveError::CrossStructure(_))
    ));
}

#[test]
fn cross_cycle_not_spanning_required_clusters() {
    let inst = unit(
        5,
        vec![vec![0, 1], vec![2, 3], vec![4]],
        vec![4],
        vec![(0, 2), (1, 3)],
        None,
    );
    assert!(matches!(
        solve_unspecified_cross(&inst),
        Err(SolveError::CrossStructure(_))
    ));
    assert!(exact_gcrp(&inst, &OracleConfig::default()).is_err());
}

#[test]
fn double_cross_vertex_with_extra_content() {
    let inst = unit(
        4,
        vec![vec![0, 1], vec![2], vec![3]],
        vec![1],
        vec![(0, 2), (0, 3)],
        None,
    );
    assert!(matches!(
        solve_unspecified_cross(&inst),
        Err(SolveError::CrossStructure(_))
    ));
}

#[test]
fn two_chains_into_one_start_vertex() {
    // both cross edges end at cluster 1's start vertex; no tour can
    // traverse both
    let inst = unit(
        6,
        vec![vec![0, 1], vec![2, 3], vec![4, 5]],
        vec![],
        vec![(1, 2), (5, 2)],
        Some(vec![(0, 1), (2, 3), (4, 5)]),
    );
    assert!(matches!(
        solve_specified(&inst),
        Err(SolveError::CrossStructure(_))
    ));
}
