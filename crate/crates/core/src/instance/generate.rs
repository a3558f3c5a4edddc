//! Seeded random instance generator.
//!
//! Instances are built over distinct planar grid points with distances
//! `ceil(euclidean)`, which keeps every cost a positive integer and preserves
//! the triangle inequality exactly (ceil is monotone and subadditive on
//! nonnegative reals). Required edges are laid out as sub-paths of a random
//! per-cluster ordering, so the required-edge structure is always a disjoint
//! union of simple paths and the instance is feasible by construction.

use std::collections::BTreeSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::{classify, validate_metric, MetricInstance, Status};
use crate::metric::Cost;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndpointsMode {
    /// Every cluster gets specified start/end vertices.
    Given,
    /// No endpoints; the solver picks them.
    Free,
}

/// How cross-cluster required edges are laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossMode {
    /// Seed-dependent mix of the other modes.
    Auto,
    /// Intra-cluster required edges only.
    None,
    /// Specified-ends mode: a chain of (t_i, s_j) edges over consecutive
    /// clusters.
    Chain,
    /// Free mode: disjoint cluster pairs joined by one edge each.
    Matching,
    /// Free mode: a single cycle of cross edges through all clusters.
    Cycle,
}

#[derive(Debug, Clone)]
pub struct GenParams {
    pub n: usize,
    pub k: usize,
    pub frac_required_v: f64,
    pub frac_required_e: f64,
    pub endpoints_mode: EndpointsMode,
    pub cross_mode: CrossMode,
    /// Side length of the integer coordinate grid points are sampled from.
    pub coordinate_box: i64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            n: 8,
            k: 3,
            frac_required_v: 0.5,
            frac_required_e: 0.3,
            endpoints_mode: EndpointsMode::Free,
            cross_mode: CrossMode::Auto,
            coordinate_box: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("need n >= k >= 1, got n = {n}, k = {k}")]
    BadShape { n: usize, k: usize },
    #[error("fraction {0} outside [0, 1]")]
    BadFraction(String),
    #[error("coordinate box {0} too small for distinct points")]
    BoxTooSmall(i64),
    #[error("no feasible instance after {0} attempts")]
    Exhausted(usize),
}

const MAX_ATTEMPTS: usize = 1000;

pub fn generate_random(params: &GenParams, seed: u64) -> Result<MetricInstance, GenError> {
    if params.k == 0 || params.n < params.k {
        return Err(GenError::BadShape {
            n: params.n,
            k: params.k,
        });
    }
    for (name, f) in [
        ("fracRequiredV", params.frac_required_v),
        ("fracRequiredE", params.frac_required_e),
    ] {
        if !(0.0..=1.0).contains(&f) {
            return Err(GenError::BadFraction(format!("{name} = {f}")));
        }
    }
    let side = params.coordinate_box;
    if side < 0 || ((side + 1) * (side + 1)) < params.n as i64 {
        return Err(GenError::BoxTooSmall(side));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let inst = attempt(params, &mut rng)?;
        if validate_metric(&inst).is_empty() && classify(&inst).status == Status::Feasible {
            return Ok(inst);
        }
    }
    Err(GenError::Exhausted(MAX_ATTEMPTS))
}

fn attempt(params: &GenParams, rng: &mut ChaCha8Rng) -> Result<MetricInstance, GenError> {
    let n = params.n;
    let k = params.k;

    // Distinct grid points.
    let mut points: Vec<(i64, i64)> = Vec::with_capacity(n);
    let mut used: BTreeSet<(i64, i64)> = BTreeSet::new();
    while points.len() < n {
        let p = (
            rng.gen_range(0..=params.coordinate_box),
            rng.gen_range(0..=params.coordinate_box),
        );
        if used.insert(p) {
            points.push(p);
        }
    }
    let mut dist = vec![0 as Cost; n * n];
    for u in 0..n {
        for v in 0..n {
            if u != v {
                let dx = (points[u].0 - points[v].0) as f64;
                let dy = (points[u].1 - points[v].1) as f64;
                dist[u * n + v] = (dx * dx + dy * dy).sqrt().ceil() as Cost;
            }
        }
    }

    // Random partition into k nonempty blocks.
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut cuts: BTreeSet<usize> = BTreeSet::new();
    while cuts.len() < k - 1 {
        cuts.insert(rng.gen_range(1..n));
    }
    let mut clusters: Vec<Vec<usize>> = Vec::with_capacity(k);
    let mut start = 0;
    for &cut in cuts.iter().chain(std::iter::once(&n)) {
        clusters.push(order[start..cut].to_vec());
        start = cut;
    }

    // Per-cluster vertex arrangement; required intra edges are sub-paths of it.
    let mut arrangements: Vec<Vec<usize>> = Vec::with_capacity(k);
    for c in &clusters {
        let mut a = c.clone();
        a.shuffle(rng);
        arrangements.push(a);
    }

    let endpoints = match params.endpoints_mode {
        EndpointsMode::Free => None,
        EndpointsMode::Given => Some(
            arrangements
                .iter()
                .map(|a| (a[0], *a.last().unwrap()))
                .collect::<Vec<_>>(),
        ),
    };

    let required_vertices: Vec<usize> = (0..n)
        .filter(|_| rng.gen::<f64>() < params.frac_required_v)
        .collect();

    let mut required_edges: Vec<(usize, usize)> = Vec::new();
    for a in &arrangements {
        for w in a.windows(2) {
            if rng.gen::<f64>() < params.frac_required_e {
                required_edges.push((w[0], w[1]));
            }
        }
    }

    let cross_mode = match params.cross_mode {
        CrossMode::Auto => {
            let roll = rng.gen::<f64>();
            match params.endpoints_mode {
                EndpointsMode::Given => {
                    if k >= 2 && roll < 0.3 {
                        CrossMode::Chain
                    } else {
                        CrossMode::None
                    }
                }
                EndpointsMode::Free => {
                    if k >= 2 && roll < 0.25 {
                        CrossMode::Matching
                    } else if k >= 2 && roll < 0.4 {
                        CrossMode::Cycle
                    } else {
                        CrossMode::None
                    }
                }
            }
        }
        m => m,
    };

    match cross_mode {
        CrossMode::None | CrossMode::Auto => {}
        CrossMode::Chain => {
            if let Some(ends) = &endpoints {
                // A chain of (t_i, s_j) edges over a random cluster order.
                let mut cl: Vec<usize> = (0..k).collect();
                cl.shuffle(rng);
                let links = rng.gen_range(1..k.max(2));
                for w in cl.windows(2).take(links) {
                    required_edges.push((ends[w[0]].1, ends[w[1]].0));
                }
            }
        }
        CrossMode::Matching => {
            let mut cl: Vec<usize> = (0..k).collect();
            cl.shuffle(rng);
            let pairs = (k / 2).max(1).min(rng.gen_range(1..=k.max(2) / 2).max(1));
            for p in 0..pairs {
                let (i, j) = (cl[2 * p], cl[2 * p + 1]);
                let u = pick_attachment(&arrangements[i], &required_edges, rng);
                let v = pick_attachment(&arrangements[j], &required_edges, rng);
                required_edges.push((u, v));
            }
        }
        CrossMode::Cycle => {
            let mut cl: Vec<usize> = (0..k).collect();
            cl.shuffle(rng);
            // Cross edges joining arrangement tails to heads around the cycle;
            // attachment vertices are the arrangement ends, whose required
            // degree stays at most 2.
            for idx in 0..k {
                let i = cl[idx];
                let j = cl[(idx + 1) % k];
                let u = *arrangements[i].last().unwrap();
                let v = arrangements[j][0];
                if u != v {
                    required_edges.push((u, v));
                }
            }
        }
    }

    MetricInstance::new(
        n,
        dist,
        clusters,
        required_vertices,
        required_edges,
        endpoints,
    )
    .map_err(|_| GenError::Exhausted(0))
}

/// A vertex of the cluster with required degree <= 1, preferring the
/// arrangement ends so the new cross edge keeps the path structure intact.
fn pick_attachment(arrangement: &[usize], edges: &[(usize, usize)], rng: &mut ChaCha8Rng) -> usize {
    let degree = |v: usize| edges.iter().filter(|&&(a, b)| a == v || b == v).count();
    let head = arrangement[0];
    let tail = *arrangement.last().unwrap();
    let mut candidates: Vec<usize> = vec![head];
    if tail != head {
        candidates.push(tail);
    }
    candidates.retain(|&v| degree(v) <= 1);
    debug_assert!(!candidates.is_empty());
    candidates[rng.gen_range(0..candidates.len())]
}
