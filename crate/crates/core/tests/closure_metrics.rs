//! Non-Euclidean coverage: random symmetric matrices metricized by their
//! shortest-path closure. The ratio guarantees depend only on the triangle
//! inequality, so they must hold here as well as on planar instances.

use gcrp_core::instance::{classify, MetricInstance, Status};
use gcrp_core::oracle::{exact_gcrp, OracleConfig};
use gcrp_core::solver::solve;
use gcrp_core::validity::check_tour;

// Random symmetric matrix, metricized by Floyd-Warshall closure.
fn closure_metric(seed: u64, n: usize, spread: i64) -> Vec<i64> {
    let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(12345);
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    let mut d = vec![0i64; n * n];
    for u in 0..n {
        for v in u + 1..n {
            let w = 1 + (next() % spread as u64) as i64;
            d[u * n + v] = w;
            d[v * n + u] = w;
        }
    }
    for via in 0..n {
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    let alt = d[u * n + via] + d[via * n + v];
                    if via != u && via != v && alt < d[u * n + v] {
                        d[u * n + v] = alt;
                    }
                }
            }
        }
    }
    d
}

fn pick_struct(seed: u64, n: usize, k: usize, ends: bool, cross: bool) -> MetricInstance {
    let mut state = seed.wrapping_mul(0xd1342543de82ef95).wrapping_add(99);
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    // contiguous clusters over a shuffled id list
    let mut ids: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = (next() % (i as u64 + 1)) as usize;
        ids.swap(i, j);
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let base = n / k;
    let mut start = 0;
    for c in 0..k {
        let extra = if c < n % k { 1 } else { 0 };
        clusters.push(ids[start..start + base + extra].to_vec());
        start += base + extra;
    }
    let required_v: Vec<usize> = (0..n).filter(|_| next() % 2 == 0).collect();
    // intra edges as one slot each per big cluster
    let mut required_e: Vec<(usize, usize)> = Vec::new();
    for c in &clusters {
        if c.len() >= 3 && next() % 2 == 0 {
            required_e.push((c[0], c[1]));
        }
    }
    let endpoints = if ends {
        Some(
            clusters
                .iter()
                .map(|c| {
                    if c.len() == 1 {
                        (c[0], c[0])
                    } else {
                        (c[0], c[c.len() - 1])
                    }
                })
                .collect(),
        )
    } else {
        None
    };
    if cross && !ends && k >= 2 {
        // one matching cross edge between last elements of clusters 0 and 1
        required_e.push((*clusters[0].last().unwrap(), *clusters[1].last().unwrap()));
    }
    let d = closure_metric(seed, n, 50 + (seed % 5000) as i64);
    MetricInstance::new(n, d, clusters, required_v, required_e, endpoints).unwrap()
}

#[test]
fn closure_metrics() {
    let cfg = OracleConfig::default();
    let mut count = 0;
    let mut worst = (0.0f64, String::new());
    for seed in 0..150u64 {
        for (n, k) in [(6, 2), (7, 3), (8, 3), (8, 4)] {
            for (ends, cross) in [(true, false), (false, false), (false, true)] {
                let inst = pick_struct(seed * 31 + n as u64, n, k, ends, cross);
                if classify(&inst).status != Status::Feasible {
                    continue;
                }
                let sol = match solve(&inst) {
                    Ok(s) => s,
                    Err(e) => panic!("solve failed seed={seed} n={n} ends={ends}: {e}"),
                };
                let viol = check_tour(&inst, &sol.tour);
                assert!(viol.is_empty(), "invalid seed={seed} n={n}: {viol:?}");
                let opt = exact_gcrp(&inst, &cfg).unwrap();
                assert!(sol.tour.cost >= opt.opt_cost);
                let (cn, cd) = sol.algorithm.ceiling();
                assert!(
                    sol.tour.cost * cd <= cn * opt.opt_cost,
                    "CEILING seed={seed} n={n} k={k} ends={ends} cross={cross} tag={} : {} vs opt {}",
                    sol.algorithm, sol.tour.cost, opt.opt_cost
                );
                if opt.opt_cost > 0 {
                    let r = sol.tour.cost as f64 / opt.opt_cost as f64;
                    if r > worst.0 {
                        worst = (
                            r,
                            format!(
                                "seed={seed} n={n} k={k} ends={ends} cross={cross} tag={}",
                                sol.algorithm
                            ),
                        );
                    }
                }
                count += 1;
            }
        }
    }
    println!(
        "closure metrics: {count} instances clean; worst ratio {:.4} ({})",
        worst.0, worst.1
    );
}
