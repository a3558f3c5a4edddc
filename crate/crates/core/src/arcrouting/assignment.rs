//! Exact linear assignment (Hungarian algorithm with potentials, O(n^3)).

use crate::metric::Cost;

/// Minimum-cost perfect assignment of rows to columns of a square cost
/// matrix. Returns `succ` with `succ[row] = col` and the total cost.
pub fn min_cost_assignment(cost: &[Vec<Cost>]) -> (Vec<usize>, Cost) {
    let n = cost.len();
    if n == 0 {
        return (Vec::new(), 0);
    }
    debug_assert!(cost.iter().all(|row| row.len() == n));

    // 1-based potentials over rows (u) and columns (v); p[j] is the row
    // matched to column j, p[0] holds the row currently being placed.
    let mut u = vec![0 as Cost; n + 1];
    let mut v = vec![0 as Cost; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![Cost::MAX; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = Cost::MAX;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut succ = vec![0usize; n];
    let mut total = 0;
    for j in 1..=n {
        succ[p[j] - 1] = j - 1;
        total += cost[p[j] - 1][j - 1];
    }
    (succ, total)
}
