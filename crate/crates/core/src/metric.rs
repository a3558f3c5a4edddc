//! Integer edge costs and the metric access trait shared by every algorithm.
//!
//! All costs are exact `i64` values (scaled integers); every ratio guarantee
//! is an exact inequality, so nothing in the crate goes through floating point.

/// Scaled integer edge cost.
pub type Cost = i64;

/// Read access to a symmetric distance function over vertex indices.
pub trait Metric {
    fn dist(&self, u: usize, v: usize) -> Cost;

    /// Total cost of consecutive hops along `seq`.
    fn path_cost(&self, seq: &[usize]) -> Cost {
        seq.windows(2).map(|w| self.dist(w[0], w[1])).sum()
    }
}

impl<M: Metric + ?Sized> Metric for &M {
    fn dist(&self, u: usize, v: usize) -> Cost {
        (**self).dist(u, v)
    }
}

/// Dense symmetric cost table, used for derived metrics (contracted graphs,
/// arc-node metrics) where no instance backs the numbers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostMatrix {
    n: usize,
    data: Vec<Cost>,
}

impl CostMatrix {
    pub fn zeros(n: usize) -> Self {
        CostMatrix {
            n,
            data: vec![0; n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Cost) -> Self {
        let mut m = CostMatrix::zeros(n);
        for u in 0..n {
            for v in 0..n {
                m.data[u * n + v] = f(u, v);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn set(&mut self, u: usize, v: usize, c: Cost) {
        self.data[u * self.n + v] = c;
        self.data[v * self.n + u] = c;
    }
}

impl Metric for CostMatrix {
    fn dist(&self, u: usize, v: usize) -> Cost {
        self.data[u * self.n + v]
    }
}
