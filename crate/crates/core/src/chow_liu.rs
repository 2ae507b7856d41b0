//! Chow–Liu tree: maximum spanning tree of the complete graph weighted by
//! pairwise Gaussian mutual information.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{TreeStructure, UnionFind};
use crate::matrix::CorrelationMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedEdge {
    pub u: usize,
    pub v: usize,
    /// Mutual information in nats.
    pub weight: f64,
}

/// Mutual information of a bivariate Gaussian with correlation `rho`:
/// `−½ ln(1 − ρ²)`.
pub fn mutual_info_weight(rho: f64) -> Result<f64> {
    if !(rho.abs() < 1.0) {
        return Err(Error::DegenerateCorrelation { rho });
    }
    // ln(1 − ρ²) = ln1p(−ρ²) keeps precision for small ρ.
    Ok(-0.5 * (-rho * rho).ln_1p())
}

/// All `n(n−1)/2` weighted edges, sorted by weight descending and then by
/// `(u, v)` ascending.
pub fn weighted_edges(sigma: &CorrelationMatrix) -> Result<Vec<WeightedEdge>> {
    let n = sigma.dim();
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for u in 0..n {
        for v in (u + 1)..n {
            edges.push(WeightedEdge {
                u,
                v,
                weight: mutual_info_weight(sigma.get(u, v))?,
            });
        }
    }
    edges.sort_by(|a, b| {
        b.weight
            .total_cmp(&a.weight)
            .then_with(|| (a.u, a.v).cmp(&(b.u, b.v)))
    });
    Ok(edges)
}

/// Kruskal's algorithm over [`weighted_edges`]. Ties fall to the
/// lexicographically smallest pair, so an equicorrelated matrix yields the
/// star at vertex 0.
pub fn chow_liu_tree(sigma: &CorrelationMatrix) -> Result<TreeStructure> {
    let n = sigma.dim();
    if n < 2 {
        return Err(Error::OutOfDomain(format!("Chow-Liu needs n >= 2, got {n}")));
    }
    let mut uf = UnionFind::new(n);
    let mut chosen = Vec::with_capacity(n - 1);
    for e in weighted_edges(sigma)? {
        if uf.union(e.u, e.v) {
            chosen.push((e.u, e.v));
            if chosen.len() == n - 1 {
                break;
            }
        }
    }
    TreeStructure::new(n, chosen)
}
