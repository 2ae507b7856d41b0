//! Spanning trees of the complete graph: exact uniform sampling, exhaustive
//! enumeration, and per-tree quality metrics for histograms.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::divergence::divergences_from_spectrum;
use crate::error::{Error, Result};
use crate::graph::{covariance_select, TreeStructure, UnionFind};
use crate::matrix::{cam, cam_spectrum, CorrelationMatrix};
use crate::quadrature::QuadratureConfig;
use crate::spectral::one_minus_auc;

pub const MAX_ENUMERATE: usize = 8;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Wilson's loop-erased random walk on `K_n`, rooted at vertex 0. Uniform
/// over all `n^{n−2}` labelled trees.
pub fn uniform_spanning_tree_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<TreeStructure> {
    if n < 2 {
        return Err(Error::OutOfDomain(format!("spanning tree needs n >= 2, got {n}")));
    }
    let mut in_tree = vec![false; n];
    let mut next = vec![usize::MAX; n];
    in_tree[0] = true;
    for start in 1..n {
        let mut u = start;
        while !in_tree[u] {
            // Uniform neighbour of u in K_n.
            let mut v = rng.random_range(0..n - 1);
            if v >= u {
                v += 1;
            }
            next[u] = v;
            u = v;
        }
        let mut u = start;
        while !in_tree[u] {
            in_tree[u] = true;
            u = next[u];
        }
    }
    let edges = (1..n).map(|v| (v.min(next[v]), v.max(next[v]))).collect();
    TreeStructure::new(n, edges)
}

pub fn uniform_spanning_tree(n: usize, seed: u64) -> Result<TreeStructure> {
    uniform_spanning_tree_with(n, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// `count` independent uniform trees; tree `i` uses its own stream of the
/// seed, so the output does not depend on scheduling.
pub fn sample_spanning_trees(n: usize, count: usize, seed: u64) -> Result<Vec<TreeStructure>> {
    (0..count)
        .into_par_iter()
        .map(|i| uniform_spanning_tree_with(n, &mut rng_for(seed, i as u64)))
        .collect()
}

/// Edge-swap Markov chain on spanning trees: delete a uniform edge, then
/// reconnect the two sides with a uniform crossing edge. The proposal is
/// symmetric (both directions see the same cut), so with a uniform target
/// every proposal is accepted.
pub struct EdgeSwapChain {
    n: usize,
    edges: Vec<(usize, usize)>,
    rng: ChaCha8Rng,
}

impl EdgeSwapChain {
    pub fn new(n: usize, seed: u64) -> Result<Self> {
        let start = TreeStructure::path(n)?;
        Ok(Self {
            n,
            edges: start.canonical(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn step(&mut self) {
        if self.n < 3 {
            return;
        }
        let k = self.rng.random_range(0..self.edges.len());
        let mut uf = UnionFind::new(self.n);
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            if i != k {
                uf.union(u, v);
            }
        }
        let root = uf.find(self.edges[k].0);
        let (side_a, side_b): (Vec<usize>, Vec<usize>) = (0..self.n).partition(|&v| uf.find(v) == root);
        let a = side_a[self.rng.random_range(0..side_a.len())];
        let b = side_b[self.rng.random_range(0..side_b.len())];
        self.edges[k] = (a.min(b), a.max(b));
    }

    pub fn current(&self) -> TreeStructure {
        TreeStructure::new(self.n, self.edges.clone()).expect("edge swaps preserve spanning trees")
    }
}

/// `count` trees from [`EdgeSwapChain`] after `10·n` burn-in steps,
/// thinned every `n` steps.
pub fn mcmc_spanning_trees(n: usize, count: usize, seed: u64) -> Result<Vec<TreeStructure>> {
    let mut chain = EdgeSwapChain::new(n, seed)?;
    for _ in 0..10 * n {
        chain.step();
    }
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        for _ in 0..n {
            chain.step();
        }
        out.push(chain.current());
    }
    Ok(out)
}

fn prufer_decode(n: usize, seq: &[usize]) -> Result<TreeStructure> {
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &s in seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).expect("a Prüfer sequence always leaves a leaf");
        edges.push((leaf.min(s), leaf.max(s)));
        degree[leaf] = 0;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    TreeStructure::new(n, edges)
}

/// Every labelled spanning tree of `K_n`, once each, in Prüfer order.
pub fn enumerate_spanning_trees(n: usize) -> Result<Vec<TreeStructure>> {
    if n > MAX_ENUMERATE {
        return Err(Error::TooLarge { n, max: MAX_ENUMERATE });
    }
    if n < 2 {
        return Err(Error::OutOfDomain(format!("spanning tree needs n >= 2, got {n}")));
    }
    let len = n - 2;
    let total = n.pow(len as u32);
    (0..total)
        .map(|mut code| {
            let mut seq = vec![0; len];
            for s in seq.iter_mut().rev() {
                *s = code % n;
                code /= n;
            }
            prufer_decode(n, &seq)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeMetrics {
    pub tree_id: usize,
    pub edges: Vec<(usize, usize)>,
    pub kl: f64,
    pub auc: f64,
    pub one_minus_auc: f64,
    pub log10_one_minus_auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeEnsemble {
    pub n: usize,
    pub metrics: Vec<TreeMetrics>,
    /// `(tree_id, reason)` for every tree whose metrics failed.
    pub skipped: Vec<(usize, String)>,
}

fn tree_metrics(sigma: &CorrelationMatrix, tree: &TreeStructure, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    let model = covariance_select(sigma, tree.edge_set())?;
    let s = cam_spectrum(&cam(sigma, model.base())?)?;
    Ok((divergences_from_spectrum(&s).kl, one_minus_auc(&s, cfg)?))
}

/// KL and AUC of every tree, computed in parallel and reported in input
/// order. Trees that fail are listed in `skipped`.
pub fn ensemble_metrics(
    sigma: &CorrelationMatrix,
    trees: &[TreeStructure],
    cfg: &QuadratureConfig,
) -> Result<TreeEnsemble> {
    let n = sigma.dim();
    if let Some(t) = trees.iter().find(|t| t.n() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: t.n(),
        });
    }
    let results: Vec<_> = trees
        .par_iter()
        .map(|t| tree_metrics(sigma, t, cfg))
        .collect();
    let mut metrics = Vec::with_capacity(trees.len());
    let mut skipped = Vec::new();
    for (id, (tree, r)) in trees.iter().zip(results).enumerate() {
        match r {
            Ok((kl, oma)) => metrics.push(TreeMetrics {
                tree_id: id,
                edges: tree.canonical(),
                kl,
                auc: 1.0 - oma,
                one_minus_auc: oma,
                log10_one_minus_auc: oma.log10(),
            }),
            Err(e) => skipped.push((id, e.to_string())),
        }
    }
    Ok(TreeEnsemble { n, metrics, skipped })
}

impl TreeEnsemble {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tree_id,edges,kl,auc,log10_one_minus_auc\n");
        for m in &self.metrics {
            let edges: Vec<String> = m.edges.iter().map(|(u, v)| format!("{u}-{v}")).collect();
            let _ = writeln!(
                out,
                "{},{},{:.17e},{:.17e},{:.17e}",
                m.tree_id,
                edges.join(";"),
                m.kl,
                m.auc,
                m.log10_one_minus_auc
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{HashMap, HashSet};

    #[test]
    fn cayley_counts() {
        assert_eq!(enumerate_spanning_trees(2).unwrap().len(), 1);
        assert_eq!(enumerate_spanning_trees(3).unwrap().len(), 3);
        assert_eq!(enumerate_spanning_trees(5).unwrap().len(), 125);
        let six = enumerate_spanning_trees(6).unwrap();
        let distinct: HashSet<_> = six.iter().map(|t| t.canonical()).collect();
        assert_eq!((six.len(), distinct.len()), (1296, 1296));
        assert!(matches!(enumerate_spanning_trees(9), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn two_vertices() {
        assert_eq!(uniform_spanning_tree(2, 5).unwrap().canonical(), vec![(0, 1)]);
    }

    #[test]
    fn wilson_uniform_on_four() {
        let draws = 100_000;
        let trees = sample_spanning_trees(4, draws, 17).unwrap();
        let mut counts: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
        for t in &trees {
            *counts.entry(t.canonical()).or_default() += 1;
        }
        assert_eq!(counts.len(), 16);
        let p = 1.0 / 16.0;
        let tol = 5.0 * (p * (1.0 - p) / draws as f64).sqrt();
        for c in counts.values() {
            assert!((*c as f64 / draws as f64 - p).abs() < tol);
        }
    }

    #[test]
    fn edge_swap_chain_covers_trees() {
        let trees = mcmc_spanning_trees(4, 20_000, 3).unwrap();
        let distinct: HashSet<_> = trees.iter().map(|t| t.canonical()).collect();
        assert_eq!(distinct.len(), 16);
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(
            sample_spanning_trees(7, 200, 7).unwrap(),
            sample_spanning_trees(7, 200, 7).unwrap()
        );
    }
}
