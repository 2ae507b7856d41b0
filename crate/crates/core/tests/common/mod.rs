//! Test-side oracles and instance generators, written independently of the
//! library code paths they check.
#![allow(dead_code)]

use covsel::{CorrelationMatrix, TreeStructure};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Normalised Wishart draw with `df` degrees of freedom; smaller `df`
/// means stronger correlations.
pub fn random_correlation(n: usize, df: usize, rng: &mut ChaCha8Rng) -> CorrelationMatrix {
    let a = DMatrix::<f64>::from_fn(n, df, |_, _| StandardNormal.sample(rng));
    CorrelationMatrix::from_covariance(&a * a.transpose()).expect("Wishart draws are PD")
}

/// Weakly correlated Wishart-style matrix in which variables 0 and 1 share
/// almost all of their factor loadings, so Σ01 dominates every other entry.
pub fn dominant_pair_correlation(n: usize, df: usize, noise: f64, rng: &mut ChaCha8Rng) -> CorrelationMatrix {
    let mut a = DMatrix::<f64>::from_fn(n, df, |_, _| StandardNormal.sample(rng));
    for j in 0..df {
        let e: f64 = StandardNormal.sample(rng);
        a[(1, j)] = a[(0, j)] + noise * e;
    }
    CorrelationMatrix::from_covariance(&a * a.transpose()).expect("full-rank loadings are PD")
}

/// Uniform labelled tree from a random Prüfer sequence.
pub fn random_tree(n: usize, rng: &mut ChaCha8Rng) -> TreeStructure {
    let seq: Vec<usize> = (0..n.saturating_sub(2)).map(|_| rng.random_range(0..n)).collect();
    let mut degree = vec![1; n];
    for &s in &seq {
        degree[s] += 1;
    }
    let mut edges = Vec::new();
    for &s in &seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
        edges.push((leaf, s));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    TreeStructure::new(n, edges).unwrap()
}

pub fn inv(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.clone().try_inverse().expect("invertible")
}

/// `ln det` through LU.
pub fn ln_det(m: &DMatrix<f64>) -> f64 {
    m.clone().lu().determinant().ln()
}

/// `D(N(0, p) ‖ N(0, q)) = ½(tr(q⁻¹p) − n + ln|q| − ln|p|)`.
pub fn gaussian_kl(p: &DMatrix<f64>, q: &DMatrix<f64>) -> f64 {
    let n = p.nrows() as f64;
    0.5 * ((inv(q) * p).trace() - n + ln_det(q) - ln_det(p))
}

/// Maximum violation of the three covariance-selection rules.
pub fn selection_violation(sigma: &DMatrix<f64>, model: &DMatrix<f64>, tree: &TreeStructure) -> f64 {
    let n = sigma.nrows();
    let p = inv(model);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        worst = worst.max((sigma[(i, i)] - model[(i, i)]).abs());
        for j in 0..n {
            if i == j {
                continue;
            }
            let edge = tree.edge_set().contains(i, j);
            if edge {
                worst = worst.max((sigma[(i, j)] - model[(i, j)]).abs());
            } else {
                worst = worst.max(p[(i, j)].abs());
            }
        }
    }
    worst
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
