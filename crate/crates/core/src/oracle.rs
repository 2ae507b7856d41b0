//! Monte Carlo ground truth: LLRT scores sampled under both hypotheses,
//! the empirical ROC and its Mann–Whitney area, ROC-derived divergence
//! estimates, and checks of the per-eigenvalue GAL law.
//!
//! Sampling is split into fixed-size chunks, each with its own ChaCha stream
//! derived from the seed, so results are bit-identical for a given seed
//! whatever the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::bessel::k0_scaled;
use crate::error::{Error, Result};
use crate::matrix::CorrelationMatrix;
use crate::quadrature::{integrate, integrate_to_infinity, QuadratureConfig};

pub const MIN_SAMPLES: usize = 1000;
const CHUNK: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq)]
pub struct LlrtSamples {
    pub h0_scores: Vec<f64>,
    pub h1_scores: Vec<f64>,
    pub seed: u64,
}

fn chunk_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Row-major lower Cholesky factor.
fn lower_factor(m: &CorrelationMatrix) -> Result<Vec<f64>> {
    let l = m.cholesky()?.l();
    let n = m.dim();
    Ok((0..n * n).map(|k| l[(k / n, k % n)]).collect())
}

fn inverse(m: &CorrelationMatrix) -> Result<Vec<f64>> {
    let n = m.dim();
    let inv = m.cholesky()?.inverse();
    Ok((0..n * n).map(|k| inv[(k / n, k % n)]).collect())
}

/// `l(x) = xᵀKx + ½ ln|Δ|` for `x = L z`, `z` standard normal.
fn draw_scores(l: &[f64], k: &[f64], c: f64, n: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut z = vec![0.0; n];
    let mut x = vec![0.0; n];
    (0..count)
        .map(|_| {
            for zi in z.iter_mut() {
                *zi = StandardNormal.sample(rng);
            }
            for i in 0..n {
                x[i] = (0..=i).map(|j| l[i * n + j] * z[j]).sum();
            }
            let mut q = 0.0;
            for i in 0..n {
                let row: f64 = (0..n).map(|j| k[i * n + j] * x[j]).sum();
                q += x[i] * row;
            }
            q + c
        })
        .collect()
}

fn draw_parallel(l: &[f64], k: &[f64], c: f64, n: usize, total: usize, seed: u64, hyp: u64) -> Vec<f64> {
    let chunks = total.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .flat_map_iter(|i| {
            let count = CHUNK.min(total - i * CHUNK);
            let mut rng = chunk_rng(seed, 2 * i as u64 + hyp);
            draw_scores(l, k, c, n, count, &mut rng)
        })
        .collect()
}

/// Log-likelihood ratio `ln f_M(x) − ln f_X(x)` evaluated on `n_samples`
/// draws from each of `N(0, Σ_X)` (ℋ₀) and `N(0, Σ_M)` (ℋ₁).
pub fn sample_llrt(
    sigma: &CorrelationMatrix,
    model: &CorrelationMatrix,
    n_samples: usize,
    seed: u64,
) -> Result<LlrtSamples> {
    let n = sigma.dim();
    if model.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: model.dim(),
        });
    }
    if n_samples < MIN_SAMPLES {
        return Err(Error::OutOfDomain(format!(
            "n_samples = {n_samples}, need at least {MIN_SAMPLES}"
        )));
    }
    let (px, pm) = (inverse(sigma)?, inverse(model)?);
    let k: Vec<f64> = px.iter().zip(&pm).map(|(a, b)| 0.5 * (a - b)).collect();
    let c = 0.5 * (sigma.log_det()? - model.log_det()?);
    let (lx, lm) = (lower_factor(sigma)?, lower_factor(model)?);
    Ok(LlrtSamples {
        h0_scores: draw_parallel(&lx, &k, c, n, n_samples, seed, 0),
        h1_scores: draw_parallel(&lm, &k, c, n, n_samples, seed, 1),
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RocEstimate {
    /// `(false alarm, detection)` from `(0, 0)` to `(1, 1)`, one point per
    /// distinct threshold.
    pub points: Vec<(f64, f64)>,
    pub auc_mw: f64,
    pub se: f64,
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_unstable_by(f64::total_cmp);
    s
}

/// Sweeps the threshold down through the pooled scores. Ties between the
/// hypotheses move the curve diagonally, which gives them half weight in
/// the area.
fn roc_from_scores(h0: &[f64], h1: &[f64]) -> Result<RocEstimate> {
    if h0.is_empty() || h1.is_empty() {
        return Err(Error::OutOfDomain("empty score set".into()));
    }
    if let Some(v) = h0.iter().chain(h1).find(|v| !v.is_finite()) {
        return Err(Error::OutOfDomain(format!("non-finite score {v}")));
    }
    let (s0, s1) = (sorted(h0), sorted(h1));
    let (n0, n1) = (s0.len(), s1.len());
    let (mut i0, mut i1) = (n0, n1);
    let mut points = Vec::with_capacity(n0 + n1 + 1);
    points.push((0.0, 0.0));
    // Twice the Mann–Whitney U statistic, exact in integers.
    let mut u2: u128 = 0;
    while i0 > 0 || i1 > 0 {
        let t = match (i0, i1) {
            (0, _) => s1[i1 - 1],
            (_, 0) => s0[i0 - 1],
            _ => s0[i0 - 1].max(s1[i1 - 1]),
        };
        let above1 = (n1 - i1) as u128;
        let mut c0 = 0;
        while i0 > 0 && s0[i0 - 1] == t {
            i0 -= 1;
            c0 += 1;
        }
        let mut c1 = 0;
        while i1 > 0 && s1[i1 - 1] == t {
            i1 -= 1;
            c1 += 1;
        }
        u2 += c0 as u128 * (2 * above1 + c1 as u128);
        points.push(((n0 - i0) as f64 / n0 as f64, (n1 - i1) as f64 / n1 as f64));
    }
    let auc_mw = u2 as f64 / (2.0 * n0 as f64 * n1 as f64);
    let se = (auc_mw * (1.0 - auc_mw) / n0.min(n1) as f64).sqrt();
    Ok(RocEstimate { points, auc_mw, se })
}

pub fn empirical_roc(samples: &LlrtSamples) -> Result<RocEstimate> {
    roc_from_scores(&samples.h0_scores, &samples.h1_scores)
}

/// Detection probability at false-alarm level `z`, linear between ROC
/// points; on a vertical run the top of the run is used.
fn roc_at(points: &[(f64, f64)], z: f64) -> f64 {
    let idx = points.partition_point(|p| p.0 <= z);
    if idx == 0 {
        return points[0].1;
    }
    if idx == points.len() {
        return points[idx - 1].1;
    }
    let (a, b) = (points[idx - 1], points[idx]);
    if a.0 == z {
        return a.1;
    }
    a.1 + (b.1 - a.1) * (z - a.0) / (b.0 - a.0)
}

/// Divergences between the LLRT score laws read off the ROC slope `h′`,
/// estimated on `bins` equal-width false-alarm bins (equal-count bins on
/// the ℋ₀ scores).
///
/// Returns `(kl10, kl01)` with `kl10 = D(f_{L1}‖f_{L0}) = ∫ h′ ln h′ dz` and
/// `kl01 = D(f_{L0}‖f_{L1}) = −∫ ln h′ dz`. Binning is a quantisation of
/// the statistic, so both sit below the Gaussian divergences
/// (`reverse_kl` and `kl`) up to sampling noise.
pub fn roc_kl_estimate(roc: &RocEstimate, bins: usize) -> Result<(f64, f64)> {
    if bins < 20 {
        return Err(Error::OutOfDomain(format!("bins = {bins}, need at least 20")));
    }
    let width = 1.0 / bins as f64;
    let mut kl10 = 0.0;
    let mut kl01 = 0.0;
    // Starting from zero counts every ℋ₁ score above the largest ℋ₀ score
    // in the first bin.
    let mut lo = 0.0;
    for b in 0..bins {
        let hi = roc_at(&roc.points, (b + 1) as f64 * width);
        let mass = hi - lo;
        if !(mass > 0.0) {
            return Err(Error::EmptyBin { bin: b });
        }
        let slope = mass / width;
        kl10 += mass * slope.ln();
        kl01 -= width * slope.ln();
        lo = hi;
    }
    Ok((kl10, kl01))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocKlBootstrap {
    pub kl10: f64,
    pub kl01: f64,
    pub kl10_se: f64,
    pub kl01_se: f64,
    pub replicates: usize,
}

/// [`roc_kl_estimate`] on the samples plus bootstrap standard errors from
/// `replicates` resamples of both score sets.
pub fn roc_kl_bootstrap(samples: &LlrtSamples, bins: usize, replicates: usize, seed: u64) -> Result<RocKlBootstrap> {
    if replicates < 2 {
        return Err(Error::OutOfDomain(format!("replicates = {replicates}, need at least 2")));
    }
    let (kl10, kl01) = roc_kl_estimate(&empirical_roc(samples)?, bins)?;
    let reps = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = chunk_rng(seed, r as u64);
            let resample = |v: &[f64], rng: &mut ChaCha8Rng| -> Vec<f64> {
                (0..v.len()).map(|_| v[rng.random_range(0..v.len())]).collect()
            };
            let h0 = resample(&samples.h0_scores, &mut rng);
            let h1 = resample(&samples.h1_scores, &mut rng);
            roc_kl_estimate(&roc_from_scores(&h0, &h1)?, bins)
        })
        .collect::<Result<Vec<_>>>()?;
    let sd = |f: fn(&(f64, f64)) -> f64| {
        let m = reps.iter().map(f).sum::<f64>() / reps.len() as f64;
        (reps.iter().map(|r| (f(r) - m).powi(2)).sum::<f64>() / (reps.len() - 1) as f64).sqrt()
    };
    Ok(RocKlBootstrap {
        kl10,
        kl01,
        kl10_se: sd(|r| r.0),
        kl01_se: sd(|r| r.1),
        replicates,
    })
}

/// Density of one GAL component of the difference statistic,
/// `e^{l/2}/(π√α) · K₀(√(1/α + ¼)·|l|)`.
pub fn gal_pdf(alpha: f64, l: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::OutOfDomain(format!("alpha = {alpha} must be positive")));
    }
    if l == 0.0 || !l.is_finite() {
        return Err(Error::OutOfDomain(format!("GAL density undefined at l = {l}")));
    }
    let b = (1.0 / alpha + 0.25).sqrt();
    let x = b * l.abs();
    Ok(k0_scaled(x) * (0.5 * l - x).exp() / (std::f64::consts::PI * alpha.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GalCheck {
    pub lambda: f64,
    pub alpha: f64,
    pub n_samples: usize,
    /// Kolmogorov–Smirnov distance to the integrated density.
    pub ks_distance: f64,
    /// 1% critical value `1.63/√N`.
    pub ks_critical: f64,
    pub mean: f64,
    pub mean_se: f64,
}

impl GalCheck {
    pub fn ks_passed(&self) -> bool {
        self.ks_distance < self.ks_critical
    }

    pub fn mean_passed(&self) -> bool {
        (self.mean - 0.5 * self.alpha).abs() <= 3.0 * self.mean_se
    }
}

/// `∫_a^b` of the density, splitting at the singularity.
fn gal_mass(alpha: f64, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let pdf = |l: f64| gal_pdf(alpha, l).unwrap_or(0.0);
    if a < 0.0 && b > 0.0 {
        return Ok(integrate(pdf, a, 0.0, cfg)?.value + integrate(pdf, 0.0, b, cfg)?.value);
    }
    Ok(integrate(pdf, a, b, cfg)?.value)
}

/// Samples `((λ−1)/2)W² − ((1−λ⁻¹)/2)Z²` and compares the empirical law
/// with the GAL density.
pub fn gal_component_check(lambda: f64, n_samples: usize, seed: u64) -> Result<GalCheck> {
    if !(lambda > 0.0 && lambda.is_finite()) || lambda == 1.0 {
        return Err(Error::OutOfDomain(format!("lambda = {lambda} must be positive and != 1")));
    }
    if n_samples < MIN_SAMPLES {
        return Err(Error::OutOfDomain(format!(
            "n_samples = {n_samples}, need at least {MIN_SAMPLES}"
        )));
    }
    let alpha = crate::matrix::dissimilarity(lambda);
    let (p, q) = (0.5 * (lambda - 1.0), 0.5 * (1.0 - 1.0 / lambda));
    let chunks = n_samples.div_ceil(CHUNK);
    let mut xs: Vec<f64> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|i| {
            let count = CHUNK.min(n_samples - i * CHUNK);
            let mut rng = chunk_rng(seed, i as u64);
            (0..count)
                .map(|_| {
                    let w: f64 = StandardNormal.sample(&mut rng);
                    let z: f64 = StandardNormal.sample(&mut rng);
                    p * w * w - q * z * z
                })
                .collect::<Vec<_>>()
        })
        .collect();

    let nf = n_samples as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);

    xs.sort_unstable_by(f64::total_cmp);
    let cfg = QuadratureConfig {
        abs_tol: 1e-13,
        rel_tol: 1e-10,
        ..Default::default()
    };
    let pdf = |l: f64| gal_pdf(alpha, l).unwrap_or(0.0);
    let first = xs[0];
    let mut cdf = if first < 0.0 {
        integrate_to_infinity(|t| pdf(first - t), 0.0, &cfg)?.value
    } else {
        // Everything below zero plus [0, first].
        integrate_to_infinity(|t| pdf(-t), 0.0, &cfg)?.value + gal_mass(alpha, 0.0, first, &cfg)?
    };
    let mut ks: f64 = 0.0;
    for (k, w) in xs.windows(2).enumerate() {
        ks = ks.max((cdf - k as f64 / nf).abs()).max(((k + 1) as f64 / nf - cdf).abs());
        if w[1] > w[0] {
            cdf += gal_mass(alpha, w[0], w[1], &cfg)?;
        }
    }
    ks = ks.max((cdf - (nf - 1.0) / nf).abs()).max((1.0 - cdf).abs());

    Ok(GalCheck {
        lambda,
        alpha,
        n_samples,
        ks_distance: ks,
        ks_critical: 1.63 / nf.sqrt(),
        mean,
        mean_se: (var / nf).sqrt(),
    })
}

/// Mann–Whitney AUC and its standard error from fresh samples.
pub fn monte_carlo_auc(
    sigma: &CorrelationMatrix,
    model: &CorrelationMatrix,
    n_samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let roc = empirical_roc(&sample_llrt(sigma, model, n_samples, seed)?)?;
    Ok((roc.auc_mw, roc.se))
}
