//! End-to-end pipelines behind the CLI: single-pair reports, dimension
//! sweeps over the reference families, and the feasible-region boundary.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{asymptotic_upper, bound_report, feasible_region_curve};
use crate::chow_liu::chow_liu_tree;
use crate::divergence::divergences_from_spectrum;
use crate::error::{Error, Result};
use crate::generators::{chain_model, kernel_network, star_model, toeplitz_equicorrelation, SensorLayout};
use crate::graph::{covariance_select, EdgeSet};
use crate::matrix::{cam, cam_spectrum, CamSpectrum, CorrelationMatrix};
use crate::oracle::monte_carlo_auc;
use crate::quadrature::QuadratureConfig;
use crate::spectral::one_minus_auc;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualityReport {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub kl: f64,
    pub reverse_kl: f64,
    pub jeffreys: f64,
    pub auc: f64,
    pub one_minus_auc: f64,
    pub log10_one_minus_auc: f64,
    pub auc_lower: f64,
    pub auc_upper: f64,
    pub auc_lower_asymptotic: f64,
    pub auc_upper_asymptotic: f64,
    pub d_star: f64,
    pub a_param: f64,
    pub cam_trace: f64,
    pub cam_logdet: f64,
    pub lambdas: Vec<f64>,
    pub alphas: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_auc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_se: Option<f64>,
}

fn report_from_spectrum(n: usize, edges: Vec<(usize, usize)>, s: &CamSpectrum, cfg: &QuadratureConfig) -> Result<QualityReport> {
    let d = divergences_from_spectrum(s);
    let b = bound_report(s, &d)?;
    let oma = one_minus_auc(s, cfg)?;
    Ok(QualityReport {
        n,
        edges,
        kl: d.kl,
        reverse_kl: d.reverse_kl,
        jeffreys: d.jeffreys,
        auc: 1.0 - oma,
        one_minus_auc: oma,
        log10_one_minus_auc: oma.log10(),
        auc_lower: b.lower,
        auc_upper: b.upper,
        auc_lower_asymptotic: b.lower_asymptotic,
        auc_upper_asymptotic: b.upper_asymptotic,
        d_star: b.d_star,
        a_param: b.a_param,
        cam_trace: s.trace(),
        cam_logdet: s.logdet(),
        lambdas: s.lambdas().to_vec(),
        alphas: s.alphas().to_vec(),
        mc_auc: None,
        mc_se: None,
    })
}

/// Selects the model for `structure` and evaluates every quality measure.
pub fn analyze(sigma: &CorrelationMatrix, structure: &EdgeSet, cfg: &QuadratureConfig) -> Result<QualityReport> {
    let model = covariance_select(sigma, structure)?;
    analyze_model(sigma, model.base(), structure.canonical(), cfg)
}

/// As [`analyze`] for an explicitly given model covariance.
pub fn analyze_model(
    sigma: &CorrelationMatrix,
    model: &CorrelationMatrix,
    edges: Vec<(usize, usize)>,
    cfg: &QuadratureConfig,
) -> Result<QualityReport> {
    let s = cam_spectrum(&cam(sigma, model)?)?;
    report_from_spectrum(sigma.dim(), edges, &s, cfg)
}

/// Adds a Monte Carlo AUC estimate to `report`.
pub fn add_monte_carlo(
    report: &mut QualityReport,
    sigma: &CorrelationMatrix,
    structure: &EdgeSet,
    n_samples: usize,
    seed: u64,
) -> Result<()> {
    let model = covariance_select(sigma, structure)?;
    let (auc, se) = monte_carlo_auc(sigma, model.base(), n_samples, seed)?;
    report.mc_auc = Some(auc);
    report.mc_se = Some(se);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepFamily {
    ToeplitzStar,
    ToeplitzChain,
    /// Chow–Liu tree of a Gaussian-kernel sensor network with random
    /// standard-normal positions.
    Kernel2d,
}

impl std::str::FromStr for SweepFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "toeplitz-star" => Ok(Self::ToeplitzStar),
            "toeplitz-chain" => Ok(Self::ToeplitzChain),
            "kernel-2d" => Ok(Self::Kernel2d),
            _ => Err(Error::OutOfDomain(format!(
                "unknown family `{s}` (expected toeplitz-star, toeplitz-chain or kernel-2d)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    /// Runs that contributed (kernel-2d skips layouts whose matrix fails
    /// validation).
    pub runs: usize,
    pub kl: f64,
    pub reverse_kl: f64,
    pub jeffreys: f64,
    pub auc: f64,
    pub one_minus_auc: f64,
    pub log10_one_minus_auc: f64,
    pub auc_lower: f64,
    pub auc_upper: f64,
    pub one_minus_lower: f64,
    pub one_minus_upper: f64,
    pub auc_lower_asymptotic: f64,
    pub auc_upper_asymptotic: f64,
}

pub const SWEEP_HEADER: &str = "n,runs,kl,reverse_kl,jeffreys,auc,one_minus_auc,log10_one_minus_auc,auc_lower,auc_upper,one_minus_lower,one_minus_upper,auc_lower_asymptotic,auc_upper_asymptotic";

impl SweepRow {
    fn single(n: usize, s: &CamSpectrum, cfg: &QuadratureConfig) -> Result<Self> {
        let d = divergences_from_spectrum(s);
        let b = bound_report(s, &d)?;
        let oma = one_minus_auc(s, cfg)?;
        Ok(Self {
            n,
            runs: 1,
            kl: d.kl,
            reverse_kl: d.reverse_kl,
            jeffreys: d.jeffreys,
            auc: 1.0 - oma,
            one_minus_auc: oma,
            log10_one_minus_auc: oma.log10(),
            auc_lower: b.lower,
            auc_upper: b.upper,
            one_minus_lower: b.one_minus_lower,
            one_minus_upper: b.one_minus_upper,
            auc_lower_asymptotic: b.lower_asymptotic,
            auc_upper_asymptotic: b.upper_asymptotic,
        })
    }

    fn mean(n: usize, rows: &[SweepRow]) -> Self {
        let k = rows.len() as f64;
        let avg = |f: fn(&SweepRow) -> f64| rows.iter().map(f).sum::<f64>() / k;
        let oma = avg(|r| r.one_minus_auc);
        Self {
            n,
            runs: rows.len(),
            kl: avg(|r| r.kl),
            reverse_kl: avg(|r| r.reverse_kl),
            jeffreys: avg(|r| r.jeffreys),
            auc: avg(|r| r.auc),
            one_minus_auc: oma,
            log10_one_minus_auc: oma.log10(),
            auc_lower: avg(|r| r.auc_lower),
            auc_upper: avg(|r| r.auc_upper),
            one_minus_lower: avg(|r| r.one_minus_lower),
            one_minus_upper: avg(|r| r.one_minus_upper),
            auc_lower_asymptotic: avg(|r| r.auc_lower_asymptotic),
            auc_upper_asymptotic: avg(|r| r.auc_upper_asymptotic),
        }
    }

    pub fn to_csv_line(&self) -> String {
        let vals = [
            self.kl,
            self.reverse_kl,
            self.jeffreys,
            self.auc,
            self.one_minus_auc,
            self.log10_one_minus_auc,
            self.auc_lower,
            self.auc_upper,
            self.one_minus_lower,
            self.one_minus_upper,
            self.auc_lower_asymptotic,
            self.auc_upper_asymptotic,
        ];
        let mut out = format!("{},{}", self.n, self.runs);
        for v in vals {
            let _ = write!(out, ",{v:.17e}");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepParams {
    pub family: SweepFamily,
    pub n_min: usize,
    pub n_max: usize,
    /// Correlation for the Toeplitz families, kernel bandwidth for
    /// kernel-2d.
    pub param: f64,
    pub runs: usize,
    pub seed: u64,
}

fn kernel_run(n: usize, bandwidth: f64, seed: u64, run: usize, cfg: &QuadratureConfig) -> Result<SweepRow> {
    let layout_seed = seed ^ ((n as u64) << 32) ^ run as u64;
    let sigma = kernel_network(&SensorLayout::random(n, bandwidth, layout_seed)?)?;
    let tree = chow_liu_tree(&sigma)?;
    let model = covariance_select(&sigma, tree.edge_set())?;
    SweepRow::single(n, &cam_spectrum(&cam(&sigma, model.base())?)?, cfg)
}

/// One row per `n` in `n_min..=n_max`, in increasing `n`.
pub fn sweep(p: &SweepParams, cfg: &QuadratureConfig) -> Result<Vec<SweepRow>> {
    if p.n_min < 2 || p.n_max < p.n_min {
        return Err(Error::OutOfDomain(format!("invalid range {}..={}", p.n_min, p.n_max)));
    }
    if p.family == SweepFamily::Kernel2d && p.runs == 0 {
        return Err(Error::OutOfDomain("runs must be positive".into()));
    }
    (p.n_min..=p.n_max)
        .into_par_iter()
        .map(|n| match p.family {
            SweepFamily::ToeplitzStar | SweepFamily::ToeplitzChain => {
                let sigma = toeplitz_equicorrelation(n, p.param)?;
                let model = if p.family == SweepFamily::ToeplitzStar {
                    star_model(n, p.param)?
                } else {
                    chain_model(n, p.param)?
                };
                SweepRow::single(n, &cam_spectrum(&cam(&sigma, model.base())?)?, cfg)
            }
            SweepFamily::Kernel2d => {
                let results: Vec<Result<SweepRow>> = (0..p.runs)
                    .into_par_iter()
                    .map(|r| kernel_run(n, p.param, p.seed, r, cfg))
                    .collect();
                let mut rows = Vec::with_capacity(p.runs);
                for r in results {
                    match r {
                        Ok(row) => rows.push(row),
                        // Near-coincident sensors make the kernel matrix
                        // numerically singular; such layouts are dropped and
                        // the count is reported in `runs`.
                        Err(Error::NotPositiveDefinite { .. }) => {}
                        Err(e) => return Err(e),
                    }
                }
                if rows.is_empty() {
                    return Err(Error::OutOfDomain(format!("every layout failed for n = {n}")));
                }
                Ok(SweepRow::mean(n, &rows))
            }
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for r in rows {
        out.push_str(&r.to_csv_line());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub a: f64,
    pub auc: f64,
    pub d: f64,
    /// `1 − e^{−d−1}`.
    pub asymptote: f64,
}

pub fn feasible_region(grid: &[f64]) -> Result<Vec<BoundaryPoint>> {
    grid.iter()
        .map(|&a| {
            let (auc, d) = feasible_region_curve(a)?;
            Ok(BoundaryPoint {
                a,
                auc,
                d,
                asymptote: asymptotic_upper(d),
            })
        })
        .collect()
}

pub fn feasible_region_csv(points: &[BoundaryPoint]) -> String {
    let mut out = String::from("a,auc,d,asymptote\n");
    for p in points {
        let _ = writeln!(out, "{:.17e},{:.17e},{:.17e},{:.17e}", p.a, p.auc, p.d, p.asymptote);
    }
    out
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || count == 0 {
        return Err(Error::OutOfDomain(format!("invalid grid {lo}:{hi}:{count}")));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let (l0, l1) = (lo.ln(), hi.ln());
    Ok((0..count)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (count - 1) as f64).exp())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::{four_node_sigma, four_node_tree};

    #[test]
    fn four_node_report() {
        let r = analyze(&four_node_sigma(), four_node_tree().edge_set(), &QuadratureConfig::default()).unwrap();
        assert!((r.cam_trace - 4.0).abs() < 1e-8);
        assert!((r.jeffreys - (r.kl + r.reverse_kl)).abs() < 1e-12);
        assert!(r.auc_lower <= r.auc + 1e-7 && r.auc <= r.auc_upper + 1e-7);
        let json = serde_json::to_value(&r).unwrap();
        assert!(json.get("mc_auc").is_none());
    }

    #[test]
    fn identity_report() {
        let sigma = CorrelationMatrix::identity(5);
        let tree = crate::graph::TreeStructure::path(5).unwrap();
        let r = analyze(&sigma, tree.edge_set(), &QuadratureConfig::default()).unwrap();
        assert_eq!(r.auc, 0.5);
        assert_eq!(r.kl, 0.0);
    }

    #[test]
    fn feasible_rows() {
        let pts = feasible_region(&log_grid(1e-6, 100.0, 50).unwrap()).unwrap();
        assert!((pts[0].auc - 0.5).abs() < 1e-6 && pts[0].d < 1e-10);
        for w in pts.windows(2) {
            assert!(w[1].auc > w[0].auc && w[1].d > w[0].d);
        }
        assert!(log_grid(0.0, 1.0, 3).is_err());
    }

    #[test]
    fn family_parsing() {
        assert_eq!("kernel-2d".parse::<SweepFamily>().unwrap(), SweepFamily::Kernel2d);
        assert!("grid".parse::<SweepFamily>().is_err());
    }
}
