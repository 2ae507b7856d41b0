//! Reference matrix families and CSV ingestion.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{ModelCovariance, TreeStructure};
use crate::matrix::CorrelationMatrix;

fn check_equicorrelation(n: usize, rho: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::OutOfDomain(format!("n = {n}, need n >= 2")));
    }
    let lower = -1.0 / (n as f64 - 1.0);
    if !(rho.abs() < 1.0 && rho > lower) {
        return Err(Error::OutOfDomain(format!("rho = {rho} outside ({lower}, 1) for n = {n}")));
    }
    Ok(())
}

/// Ones on the diagonal and `rho` everywhere else.
pub fn toeplitz_equicorrelation(n: usize, rho: f64) -> Result<CorrelationMatrix> {
    check_equicorrelation(n, rho)?;
    let m = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { rho });
    Ok(CorrelationMatrix::from_trusted(m))
}

/// Star tree at vertex 0 on the equicorrelation matrix: hub entries `ρ`,
/// leaf–leaf entries `ρ²`.
pub fn star_model(n: usize, rho: f64) -> Result<ModelCovariance> {
    check_equicorrelation(n, rho)?;
    let m = DMatrix::from_fn(n, n, |i, j| match (i, j) {
        _ if i == j => 1.0,
        (0, _) | (_, 0) => rho,
        _ => rho * rho,
    });
    let tree = TreeStructure::star(n, 0)?;
    Ok(ModelCovariance::from_parts(CorrelationMatrix::from_trusted(m), tree.into()))
}

/// Path `0 − 1 − … − (n−1)` on the equicorrelation matrix: entry `ρ^{|i−j|}`.
pub fn chain_model(n: usize, rho: f64) -> Result<ModelCovariance> {
    check_equicorrelation(n, rho)?;
    let m = DMatrix::from_fn(n, n, |i, j| rho.powi(i.abs_diff(j) as i32));
    let tree = TreeStructure::path(n)?;
    Ok(ModelCovariance::from_parts(CorrelationMatrix::from_trusted(m), tree.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensorLayout {
    coords: Vec<[f64; 2]>,
    sigma_kernel: f64,
}

impl SensorLayout {
    pub fn new(coords: Vec<[f64; 2]>, sigma_kernel: f64) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::OutOfDomain(format!("need at least 2 sensors, got {}", coords.len())));
        }
        if !(sigma_kernel.is_finite() && sigma_kernel > 0.0) {
            return Err(Error::OutOfDomain(format!("kernel bandwidth {sigma_kernel} must be positive")));
        }
        if let Some(i) = coords.iter().position(|c| !(c[0].is_finite() && c[1].is_finite())) {
            return Err(Error::NonFinite { row: i, col: 0 });
        }
        Ok(Self { coords, sigma_kernel })
    }

    /// `n` sensors with both coordinates drawn from a standard normal.
    pub fn random(n: usize, sigma_kernel: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coords = (0..n)
            .map(|_| [StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)])
            .collect();
        Self::new(coords, sigma_kernel)
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn sigma_kernel(&self) -> f64 {
        self.sigma_kernel
    }

    /// Reads one `x,y` line per sensor.
    pub fn load_csv(path: &Path, sigma_kernel: f64) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let rows = parse_rows(&text)?;
        let mut coords = Vec::with_capacity(rows.len());
        for (line, row) in rows {
            let [x, y] = row[..] else {
                return Err(Error::Parse {
                    line,
                    message: format!("expected `x,y`, found {} fields", row.len()),
                });
            };
            coords.push([x, y]);
        }
        Self::new(coords, sigma_kernel)
    }
}

/// Gaussian-kernel Gram matrix `exp(−d²/2σ²)`.
pub fn kernel_network(layout: &SensorLayout) -> Result<CorrelationMatrix> {
    let c = layout.coords();
    let two_s2 = 2.0 * layout.sigma_kernel * layout.sigma_kernel;
    let m = DMatrix::from_fn(c.len(), c.len(), |i, j| {
        if i == j {
            1.0
        } else {
            let (dx, dy) = (c[i][0] - c[j][0], c[i][1] - c[j][1]);
            (-(dx * dx + dy * dy) / two_s2).exp()
        }
    });
    CorrelationMatrix::new(m)
}

/// Non-empty, non-comment lines parsed as comma-separated reals, tagged
/// with their 1-based line numbers.
fn parse_rows(text: &str) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                f.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: idx + 1,
                    message: format!("bad number `{}`: {e}", f.trim()),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push((idx + 1, row));
    }
    Ok(rows)
}

/// Parses an `n × n` matrix. With `normalize`, a covariance is rescaled to
/// correlation form first.
pub fn parse_matrix_csv(text: &str, normalize: bool) -> Result<CorrelationMatrix> {
    let rows = parse_rows(text)?;
    let n = rows.len();
    if n == 0 {
        return Err(Error::Parse {
            line: 0,
            message: "no matrix rows".into(),
        });
    }
    for (line, row) in &rows {
        if row.len() != n {
            return Err(Error::Parse {
                line: *line,
                message: format!("expected {n} columns, found {}", row.len()),
            });
        }
    }
    let m = DMatrix::from_fn(n, n, |i, j| rows[i].1[j]);
    if normalize {
        CorrelationMatrix::from_covariance(m)
    } else {
        CorrelationMatrix::new(m)
    }
}

pub fn load_matrix_csv(path: &Path, normalize: bool) -> Result<CorrelationMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix_csv(&text, normalize)
}

/// 17 significant digits per entry, so loading reproduces the bits.
pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{:.16e}", m[(i, j)]);
        }
        out.push('\n');
    }
    out
}

pub fn write_matrix_csv(path: &Path, m: &CorrelationMatrix) -> Result<()> {
    fs::write(path, matrix_to_csv(m.as_matrix())).map_err(|e| Error::io(path, e))
}
