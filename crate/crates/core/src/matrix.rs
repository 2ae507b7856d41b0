//! Validated correlation matrices and the correlation approximation matrix
//! (CAM) `Δ = Σ_X Σ_M⁻¹`.
//!
//! The CAM is not symmetric, but it is similar to the SPD matrix
//! `Σ_X^{1/2} Σ_M⁻¹ Σ_X^{1/2}`, so its spectrum is real and positive and is
//! computed from that symmetric form.

use nalgebra::{Cholesky, DMatrix, Dyn, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};

/// Entries closer than this to symmetric/unit are accepted as-is.
pub const EXACT_TOL: f64 = 1e-12;
/// Skew up to this size is removed by symmetrising; larger skew is rejected.
pub const SYMMETRIZE_TOL: f64 = 1e-9;
/// Smallest eigenvalue must exceed this fraction of the largest.
pub const DEGENERATE_ALPHA: f64 = 1e-20;
pub const PD_RELATIVE_TOL: f64 = 1e-10;

const EIGEN_MAX_ITER: usize = 10_000;

/// A symmetric positive-definite matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    entries: DMatrix<f64>,
}

impl CorrelationMatrix {
    /// Validates `raw` as a correlation matrix. Near-symmetric input (skew at
    /// most [`SYMMETRIZE_TOL`]) is replaced by `(A + Aᵀ)/2`.
    pub fn new(raw: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = raw.shape();
        if rows != cols || rows == 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        let n = rows;
        for j in 0..n {
            for i in 0..n {
                if !raw[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }

        let mut worst = (0, 0, 0.0f64);
        for i in 0..n {
            for j in (i + 1)..n {
                let skew = (raw[(i, j)] - raw[(j, i)]).abs();
                if skew > worst.2 {
                    worst = (i, j, skew);
                }
            }
        }
        let entries = if worst.2 > SYMMETRIZE_TOL {
            return Err(Error::NotSymmetric {
                row: worst.0,
                col: worst.1,
                skew: worst.2,
            });
        } else if worst.2 > EXACT_TOL {
            (&raw + raw.transpose()) * 0.5
        } else {
            raw
        };

        for i in 0..n {
            let d = entries[(i, i)];
            if (d - 1.0).abs() > EXACT_TOL {
                return Err(Error::BadDiagonal { index: i, value: d });
            }
        }

        check_positive_definite(&entries)?;
        Ok(Self { entries })
    }

    /// Builds from row vectors; ragged input is reported as `NotSquare`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Normalises a covariance matrix to correlation form `D^{-1/2} Σ D^{-1/2}`
    /// and validates the result.
    pub fn from_covariance(raw: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = raw.shape();
        if rows != cols || rows == 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        let mut scale = Vec::with_capacity(rows);
        for i in 0..rows {
            let d = raw[(i, i)];
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::BadDiagonal { index: i, value: d });
            }
            scale.push(d.sqrt().recip());
        }
        let mut m = DMatrix::from_fn(rows, rows, |i, j| raw[(i, j)] * scale[i] * scale[j]);
        for i in 0..rows {
            m[(i, i)] = 1.0;
        }
        Self::new(m)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            entries: DMatrix::identity(n, n),
        }
    }

    /// Wraps a matrix the caller has constructed to be a valid correlation
    /// matrix (e.g. the output of covariance selection). Checked in debug
    /// builds only.
    pub(crate) fn from_trusted(entries: DMatrix<f64>) -> Self {
        debug_assert!(entries.is_square());
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.entries[(i, j)]).collect())
            .collect()
    }

    pub fn cholesky(&self) -> Result<Cholesky<f64, Dyn>> {
        Cholesky::new(self.entries.clone()).ok_or(Error::NotPositiveDefinite {
            min: f64::NAN,
            max: f64::NAN,
        })
    }

    pub fn log_det(&self) -> Result<f64> {
        let chol = self.cholesky()?;
        Ok(2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>())
    }
}

fn symmetric_eigen(m: &DMatrix<f64>) -> Result<SymmetricEigen<f64, Dyn>> {
    m.clone()
        .try_symmetric_eigen(f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::EigenFailure("symmetric QR iteration did not converge".into()))
}

fn check_positive_definite(m: &DMatrix<f64>) -> Result<()> {
    let eig = symmetric_eigen(m)?;
    let min = eig.eigenvalues.min();
    let max = eig.eigenvalues.max();
    if !(max > 0.0 && min > PD_RELATIVE_TOL * max) {
        return Err(Error::NotPositiveDefinite { min, max });
    }
    Ok(())
}

/// Symmetric square root `S` with `S·S = m`.
pub fn spd_sqrt(m: &CorrelationMatrix) -> Result<DMatrix<f64>> {
    let eig = symmetric_eigen(m.as_matrix())?;
    let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    let v = &eig.eigenvectors;
    let s = v * DMatrix::from_diagonal(&roots) * v.transpose();
    Ok((&s + s.transpose()) * 0.5)
}

/// `Δ = Σ_X Σ_M⁻¹` together with the two matrices it was built from.
#[derive(Debug, Clone)]
pub struct CamMatrix {
    entries: DMatrix<f64>,
    sigma: CorrelationMatrix,
    model: CorrelationMatrix,
}

impl CamMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    pub fn sigma(&self) -> &CorrelationMatrix {
        &self.sigma
    }

    pub fn model(&self) -> &CorrelationMatrix {
        &self.model
    }
}

/// Builds the CAM from a Cholesky factorisation of the model; no inverse is
/// formed.
pub fn cam(sigma: &CorrelationMatrix, model: &CorrelationMatrix) -> Result<CamMatrix> {
    if sigma.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: sigma.dim(),
            found: model.dim(),
        });
    }
    let chol = model.cholesky()?;
    // Σ_M⁻¹ Σ_X = (Σ_X Σ_M⁻¹)ᵀ since both factors are symmetric.
    let entries = chol.solve(sigma.as_matrix()).transpose();
    Ok(CamMatrix {
        entries,
        sigma: sigma.clone(),
        model: model.clone(),
    })
}

/// Eigenvalues of the CAM and the derived dissimilarity parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CamSpectrum {
    lambdas: Vec<f64>,
    alphas: Vec<f64>,
    logdet: f64,
    trace: f64,
}

/// `λ + 1/λ − 2`, written as `(λ − 1)²/λ` to keep precision near λ = 1.
pub fn dissimilarity(lambda: f64) -> f64 {
    let d = lambda - 1.0;
    d * d / lambda
}

impl CamSpectrum {
    /// Builds a spectrum directly from CAM eigenvalues (any order).
    pub fn from_eigenvalues(mut lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::OutOfDomain("spectrum must be non-empty".into()));
        }
        if let Some(&bad) = lambdas.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::NonPositiveEigenvalue { value: bad });
        }
        lambdas.sort_by(|a, b| b.total_cmp(a));
        let alphas = lambdas.iter().map(|&l| dissimilarity(l)).collect();
        let logdet = lambdas.iter().map(|l| l.ln()).sum();
        let trace = lambdas.iter().sum();
        Ok(Self {
            lambdas,
            alphas,
            logdet,
            trace,
        })
    }

    /// Builds a spectrum realising the given dissimilarities, taking the
    /// root `λ ≥ 1` of `λ + 1/λ − 2 = α` for each. Divergences depend on that
    /// choice; AUC and its lower bound do not.
    pub fn from_alphas(alphas: &[f64]) -> Result<Self> {
        let mut lambdas = Vec::with_capacity(alphas.len());
        for &a in alphas {
            if !(a.is_finite() && a >= 0.0) {
                return Err(Error::OutOfDomain(format!("dissimilarity {a} must be >= 0")));
            }
            lambdas.push(1.0 + 0.5 * a + (a + 0.25 * a * a).sqrt());
        }
        Self::from_eigenvalues(lambdas)
    }

    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    /// Eigenvalues in descending order.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Dissimilarity parameters, in the same order as [`Self::lambdas`].
    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn logdet(&self) -> f64 {
        self.logdet
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn alpha_sum(&self) -> f64 {
        self.alphas.iter().sum()
    }

    /// True when every dissimilarity is zero to working precision, i.e. the
    /// model reproduces Σ_X. `α ≤ 1e-20` means `|λ − 1| ≲ 1e-10`, below
    /// the accuracy of the eigenvalues themselves.
    pub fn is_degenerate(&self) -> bool {
        self.alphas.iter().all(|&a| a <= DEGENERATE_ALPHA)
    }
}

/// Spectrum of the CAM, computed from `Σ_X^{1/2} Σ_M⁻¹ Σ_X^{1/2}`.
pub fn cam_spectrum(delta: &CamMatrix) -> Result<CamSpectrum> {
    let root = spd_sqrt(&delta.sigma)?;
    let chol = delta.model.cholesky()?;
    let inner = chol.solve(&root);
    let sym = &root * inner;
    let sym = (&sym + sym.transpose()) * 0.5;
    let eig = symmetric_eigen(&sym)?;
    let lambdas: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    CamSpectrum::from_eigenvalues(lambdas)
}
