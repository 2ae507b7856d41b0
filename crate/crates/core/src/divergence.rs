//! Gaussian divergences expressed through the CAM spectrum, plus the
//! closed forms for tree approximations of an equicorrelated matrix.
//! Everything is in nats.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::CamSpectrum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergenceSet {
    /// `D(f_X ‖ f_M)`
    pub kl: f64,
    /// `D(f_M ‖ f_X)`
    pub reverse_kl: f64,
    pub jeffreys: f64,
}

/// `kl = ½(tr Δ − n − ln|Δ|)`, `reverse = ½(Σ 1/λ − n + ln|Δ|)`,
/// `jeffreys = ½ Σ α`.
///
/// Each term is accumulated per eigenvalue as `λ − 1 − ln λ`, which is
/// non-negative and avoids cancelling `tr Δ` against `n`.
pub fn divergences_from_spectrum(s: &CamSpectrum) -> DivergenceSet {
    let mut kl = 0.0;
    let mut reverse_kl = 0.0;
    for &l in s.lambdas() {
        let ln = l.ln();
        // Both terms are non-negative; clamp rounding noise at λ ≈ 1.
        kl += ((l - 1.0) - ln).max(0.0);
        reverse_kl += ((1.0 / l - 1.0) + ln).max(0.0);
    }
    DivergenceSet {
        kl: 0.5 * kl,
        reverse_kl: 0.5 * reverse_kl,
        jeffreys: 0.5 * s.alpha_sum(),
    }
}

fn check_equicorrelation(n: usize, rho: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::OutOfDomain(format!("n = {n}, need n >= 2")));
    }
    let lower = -1.0 / (n as f64 - 1.0);
    if !(rho.abs() < 1.0 && rho > lower) {
        return Err(Error::OutOfDomain(format!(
            "rho = {rho} outside ({lower}, 1) for n = {n}"
        )));
    }
    Ok(())
}

/// `(kl, jeffreys)` for the star tree approximation of the `n × n`
/// equicorrelation matrix with correlation `rho`.
pub fn star_closed_form(n: usize, rho: f64) -> Result<(f64, f64)> {
    check_equicorrelation(n, rho)?;
    let m = n as f64 - 1.0;
    let kl = 0.5 * m * rho.ln_1p() - 0.5 * (m * rho).ln_1p();
    let jeffreys = m * (m - 1.0) * rho * rho / (2.0 * (1.0 + m * rho));
    Ok((kl, jeffreys))
}

/// `(kl, jeffreys)` for the chain (path) approximation. The KL divergence
/// equals the star's; the Jeffreys divergence grows like `(n/2)·ρ/(1−ρ)`.
pub fn chain_closed_form(n: usize, rho: f64) -> Result<(f64, f64)> {
    check_equicorrelation(n, rho)?;
    let (kl, _) = star_closed_form(n, rho)?;
    let nf = n as f64;
    let one_minus = 1.0 - rho;
    let rn = rho.powi(n as i32);
    let bracket = nf * (nf - 1.0) / 2.0 - nf * (1.0 - rn) / one_minus
        + (1.0 - (nf + 1.0) * rn + nf * rn * rho) / (one_minus * one_minus);
    let jeffreys = rho * rho / ((1.0 + (nf - 1.0) * rho) * one_minus) * bracket;
    Ok((kl, jeffreys))
}
