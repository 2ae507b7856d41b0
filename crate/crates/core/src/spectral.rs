//! Exact AUC and CDF of the difference LLRT statistic `L_Δ` by inverting its
//! Laplace transform along a vertical line in the complex plane.
//!
//! `L_Δ = ½ Σ_i [(λ_i − 1) W_i² − (1 − λ_i⁻¹) Z_i²]`, so for `s` on the line
//! `Re s = β/2`,
//!
//! ```text
//! F(l) = (1/2π) ∫ e^{s l} / (2s) · Π_μ (1 + s(μ − 1))^{−1/2} dω,   s = (β + jω)/2
//! ```
//!
//! with `μ` ranging over every `λ_i` and `λ_i⁻¹`. Pairing the two factors of
//! one eigenvalue gives `1 + α s(1 − s)`, so the result depends on the
//! dissimilarities `α_i` only. On `β = 2` this is the `ν`-form with factors
//! `1 + αν² − jαν`; on `β = 1` every factor is the positive real
//! `1 + α/4 + αt²` and the AUC integrand has no cancellation at all.
//! Any valid contour gives the same value; contours with `β < 0` pick up the
//! residue at `s = 0` and yield `F(l) − 1`.

use std::cell::Cell;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::CamSpectrum;
use crate::quadrature::{integrate, Estimate, QuadratureConfig};

/// `Π_i (1 + α_i ν² − j α_i ν)^{−1/2}`, taking each factor's principal root.
/// Every factor has real part at least one, so no root crosses the branch cut
/// and the product is continuous in `ν`.
pub fn principal_sqrt_product(nu: f64, alphas: &[f64]) -> Complex64 {
    let mut out = Complex64::new(1.0, 0.0);
    for &a in alphas {
        if a == 0.0 {
            continue;
        }
        let f = Complex64::new(1.0 + a * nu * nu, -a * nu);
        out /= f.sqrt();
    }
    out
}

/// Smallest `T` with `∫_T^∞ c·t^{-(p_k + 1)} dt < target`, where the bound
/// keeps the `k` largest `weights` (`c = lead · Π_{≤k} w^{-1/2}`,
/// `p_k = base + k·step`), minimised over `k`.
fn truncation_point(weights: &[f64], lead: f64, base: f64, step: f64, target: f64) -> f64 {
    let mut sorted: Vec<f64> = weights.iter().copied().filter(|&w| w > 0.0).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut best = f64::INFINITY;
    let mut log_c = lead.ln();
    for (k, w) in sorted.iter().enumerate() {
        log_c -= 0.5 * w.ln();
        let p = base + (k + 1) as f64 * step;
        if p <= 0.0 {
            continue;
        }
        // c T^{-p} / p = target  =>  T = (c / (p·target))^{1/p}
        let t = ((log_c - (p * target).ln()) / p).exp();
        best = best.min(t);
    }
    if base > 0.0 {
        best = best.min(((lead.ln() - (base * target).ln()) / base).exp());
    }
    best.max(1.0)
}

/// Integrates `g` over `[0, upper]` through `x = scale·u/(1 − u)`, which
/// spreads a possibly enormous range over the unit interval.
fn integrate_half_line<G: Fn(f64) -> f64>(
    g: G,
    upper: f64,
    scale: f64,
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    let u_max = upper / (upper + scale);
    integrate(
        |u: f64| {
            let w = 1.0 - u;
            g(scale * u / w) * scale / (w * w)
        },
        0.0,
        u_max,
        cfg,
    )
}

/// `1 − AUC = F_{L_Δ}(0)`, evaluated on the contour `β = 1`:
///
/// ```text
/// 1 − AUC = (2/π) ∫_0^∞ Π_i (1 + α_i/4 + α_i t²)^{−1/2} / (1 + 4t²) dt
/// ```
///
/// The integrand is positive and equals the Chernoff factor at `t = 0`, so
/// the result keeps relative accuracy when `1 − AUC` is very small. The
/// absolute tolerance and truncation floor are scaled by that factor.
pub fn one_minus_auc(s: &CamSpectrum, cfg: &QuadratureConfig) -> Result<f64> {
    cfg.validate()?;
    if s.is_degenerate() {
        return Ok(0.5);
    }
    let alphas = s.alphas();
    let log_chernoff: f64 = -0.5 * alphas.iter().map(|&a| (0.25 * a).ln_1p()).sum::<f64>();
    let scale = log_chernoff.exp().min(1.0);
    let log_lead = (2.0 / PI).ln();
    let integrand = |t: f64| {
        let t2 = t * t;
        let mut log_v = log_lead - (4.0 * t2).ln_1p();
        for &a in alphas {
            if a > 0.0 {
                log_v -= 0.5 * (a * (0.25 + t2)).ln_1p();
            }
        }
        log_v.exp()
    };
    // |integrand| ≤ (2/π)/(4t²) · Π_{top k} (α t²)^{-1/2}
    let upper = truncation_point(alphas, 0.5 / PI, 1.0, 1.0, cfg.truncation_floor * scale);
    let local = QuadratureConfig {
        abs_tol: cfg.abs_tol * scale,
        ..*cfg
    };
    let est = integrate_half_line(integrand, upper, 0.5, &local)?;
    Ok(est.value)
}

/// Exact AUC of the LLRT detector for the given CAM spectrum. Exactly ½ when
/// every dissimilarity is zero.
pub fn auc_exact(s: &CamSpectrum, cfg: &QuadratureConfig) -> Result<f64> {
    if s.is_degenerate() {
        return Ok(0.5);
    }
    Ok(1.0 - one_minus_auc(s, cfg)?)
}

/// AUC from the `β = 2` form
/// `1 − (1/π) ∫_0^{ν_max} Re[ Π(1 + α ν² − jαν)^{−1/2} / (1 + jν) ] dν`,
/// truncated where the analytic tail bound drops below the floor. Every
/// factor's real part is checked to be at least one at each node.
pub fn auc_nu_form(s: &CamSpectrum, cfg: &QuadratureConfig) -> Result<f64> {
    cfg.validate()?;
    if s.is_degenerate() {
        return Ok(0.5);
    }
    let alphas = s.alphas();
    let branch_ok = Cell::new(true);
    let integrand = |nu: f64| {
        let mut prod = Complex64::new(1.0, 0.0);
        for &a in alphas {
            if a == 0.0 {
                continue;
            }
            let f = Complex64::new(1.0 + a * nu * nu, -a * nu);
            if f.re < 1.0 {
                branch_ok.set(false);
            }
            prod /= f.sqrt();
        }
        (prod / Complex64::new(1.0, nu)).re / PI
    };
    // |g(ν)| ≤ ν^{-1} Π_{top k} (α ν²)^{-1/2}
    let upper = truncation_point(alphas, 1.0 / PI, 0.0, 1.0, cfg.truncation_floor);
    let est = integrate_half_line(integrand, upper, 1.0, cfg)?;
    if !branch_ok.get() {
        return Err(Error::OutOfDomain("factor left the right half-plane".into()));
    }
    Ok(1.0 - est.value)
}

/// All eigenvalue factors `μ − 1` (for `μ = λ_i` and `μ = λ_i⁻¹`), skipping
/// exact ones.
fn linear_factors(s: &CamSpectrum) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * s.dim());
    for &l in s.lambdas() {
        if l != 1.0 {
            out.push(l - 1.0);
            out.push(1.0 / l - 1.0);
        }
    }
    out
}

/// Open interval of `s = β/2` for which every `1 + s(μ − 1)` stays positive.
fn valid_s_range(factors: &[f64]) -> (f64, f64) {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for &d in factors {
        if d > 0.0 {
            lo = lo.max(-1.0 / d);
        } else if d < 0.0 {
            hi = hi.min(-1.0 / d);
        }
    }
    (lo, hi)
}

/// `ln M(−s) = −½ Σ ln(1 + s(μ − 1))`, real `s`.
fn log_mgf_neg(factors: &[f64], s: f64) -> f64 {
    -0.5 * factors.iter().map(|&d| (s * d).ln_1p()).sum::<f64>()
}

/// Minimises the Chernoff exponent `s·l + ln M(−s)` over the valid side of
/// zero that bounds the smaller tail at `l`.
fn saddle_point(factors: &[f64], l: f64) -> f64 {
    let (lo, hi) = valid_s_range(factors);
    // d/ds [s l + ln M(−s)] = l − ½ Σ (μ−1)/(1 + s(μ−1))
    let slope = |s: f64| l - 0.5 * factors.iter().map(|&d| d / (1.0 + s * d)).sum::<f64>();
    let (mut a, mut b) = if slope(0.0) < 0.0 {
        (0.0, if hi.is_finite() { hi } else { 1e6 })
    } else {
        (if lo.is_finite() { lo } else { -1e6 }, 0.0)
    };
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if slope(mid) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let s = 0.5 * (a + b);
    // Keep clear of the pole at zero and of the edge of the valid strip.
    if s >= 0.0 {
        s.clamp(1e-3f64.min(0.5 * hi), 0.999 * hi)
    } else {
        s.clamp(0.999 * lo, -(1e-3f64.min(-0.5 * lo)))
    }
}

/// Integrates the inversion formula on the line `Re s = beta/2` (any
/// non-zero `beta` in the valid strip). Returns `F(l)` for `beta > 0` and
/// `F(l) − 1` for `beta < 0`.
fn contour_integral(factors: &[f64], l: f64, beta: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let integrand = |omega: f64| {
        let z = Complex64::new(beta, omega);
        let s = 0.5 * z;
        // Log-space accumulation: the modulus can span hundreds of decades.
        let mut log_mag = 0.5 * l * beta - z.norm().ln();
        let mut phase = 0.5 * l * omega - z.arg();
        for &d in factors {
            let f = 1.0 + s * d;
            log_mag -= 0.5 * f.norm().ln();
            phase -= 0.5 * f.arg();
        }
        log_mag.exp() * phase.cos() / PI
    };
    // |1 + s(μ−1)| ≥ |ω (μ−1)| / 2, |z| ≥ ω.
    let weights: Vec<f64> = factors.iter().map(|d| 0.5 * d.abs()).collect();
    let lead = (0.5 * l * beta).exp() / PI;
    let upper = truncation_point(&weights, lead, 0.0, 0.5, cfg.truncation_floor);
    let scale = 2.0 * (1.0 + beta.abs());
    Ok(integrate_half_line(integrand, upper, scale, cfg)?.value)
}

/// Above this integrand scale the caller's contour would lose more than three
/// digits to cancellation; the saddle contour is used instead.
const CONTOUR_SCALE_LIMIT: f64 = 1e3;

/// CDF of the difference LLRT statistic, `F(l) = Pr(L_Δ ≤ l)`.
///
/// `beta > 0` selects the inversion contour and must keep
/// `I + (β/2)(Λ − I)` positive definite (`β = 2` always does). When that
/// contour is numerically ill-conditioned at `l` (integrand scale
/// `e^{lβ/2} M(−β/2)/β` above 10³, which happens far in the upper tail) the
/// integral is taken through the Chernoff saddle point for `l` instead; the
/// value is contour-independent.
pub fn cdf_ldelta(s: &CamSpectrum, l: f64, beta: f64, cfg: &QuadratureConfig) -> Result<f64> {
    cfg.validate()?;
    if !l.is_finite() {
        return Err(Error::OutOfDomain(format!("l = {l} must be finite")));
    }
    let factors = linear_factors(s);
    let (lo, hi) = valid_s_range(&factors);
    let s_beta = 0.5 * beta;
    if !(beta.is_finite() && beta > 0.0 && s_beta > lo && s_beta < hi) {
        return Err(Error::InvalidBeta { beta });
    }
    if factors.is_empty() || s.is_degenerate() {
        // L_Δ ≡ 0.
        return Ok(if l > 0.0 {
            1.0
        } else if l < 0.0 {
            0.0
        } else {
            0.5
        });
    }

    let log_scale = 0.5 * l * beta + log_mgf_neg(&factors, s_beta) - beta.ln();
    let value = if log_scale <= CONTOUR_SCALE_LIMIT.ln() {
        contour_integral(&factors, l, beta, cfg)?
    } else {
        let saddle = saddle_point(&factors, l);
        let v = contour_integral(&factors, l, 2.0 * saddle, cfg)?;
        if saddle < 0.0 {
            1.0 + v
        } else {
            v
        }
    };
    Ok(value.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn sqrt_product_examples() {
        assert_eq!(principal_sqrt_product(0.0, &[1.0, 4.0, 0.2]), Complex64::new(1.0, 0.0));
        let a = [0.3, 4.0, 12.0];
        for nu in [0.1, 1.0, 7.5] {
            let p = principal_sqrt_product(nu, &a);
            let m = principal_sqrt_product(-nu, &a);
            assert!((p - m.conj()).norm() < 1e-15);
        }
        let v = principal_sqrt_product(1.0, &[4.0]);
        assert!((v.norm() - 41f64.powf(-0.25)).abs() < 1e-15);
        let want = Complex64::new(5.0, -4.0).sqrt().inv();
        assert!((v - want).norm() < 1e-15);
    }

    #[test]
    fn degenerate_spectrum_is_one_half() {
        let s = CamSpectrum::from_eigenvalues(vec![1.0; 3]).unwrap();
        assert_eq!(auc_exact(&s, &cfg()).unwrap(), 0.5);
        assert_eq!(cdf_ldelta(&s, 0.0, 2.0, &cfg()).unwrap(), 0.5);
        assert_eq!(cdf_ldelta(&s, 1.0, 2.0, &cfg()).unwrap(), 1.0);
    }

    #[test]
    fn contour_forms_agree() {
        let s = CamSpectrum::from_eigenvalues(vec![1.762, 1.0007, 0.987, 0.2495]).unwrap();
        let a = auc_exact(&s, &cfg()).unwrap();
        let b = auc_nu_form(&s, &cfg()).unwrap();
        let c = 1.0 - cdf_ldelta(&s, 0.0, 2.0, &cfg()).unwrap();
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        assert!((a - c).abs() < 1e-9, "{a} vs {c}");
        assert!(a > 0.5 && a < 1.0);
    }

    #[test]
    fn single_dissimilarity() {
        // m = 1: slowest integrand decay.
        let s = CamSpectrum::from_alphas(&[4.0]).unwrap();
        let a = auc_exact(&s, &cfg()).unwrap();
        let b = auc_nu_form(&s, &cfg()).unwrap();
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }

    #[test]
    fn beta_is_validated() {
        let s = CamSpectrum::from_eigenvalues(vec![4.0, 1.0]).unwrap();
        // λ = 4: need 1 + (β/2)(1/4 − 1) > 0, i.e. β < 8/3.
        assert!(matches!(cdf_ldelta(&s, 0.0, 3.0, &cfg()), Err(Error::InvalidBeta { .. })));
        assert!(matches!(cdf_ldelta(&s, 0.0, 0.0, &cfg()), Err(Error::InvalidBeta { .. })));
        assert!(matches!(cdf_ldelta(&s, 0.0, -1.0, &cfg()), Err(Error::InvalidBeta { .. })));
        assert!(cdf_ldelta(&s, 0.0, 2.5, &cfg()).is_ok());
    }

    #[test]
    fn cdf_far_upper_tail() {
        let s = CamSpectrum::from_eigenvalues(vec![2.5, 0.6, 1.3]).unwrap();
        let l = 1e3 * s.alpha_sum();
        let f = cdf_ldelta(&s, l, 2.0, &cfg()).unwrap();
        assert!(f >= 1.0 - 1e-6, "{f}");
        let f = cdf_ldelta(&s, -l, 2.0, &cfg()).unwrap();
        assert!(f <= 1e-6, "{f}");
    }

    #[test]
    fn truncation_point_meets_target() {
        // c = 1, one weight w: tail ∫_T^∞ w^{-1/2} t^{-2} dt = 1/(√w T).
        let t = truncation_point(&[4.0], 1.0, 0.0, 1.0, 1e-6);
        assert!((1.0 / (2.0 * t) - 1e-6).abs() < 1e-12);
    }
}
