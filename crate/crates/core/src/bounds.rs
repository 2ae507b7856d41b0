//! Analytical bounds on the AUC: the Chernoff lower bound, the parametric
//! upper bound from the (AUC, KL) feasible region, and their asymptotic
//! forms.

use serde::Serialize;

use crate::divergence::DivergenceSet;
use crate::error::{Error, Result};
use crate::matrix::CamSpectrum;

/// Below this parameter the boundary curve is evaluated from its Taylor
/// series; above it the closed forms no longer cancel badly.
const SERIES_CUTOFF: f64 = 0.5;
/// `AUC(a) − ½ = a·Σ c_k a^{2k}`.
const AUC_SERIES: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
    43867.0 / 5109094217170944000.0,
    -174611.0 / 802857662698291200000.0,
];
/// `D(a) = a²·Σ d_k a^{2k}`.
const KL_SERIES: [f64; 10] = [
    1.0 / 24.0,
    -1.0 / 960.0,
    1.0 / 36288.0,
    -1.0 / 1382400.0,
    1.0 / 53222400.0,
    -691.0 / 1426553856000.0,
    1.0 / 80472268800.0,
    -3617.0 / 11381997699072000.0,
    43867.0 / 5409629171122176000.0,
    -174611.0 / 845113329156096000000.0,
];
const ROOT_TOL: f64 = 1e-10;
const ROOT_MAX_STEPS: usize = 200;
/// Largest `ln a` the root bracket may grow to (`a ≈ 1e304`).
const MAX_LOG_A: f64 = 700.0;

/// MGF of one GAL component, `(1 − αt − αt²)^{−1/2}`, defined where the
/// radicand is positive.
pub fn component_mgf(alpha: f64, t: f64) -> Result<f64> {
    let r = 1.0 - alpha * t - alpha * t * t;
    if !(r > 0.0) {
        return Err(Error::OutOfDomain(format!("MGF undefined at t = {t} for alpha = {alpha}")));
    }
    Ok(r.sqrt().recip())
}

/// `ln Π 2/√(4 + α_i) = −½ Σ ln(1 + α_i/4)`: the Chernoff bound on
/// `Pr(L_Δ ≤ 0)` at the optimum `t = −½`.
pub fn log_chernoff_factor(s: &CamSpectrum) -> f64 {
    -0.5 * s.alphas().iter().map(|&a| (0.25 * a).ln_1p()).sum::<f64>()
}

pub fn chernoff_lower(s: &CamSpectrum) -> f64 {
    (-log_chernoff_factor(s).exp_m1()).max(0.5)
}

/// `1 − exp(−Σ α_i/(8 + α_i))`, without clamping. Never above the
/// unclamped Chernoff bound since `2x/(2+x) < ln(1+x)`.
pub fn asymptotic_lower_unclamped(s: &CamSpectrum) -> f64 {
    let exponent: f64 = s.alphas().iter().map(|&a| a / (8.0 + a)).sum();
    -(-exponent).exp_m1()
}

pub fn asymptotic_lower(s: &CamSpectrum) -> f64 {
    asymptotic_lower_unclamped(s).max(0.5)
}

/// Boundary of the feasible (AUC, KL) region at parameter `a > 0`:
/// `AUC = 1/(1 − e^{−a}) − 1/a`, `D = ln a + a/(e^a − 1) − 1 − ln(1 − e^{−a})`.
pub fn feasible_region_curve(a: f64) -> Result<(f64, f64)> {
    if !(a > 0.0) || a.is_nan() {
        return Err(Error::OutOfDomain(format!("feasible-region parameter a = {a} must be > 0")));
    }
    Ok((boundary_auc(a), boundary_kl(a)))
}

fn even_series(coeffs: &[f64], a: f64) -> f64 {
    let a2 = a * a;
    coeffs.iter().rev().fold(0.0, |acc, c| acc * a2 + c)
}

fn boundary_auc(a: f64) -> f64 {
    if a < SERIES_CUTOFF {
        0.5 + a * even_series(&AUC_SERIES, a)
    } else if a > 40.0 {
        // 1/(1 − e^{−a}) rounds to one here.
        1.0 - boundary_one_minus_auc(a)
    } else {
        -1.0 / (-a).exp_m1() - 1.0 / a
    }
}

/// `1 − AUC(a) = 1/a − 1/(e^a − 1)`, accurate for large `a`.
fn boundary_one_minus_auc(a: f64) -> f64 {
    if a < SERIES_CUTOFF {
        0.5 - a * even_series(&AUC_SERIES, a)
    } else {
        1.0 / a - 1.0 / a.exp_m1()
    }
}

fn boundary_kl(a: f64) -> f64 {
    if a < SERIES_CUTOFF {
        a * a * even_series(&KL_SERIES, a)
    } else {
        // a/(e^a − 1) vanishes and ln(1 − e^{−a}) = ln1p(−e^{−a}) for large a.
        a.ln() + a / a.exp_m1() - 1.0 - (-(-a).exp()).ln_1p()
    }
}

/// Solves `D(a) = d_star` by bisection on `ln a` and returns
/// `(AUC(a), a)`. `d_star = 0` gives `(½, 0)`.
pub fn kl_upper_bound(d_star: f64) -> Result<(f64, f64)> {
    let a = kl_upper_parameter(d_star)?;
    if a == 0.0 {
        return Ok((0.5, 0.0));
    }
    Ok((boundary_auc(a), a))
}

fn kl_upper_parameter(d_star: f64) -> Result<f64> {
    if !(d_star >= 0.0) || !d_star.is_finite() {
        return Err(Error::OutOfDomain(format!("d_star = {d_star} must be finite and >= 0")));
    }
    if d_star == 0.0 {
        return Ok(0.0);
    }
    // D(a) ~ a²/24 near zero and ~ ln a − 1 for large a.
    let mut lo = (24.0 * d_star).sqrt().min(1.0).ln() - 1.0;
    while boundary_kl(lo.exp()) > d_star {
        lo -= 2.0;
        if lo < -700.0 {
            return Err(Error::RootNotBracketed { target: d_star });
        }
    }
    let mut hi = (d_star + 2.0).max(1.0);
    while boundary_kl(hi.exp()) < d_star {
        hi += 2.0;
        if hi > MAX_LOG_A {
            return Err(Error::RootNotBracketed { target: d_star });
        }
    }
    for _ in 0..ROOT_MAX_STEPS {
        let mid = 0.5 * (lo + hi);
        let d = boundary_kl(mid.exp());
        if (d - d_star).abs() <= ROOT_TOL * d_star.clamp(1e-300, 1.0) || hi - lo < 1e-15 {
            return Ok(mid.exp());
        }
        if d < d_star {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// `1 − e^{−d* − 1}`.
pub fn asymptotic_upper(d_star: f64) -> f64 {
    -(-d_star - 1.0).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub lower: f64,
    pub upper: f64,
    pub lower_asymptotic: f64,
    pub upper_asymptotic: f64,
    /// `min(KL, reverse KL)`, nats.
    pub d_star: f64,
    pub a_param: f64,
    /// `1 − lower`, computed without cancellation.
    pub one_minus_lower: f64,
    /// `1 − upper`, computed without cancellation.
    pub one_minus_upper: f64,
}

pub fn bound_report(s: &CamSpectrum, d: &DivergenceSet) -> Result<BoundReport> {
    let d_star = d.kl.min(d.reverse_kl).max(0.0);
    let a = kl_upper_parameter(d_star)?;
    let (parametric, one_minus_parametric) = if a == 0.0 {
        (0.5, 0.5)
    } else {
        (boundary_auc(a), boundary_one_minus_auc(a))
    };
    let upper_asymptotic = asymptotic_upper(d_star);
    let (upper, one_minus_upper) = if parametric <= upper_asymptotic {
        (parametric, one_minus_parametric)
    } else {
        (upper_asymptotic, (-d_star - 1.0).exp())
    };

    let lower_asymptotic = asymptotic_lower(s);
    let chernoff_complement = log_chernoff_factor(s).exp().min(0.5);
    let lower = chernoff_lower(s).max(lower_asymptotic);
    Ok(BoundReport {
        lower,
        upper,
        lower_asymptotic,
        upper_asymptotic,
        d_star,
        a_param: a,
        one_minus_lower: chernoff_complement.min(1.0 - lower_asymptotic),
        one_minus_upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::divergences_from_spectrum;

    #[test]
    fn chernoff_examples() {
        let zero = CamSpectrum::from_alphas(&[0.0, 0.0]).unwrap();
        assert_eq!(chernoff_lower(&zero), 0.5);
        let one = CamSpectrum::from_alphas(&[12.0]).unwrap();
        assert!((chernoff_lower(&one) - 0.5).abs() < 1e-12);
        let two = CamSpectrum::from_alphas(&[12.0, 12.0]).unwrap();
        assert!((chernoff_lower(&two) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn mgf_at_chernoff_optimum() {
        for a in [0.0, 0.3, 2.0, 12.0, 150.0] {
            let m = component_mgf(a, -0.5).unwrap();
            assert!((m - 2.0 / (4.0 + a).sqrt()).abs() < 1e-12);
            assert!((m - (1.0 + a / 4.0).sqrt().recip()).abs() < 1e-12);
        }
        assert!(component_mgf(4.0, 1.0).is_err());
    }

    #[test]
    fn asymptotic_lower_examples() {
        let zero = CamSpectrum::from_alphas(&[0.0]).unwrap();
        assert_eq!(asymptotic_lower_unclamped(&zero), 0.0);
        assert_eq!(asymptotic_lower(&zero), 0.5);

        let eight = CamSpectrum::from_alphas(&[8.0]).unwrap();
        let raw = asymptotic_lower_unclamped(&eight);
        assert!((raw - (1.0 - (-0.5f64).exp())).abs() < 1e-12);
        assert!((raw - 0.3935).abs() < 1e-4);
        let chernoff_raw = 1.0 - 2.0 / 12f64.sqrt();
        assert!((chernoff_raw - 0.4226).abs() < 1e-4);
        assert!(raw < chernoff_raw);
        assert_eq!(asymptotic_lower(&eight), 0.5);
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn feasible_curve_limits() {
        assert!(feasible_region_curve(0.0).is_err());
        assert!(feasible_region_curve(-1.0).is_err());
        let (auc, d) = feasible_region_curve(1e-9).unwrap();
        assert!((auc - 0.5).abs() < 1e-9 && d < 1e-15);
        let (auc, _) = feasible_region_curve(700.0).unwrap();
        assert!((auc - (1.0 - 1.0 / 700.0)).abs() < 1e-3);
        // High-precision references on both sides of the series cutoff.
        let refs = [
            (0.4999999, 0.541_494_074_306_607_17, 0.010_351_986_160_547_257),
            (0.5000001, 0.541_494_090_766_989_36, 0.010_351_994_390_738_352),
            (1e-3, 0.500_083_333_331_944_44, 4.166_666_562_500_003e-8),
            (2.0, 0.656_517_642_749_665_65, 0.151_595_923_928_135_67),
            (45.0, 0.977_777_777_777_777_78, 2.806_662_489_770_319_8),
        ];
        for (a, auc, d) in refs {
            let (got_auc, got_d) = feasible_region_curve(a).unwrap();
            assert!((got_auc - auc).abs() < 1e-15, "AUC({a})");
            assert!((got_d - d).abs() < 1e-13 * d, "D({a})");
        }
    }

    #[test]
    fn feasible_curve_is_increasing() {
        let mut prev = feasible_region_curve(1e-3).unwrap();
        for k in 1..=2000 {
            let a = 1e-3 * (1e5f64).powf(k as f64 / 2000.0);
            let cur = feasible_region_curve(a).unwrap();
            assert!(cur.0 > prev.0 && cur.1 > prev.1, "a = {a}");
            prev = cur;
        }
    }

    #[test]
    fn upper_bound_inverts_curve() {
        assert_eq!(kl_upper_bound(0.0).unwrap(), (0.5, 0.0));
        let (auc0, d0) = feasible_region_curve(3.0).unwrap();
        let (auc, a) = kl_upper_bound(d0).unwrap();
        assert!((a - 3.0).abs() < 1e-8, "{a}");
        assert!((auc - auc0).abs() < 1e-9);
        for d in [1e-8, 1e-3, 0.1, 1.0, 5.0, 30.0, 200.0] {
            let (u, _) = kl_upper_bound(d).unwrap();
            assert!(u <= asymptotic_upper(d) + 1e-9, "d = {d}");
            assert!(u >= 0.5);
        }
        assert!(kl_upper_bound(-1.0).is_err());
    }

    #[test]
    fn report_for_identity_model() {
        let s = CamSpectrum::from_eigenvalues(vec![1.0; 4]).unwrap();
        let r = bound_report(&s, &divergences_from_spectrum(&s)).unwrap();
        assert_eq!(r.lower, 0.5);
        assert_eq!(r.upper, 0.5);
        assert_eq!(r.d_star, 0.0);
    }

    #[test]
    fn report_orders_fields() {
        let s = CamSpectrum::from_eigenvalues(vec![3.2, 1.4, 0.8, 0.3]).unwrap();
        let r = bound_report(&s, &divergences_from_spectrum(&s)).unwrap();
        assert!(0.5 <= r.lower && r.lower <= r.upper && r.upper <= 1.0);
        assert!(r.lower_asymptotic <= r.lower);
        assert!(r.upper <= r.upper_asymptotic);
        assert!((r.one_minus_lower - (1.0 - r.lower)).abs() < 1e-12);
        assert!((r.one_minus_upper - (1.0 - r.upper)).abs() < 1e-12);
    }
}
