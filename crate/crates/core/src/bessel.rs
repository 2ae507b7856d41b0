//! Modified Bessel function of the second kind, order zero.
//!
//! Two regimes: the power series with logarithmic term for `x ≤ 2`, and for
//! `x > 2` the exponentially scaled form `√(π/2x)·e^{−x}/s` where `s` comes
//! from Steed's evaluation of the Temme continued fraction.

use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 2.0;
const MAX_TERMS: usize = 10_000;

/// `K₀(x)` for `x > 0`. Returns `+∞` at zero and NaN for negative input.
pub fn k0(x: f64) -> f64 {
    if x.is_nan() || x < 0.0 {
        return f64::NAN;
    }
    if x == 0.0 {
        return f64::INFINITY;
    }
    if x <= SERIES_LIMIT {
        k0_series(x)
    } else {
        k0_scaled_cf(x) * (-x).exp()
    }
}

/// `e^x K₀(x)`, finite for all `x > 0` (no underflow for large `x`).
pub fn k0_scaled(x: f64) -> f64 {
    if x.is_nan() || x < 0.0 {
        return f64::NAN;
    }
    if x == 0.0 {
        return f64::INFINITY;
    }
    if x <= SERIES_LIMIT {
        k0_series(x) * x.exp()
    } else {
        k0_scaled_cf(x)
    }
}

fn k0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut i0 = 1.0;
    let mut tail = 0.0;
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        term *= q / (kf * kf);
        harmonic += 1.0 / kf;
        i0 += term;
        tail += term * harmonic;
        if term < f64::EPSILON * 1e-3 * i0 {
            break;
        }
    }
    -((0.5 * x).ln() + EULER_GAMMA) * i0 + tail
}

fn k0_scaled_cf(x: f64) -> f64 {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..MAX_TERMS {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < f64::EPSILON {
            break;
        }
    }
    (PI / (2.0 * x)).sqrt() / s
}

#[cfg(test)]
mod tests {
    use super::*;

    // High-precision reference values of K₀ and e^x K₀.
    const REFERENCE: [(f64, f64, f64); 12] = [
        (1e-8, 18.536612259610777, 18.536612444976903),
        (0.1, 2.4270690247020164, 2.6823261022628944),
        (0.5, 0.9244190712276659, 1.5241093857739094),
        (1.0, 0.42102443824070834, 1.144463079806895),
        (1.9999, 0.11390786025689362, 0.8415874065986029),
        (2.0, 0.11389387274953344, 0.8415682150707714),
        (2.0001, 0.11387988708044136, 0.8415490248721516),
        (3.0, 0.03473950438627925, 0.6977615980438517),
        (5.0, 0.0036910983340425942, 0.547807564313519),
        (10.0, 1.778006231616765e-05, 0.39163193443659866),
        (50.0, 3.4101677497894956e-23, 0.17680715585742934),
        (700.0, 4.669776431685377e-306, 0.04736236945461357),
    ];

    #[test]
    fn matches_reference_values() {
        for (x, k, ks) in REFERENCE {
            let rel = (k0(x) - k).abs() / k;
            assert!(rel < 1e-13, "K0({x}) relative error {rel:e}");
            let rel = (k0_scaled(x) - ks).abs() / ks;
            assert!(rel < 1e-13, "scaled K0({x}) relative error {rel:e}");
        }
    }

    #[test]
    fn special_inputs() {
        assert_eq!(k0(0.0), f64::INFINITY);
        assert!(k0(-1.0).is_nan());
        assert_eq!(k0(800.0), 0.0);
        assert!(k0_scaled(800.0) > 0.0);
    }
}
