//! Globally adaptive Gauss–Kronrod (10/21-point) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of times any panel may be bisected.
    pub max_halvings: u32,
    /// Bound on the analytically estimated tail beyond the truncation point.
    pub truncation_floor: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_halvings: 60,
            truncation_floor: 1e-14,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !(positive(self.abs_tol) && positive(self.rel_tol) && positive(self.truncation_floor)) {
            return Err(Error::OutOfDomain(format!("quadrature tolerances must be positive: {self:?}")));
        }
        if self.max_halvings < 10 {
            return Err(Error::OutOfDomain(format!(
                "max_halvings = {} but at least 10 are required",
                self.max_halvings
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

/// Panels evaluated before giving up regardless of depth.
const MAX_PANELS: usize = 200_000;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// One 21-point Kronrod panel with the QUADPACK error heuristic.
fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut res_k = f_center * WGK[10];
    let mut res_abs = f_center.abs() * WGK[10];
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    let mut res_g = 0.0;
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();

    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over `[a, b]`, bisecting the panel with the largest error
/// estimate until the total error meets `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            panels: 0,
        });
    }
    let (value, error) = gk21(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel {
        a,
        b,
        value,
        error,
        depth: 0,
    });
    let mut frozen_value = 0.0;
    let mut frozen_error = 0.0;
    let mut total_value = value;
    let mut total_error = error;
    let mut panels = 1;

    loop {
        if !(total_value.is_finite() && total_error.is_finite()) {
            return Err(Error::QuadratureNonConvergence {
                estimate: total_value,
                error: total_error,
            });
        }
        let target = cfg.abs_tol.max(cfg.rel_tol * total_value.abs());
        if total_error <= target {
            break;
        }
        let Some(worst) = heap.pop() else {
            // Everything left is at maximum depth.
            return Err(Error::QuadratureNonConvergence {
                estimate: total_value,
                error: total_error,
            });
        };
        if worst.depth >= cfg.max_halvings || panels >= MAX_PANELS {
            frozen_value += worst.value;
            frozen_error += worst.error;
            if panels >= MAX_PANELS {
                return Err(Error::QuadratureNonConvergence {
                    estimate: total_value,
                    error: total_error,
                });
            }
            continue;
        }
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = gk21(&f, worst.a, mid);
        let (v2, e2) = gk21(&f, mid, worst.b);
        panels += 2;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
            depth: worst.depth + 1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
            depth: worst.depth + 1,
        });
        total_value += v1 + v2 - worst.value;
        total_error += e1 + e2 - worst.error;
        if panels % 128 == 1 {
            // Periodic re-sum bounds the drift of the running totals.
            total_value = frozen_value + heap.iter().map(|p| p.value).sum::<f64>();
            total_error = frozen_error + heap.iter().map(|p| p.error).sum::<f64>();
        }
    }
    Ok(Estimate {
        value: frozen_value + heap.iter().map(|p| p.value).sum::<f64>(),
        error: total_error,
        panels,
    })
}

/// Integrates `f` over `[a, ∞)` through `x = a + t/(1 − t)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    integrate(
        |t: f64| {
            let s = 1.0 - t;
            let v = f(a + t / s) / (s * s);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        cfg,
    )
}
