//! Adaptive Gauss-Kronrod quadrature.
//!
//! A 21-point Gauss-Kronrod rule on each panel with greedy bisection of the
//! panel carrying the largest error estimate. Callers integrating
//! oscillatory filter-spectrum products seed the initial panels narrower
//! than the oscillation lobes (see `max_panel_width`), so adaptation only
//! has to polish, not discover, the structure.

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// 10 positive Kronrod abscissas (the 21-point rule is symmetric; the
/// eleventh node is the panel center).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 10] = [
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
];

/// Gauss weights for the embedded 10-point rule (odd-indexed Kronrod nodes).
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Kronrod weights; the last entry belongs to the center node.
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

/// One panel's rule evaluation: integral, error estimate, integral of |f|.
fn qk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut fv1 = [0.0_f64; 10];
    let mut fv2 = [0.0_f64; 10];
    let mut res_kronrod = f_center * WGK[10];
    let mut res_gauss = 0.0;
    let mut res_abs = res_kronrod.abs();

    for j in 0..10 {
        let x = half * XGK[j];
        let v1 = f(center - x);
        let v2 = f(center + x);
        fv1[j] = v1;
        fv2[j] = v2;
        let sum = v1 + v2;
        res_kronrod += WGK[j] * sum;
        res_abs += WGK[j] * (v1.abs() + v2.abs());
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * sum;
        }
    }

    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_kronrod * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_kronrod - res_gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * 1.0_f64.min((200.0 * err / res_asc).powf(1.5));
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err, res_abs)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    res_abs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error && self.a == other.a
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
        // worst error first; endpoint tiebreak keeps the pop order deterministic
        self.error
            .total_cmp(&other.error)
            .then(other.a.total_cmp(&self.a))
    }
}

/// Integral value with its accumulated error estimate.
#[derive(Debug, Clone, Copy)]
pub struct QuadOutcome {
    pub value: f64,
    /// Estimated absolute error of `value`.
    pub abs_error: f64,
    /// Integral of |f|, the natural scale for relative-error decisions on
    /// signed integrands.
    pub res_abs: f64,
    pub panels: usize,
}

/// Adaptive integrator configuration.
///
/// Convergence is declared when the summed panel error drops below
/// `max(abs_tol, rel_tol * integral of |f|)`. For nonnegative integrands
/// that criterion is exactly a relative tolerance on the result.
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveQuad {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
    /// Cap on the width of the initial uniform panels; `None` starts from a
    /// single panel.
    pub max_panel_width: Option<f64>,
}

impl AdaptiveQuad {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            max_panels: 100_000,
            max_panel_width: None,
        }
    }

    pub fn with_max_panel_width(mut self, width: f64) -> Self {
        self.max_panel_width = Some(width);
        self
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<QuadOutcome> {
        if a == b {
            return Ok(QuadOutcome {
                value: 0.0,
                abs_error: 0.0,
                res_abs: 0.0,
                panels: 0,
            });
        }
        if a.is_nan() || b.is_nan() || a > b {
            return Err(Error::InvalidParameter(format!(
                "integration bounds must satisfy a <= b, got [{a}, {b}]"
            )));
        }

        let n_init = match self.max_panel_width {
            Some(w) if w > 0.0 => (((b - a) / w).ceil() as usize).clamp(1, self.max_panels),
            _ => 1,
        };

        let mut heap = BinaryHeap::with_capacity(n_init + 64);
        let (mut value, mut error, mut res_abs) = (0.0, 0.0, 0.0);
        let step = (b - a) / n_init as f64;
        for i in 0..n_init {
            let pa = a + step * i as f64;
            let pb = if i + 1 == n_init {
                b
            } else {
                a + step * (i + 1) as f64
            };
            let (v, e, r) = qk21(&f, pa, pb);
            value += v;
            error += e;
            res_abs += r;
            heap.push(Panel {
                a: pa,
                b: pb,
                value: v,
                error: e,
                res_abs: r,
            });
        }

        loop {
            let target = self.abs_tol.max(self.rel_tol * res_abs);
            if error <= target {
                break;
            }
            if heap.len() >= self.max_panels {
                return Err(Error::QuadratureNoConvergence {
                    estimate: value,
                    achieved: error,
                    requested: target,
                });
            }
            let worst = heap.pop().expect("heap cannot be empty here");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // panel narrower than floating-point resolution
                return Err(Error::QuadratureNoConvergence {
                    estimate: value,
                    achieved: error,
                    requested: target,
                });
            }
            value -= worst.value;
            error -= worst.error;
            res_abs -= worst.res_abs;
            for (pa, pb) in [(worst.a, mid), (mid, worst.b)] {
                let (v, e, r) = qk21(&f, pa, pb);
                value += v;
                error += e;
                res_abs += r;
                heap.push(Panel {
                    a: pa,
                    b: pb,
                    value: v,
                    error: e,
                    res_abs: r,
                });
            }
        }

        Ok(QuadOutcome {
            value,
            abs_error: error,
            res_abs,
            panels: heap.len(),
        })
    }
}
