//! Globally adaptive Gauss–Kronrod (10/21 point) quadrature on finite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

/// Kronrod abscissae on [-1, 1], descending; the odd-indexed entries are the Gauss nodes.
pub(crate) const XGK: [f64; 11] = [
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

pub(crate) const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_643_474_305,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// 10-point Gauss weights for XGK[1], XGK[3], ..., XGK[9].
pub(crate) const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

pub const DEFAULT_MAX_EVALS: usize = 1_000_000;

/// Outcome of a quadrature. `converged == false` means the error target was not met.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl QuadratureResult {
    pub fn exact(value: f64) -> Self {
        QuadratureResult { value, abs_error_estimate: 0.0, evaluations: 0, converged: true }
    }

    /// Sum of two independent pieces.
    pub fn plus(self, other: QuadratureResult) -> Self {
        QuadratureResult {
            value: self.value + other.value,
            abs_error_estimate: self.abs_error_estimate + other.abs_error_estimate,
            evaluations: self.evaluations + other.evaluations,
            converged: self.converged && other.converged,
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        QuadratureResult {
            value: self.value * factor,
            abs_error_estimate: self.abs_error_estimate * factor.abs(),
            ..self
        }
    }

    /// Turn a non-converged result into an error.
    pub fn require(self) -> crate::Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(crate::Error::NonConvergence {
                value: self.value,
                abs_error: self.abs_error_estimate,
                evaluations: self.evaluations,
            })
        }
    }
}

/// Error targets and evaluation budget. The target is `max(abs_tol, rel_tol·|I|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evals: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        QuadSettings { abs_tol: 1e-10, rel_tol: 1e-10, max_evals: DEFAULT_MAX_EVALS }
    }
}

impl QuadSettings {
    pub fn abs(tol: f64) -> Self {
        QuadSettings { abs_tol: tol, rel_tol: 0.0, ..Default::default() }
    }

    pub fn rel(tol: f64) -> Self {
        QuadSettings { abs_tol: 0.0, rel_tol: tol, ..Default::default() }
    }

    pub(crate) fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }

    /// Settings for one of `parts` pieces that must add up to this target.
    pub(crate) fn split(&self, parts: usize) -> Self {
        let p = parts.max(1) as f64;
        QuadSettings { abs_tol: self.abs_tol / p, rel_tol: self.rel_tol / p, max_evals: self.max_evals / parts.max(1) }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        // ties broken on position so the refinement order is reproducible
        self.error.total_cmp(&other.error).then_with(|| other.a.total_cmp(&self.a))
    }
}

/// One 21-point Kronrod panel: (value, error estimate).
fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = finite_or_zero(f(center));
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = finite_or_zero(f(center - dx));
        let f2 = finite_or_zero(f(center + dx));
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (1.0f64).min((200.0 * err / res_asc).powf(1.5));
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

#[inline]
fn finite_or_zero(v: f64) -> f64 {
    // endpoint evaluations of mapped integrands can produce 0·∞; those points carry no mass
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

/// Integrate `f` over `[a, b]` by bisecting the worst panel until the error target is met.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, settings: &QuadSettings) -> QuadratureResult {
    if a == b {
        return QuadratureResult::exact(0.0);
    }
    let (value, error) = gk21(&mut f, a, b);
    let mut evaluations = 21;
    let mut total = value;
    let mut total_err = error;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    loop {
        if total_err <= settings.target(total) {
            break;
        }
        if evaluations + 42 > settings.max_evals {
            return QuadratureResult { value: total, abs_error_estimate: total_err, evaluations, converged: false };
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // the panel can no longer be split in floating point
            heap.push(worst);
            return QuadratureResult { value: total, abs_error_estimate: total_err, evaluations, converged: false };
        }
        let (v1, e1) = gk21(&mut f, worst.a, mid);
        let (v2, e2) = gk21(&mut f, mid, worst.b);
        evaluations += 42;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
        // resum from scratch now and then so cancellation in the running totals cannot drift
        if heap.len() % 64 == 0 {
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        } else {
            total += v1 + v2 - worst.value;
            total_err += e1 + e2 - worst.error;
        }
    }
    // final resummation in a fixed order for determinism independent of heap layout
    let mut segs: Vec<Segment> = heap.into_vec();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = segs.iter().map(|s| s.value).sum();
    let err: f64 = segs.iter().map(|s| s.error).sum();
    QuadratureResult { value, abs_error_estimate: err.max(0.0), evaluations, converged: true }
}
