//! Adaptive Gauss-Kronrod quadrature.
//!
//! Globally adaptive bisection on a 21-point Kronrod rule with the embedded
//! 10-point Gauss rule as error estimator. Semi-infinite ranges are split at a
//! finite cut `c`; the tail `[c, ∞)` is mapped onto `(0, 1/c]` with `x = 1/t`,
//! which turns an algebraic decay `x^{-k}` into the regular integrand
//! `t^{k-2}`.

// Nodes and weights are quoted to the digits of the published tables.
#![allow(clippy::excessive_precision)]

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

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

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_745_178_387,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_intervals: 2000,
        }
    }
}

impl QuadOptions {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        QuadOptions {
            abs_tol,
            ..Self::default()
        }
    }
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub abs_err: f64,
    pub intervals: usize,
    pub converged: bool,
}

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

fn kronrod21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_sum = kron.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kron += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kron;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kron * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut err = ((kron - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (1.0f64).min((200.0 * err / res_asc).powf(1.5));
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment { a, b, value, err }
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> Integral {
    if a == b {
        return Integral {
            value: 0.0,
            abs_err: 0.0,
            intervals: 0,
            converged: true,
        };
    }
    let mut segments: Vec<Segment> = Vec::with_capacity(64);
    segments.push(kronrod21(&mut f, a, b));
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let err: f64 = segments.iter().map(|s| s.err).sum();
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if err <= target || segments.len() >= opts.max_intervals {
            return Integral {
                value,
                abs_err: err,
                intervals: segments.len(),
                converged: err <= target,
            };
        }
        let (worst, _) = segments.iter().enumerate().fold((0, -1.0), |acc, (i, s)| {
            if s.err > acc.1 {
                (i, s.err)
            } else {
                acc
            }
        });
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // interval exhausted at machine resolution
            let value: f64 = segments.iter().map(|s| s.value).sum::<f64>() + seg.value;
            let err: f64 = segments.iter().map(|s| s.err).sum::<f64>() + seg.err;
            return Integral {
                value,
                abs_err: err,
                intervals: segments.len() + 1,
                converged: false,
            };
        }
        segments.push(kronrod21(&mut f, seg.a, mid));
        segments.push(kronrod21(&mut f, mid, seg.b));
    }
}

/// Integrates `f` over `[a, ∞)`, splitting at `cut > max(a, 0)`.
///
/// The tail is integrated in the variable `t = 1/x`, which requires `f` to
/// decay at least like `x^{-2}` for the transformed integrand to stay bounded.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    cut: f64,
    opts: &QuadOptions,
) -> Integral {
    debug_assert!(cut > a && cut > 0.0);
    let head = integrate(&mut f, a, cut, opts);
    let tail = integrate(
        |t: f64| if t == 0.0 { 0.0 } else { f(1.0 / t) / (t * t) },
        0.0,
        1.0 / cut,
        opts,
    );
    Integral {
        value: head.value + tail.value,
        abs_err: head.abs_err + tail.abs_err,
        intervals: head.intervals + tail.intervals,
        converged: head.converged && tail.converged,
    }
}

/// Trapezoidal rule over tabulated values on a (not necessarily uniform) grid.
pub fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}
