//! Globally adaptive 21-point Gauss-Kronrod quadrature for complex-valued
//! integrands on a finite interval.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::Complex;

use crate::error::{Error, Result};

type C64 = Complex<f64>;

pub const DEFAULT_MAX_INTERVALS: usize = 4000;

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
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: C64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    // largest error first; ties broken by position so the refinement order is reproducible
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gauss_kronrod_21<F: Fn(f64) -> C64 + ?Sized>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = C64::new(0.0, 0.0);
    for (i, (&x, &w)) in XGK[..10].iter().zip(&WGK[..10]).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * w;
        if i % 2 == 1 {
            gauss += pair * WG[i / 2];
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).norm();
    Panel { a, b, value, error }
}

/// Integrates `f` over `[breaks[0], breaks[last]]`, starting from one panel
/// between each pair of consecutive breakpoints, and bisecting the panel with
/// the largest error estimate until the summed estimate drops below `tol`.
///
/// Returns the integral and the final error estimate.
pub fn integrate<F: Fn(f64) -> C64 + ?Sized>(
    f: &F,
    breaks: &[f64],
    tol: f64,
    max_intervals: usize,
) -> Result<(C64, f64)> {
    if breaks.len() < 2 {
        return Err(Error::InvalidParameter(
            "quadrature needs at least two breakpoints".into(),
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "quadrature tolerance must be positive, got {tol}"
        )));
    }

    let mut heap: BinaryHeap<Panel> = breaks
        .windows(2)
        .map(|w| gauss_kronrod_21(f, w[0], w[1]))
        .collect();
    let mut total_error: f64 = heap.iter().map(|p| p.error).sum();

    while total_error > tol {
        if heap.len() >= max_intervals {
            return Err(Error::QuadratureNonConvergence {
                estimate: total_error,
                tol,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            // panel can no longer be split in floating point
            heap.push(worst);
            return Err(Error::QuadratureNonConvergence {
                estimate: total_error,
                tol,
            });
        }
        let left = gauss_kronrod_21(f, worst.a, mid);
        let right = gauss_kronrod_21(f, mid, worst.b);
        heap.push(left);
        heap.push(right);
        total_error = heap.iter().map(|p| p.error).sum();
    }

    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = panels.iter().fold(C64::new(0.0, 0.0), |acc, p| acc + p.value);
    Ok((value, total_error))
}
