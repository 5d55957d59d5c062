//! Globally adaptive Gauss–Kronrod (7/15) quadrature for complex integrands.

use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the odd-indexed Kronrod nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_intervals: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

/// Single 15-point Kronrod rule with the embedded 7-point Gauss estimate.
pub fn kronrod15<F>(f: &F, a: f64, b: f64) -> (Complex64, f64, f64)
where
    F: Fn(f64) -> Complex64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs = fc.norm() * WGK[7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (lo, hi) = (f(center - dx), f(center + dx));
        let pair = lo + hi;
        abs += (lo.norm() + hi.norm()) * WGK[j];
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).norm();
    (value, error, abs * half.abs())
}

struct Interval {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    abs: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrate `f` over the union of `[breaks[i], breaks[i+1]]`; breakpoints
/// mark places where the integrand has narrow structure.
/// Relative roundoff floor against `∫|f|`.
const ROUNDOFF: f64 = 50.0 * f64::EPSILON;

pub fn integrate<F>(f: F, breaks: &[f64], opts: QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64,
{
    if breaks.len() < 2 {
        return Err(Error::Domain(
            "integration needs at least two breakpoints".into(),
        ));
    }
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (value, error, abs) = kronrod15(&f, w[0], w[1]);
        evaluations += 15;
        heap.push(Interval {
            a: w[0],
            b: w[1],
            value,
            error,
            abs,
        });
    }
    let mut total: Complex64 = heap.iter().map(|i| i.value).sum();
    let mut err: f64 = heap.iter().map(|i| i.error).sum();
    let mut abs: f64 = heap.iter().map(|i| i.abs).sum();
    loop {
        // cancellation puts a floor of a few ulps of ∫|f| under any estimate
        let floor = ROUNDOFF * abs;
        if err <= opts.abs_tol.max(opts.rel_tol * total.norm()).max(floor) {
            return Ok(QuadResult {
                value: total,
                error: err,
                evaluations,
            });
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::Tolerance(format!(
                "{} intervals, estimated error {err:e} against |I| = {:e}, {evaluations} evaluations",
                heap.len(),
                total.norm()
            )));
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::Tolerance(format!(
                "interval [{}, {}] cannot be bisected further",
                worst.a, worst.b
            )));
        }
        total -= worst.value;
        err -= worst.error;
        abs -= worst.abs;
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error, part_abs) = kronrod15(&f, a, b);
            evaluations += 15;
            total += value;
            err += error;
            abs += part_abs;
            heap.push(Interval {
                a,
                b,
                value,
                error,
                abs: part_abs,
            });
        }
        if heap.len() % 64 == 0 {
            // re-sum to keep the running totals from drifting
            total = heap.iter().map(|i| i.value).sum();
            err = heap.iter().map(|i| i.error).sum();
            abs = heap.iter().map(|i| i.abs).sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(f: impl Fn(f64) -> f64) -> impl Fn(f64) -> Complex64 {
        move |x| Complex64::new(f(x), 0.0)
    }

    #[test]
    fn kronrod_is_exact_for_degree_21() {
        let (v, _, _) = kronrod15(&real(|x| x.powi(21) + 3.0 * x.powi(4)), 0.0, 1.0);
        assert!((v.re - (1.0 / 22.0 + 3.0 / 5.0)).abs() < 1e-15);
    }

    #[test]
    fn narrow_gaussian_with_breakpoint() {
        let eps = 1e-3;
        let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * eps);
        let f = real(move |x: f64| norm * (-(x - 0.3).powi(2) / (2.0 * eps * eps)).exp());
        let r = integrate(f, &[0.0, 0.3, 1.0], QuadOptions::default()).unwrap();
        assert!((r.value.re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn oscillatory_complex() {
        let f = |x: f64| Complex64::from_polar(1.0, 13.0 * x);
        let r = integrate(f, &[0.0, std::f64::consts::PI], QuadOptions::default()).unwrap();
        let exact = (Complex64::from_polar(1.0, 13.0 * std::f64::consts::PI) - 1.0)
            / Complex64::new(0.0, 13.0);
        assert!((r.value - exact).norm() < 1e-10);
    }

    #[test]
    fn budget_exhaustion_reports_tolerance_error() {
        let f = real(|x: f64| 1.0 / x.abs().sqrt().max(1e-300));
        let opts = QuadOptions {
            max_intervals: 10,
            ..QuadOptions::default()
        };
        assert!(matches!(
            integrate(f, &[-1.0, 1.0], opts),
            Err(Error::Tolerance(_))
        ));
    }
}
