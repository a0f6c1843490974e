//! Adaptive Gauss–Kronrod quadrature and Cauchy principal values.
//!
//! The integrator bisects the subinterval with the largest error estimate until
//! the summed estimate satisfies `err <= max(abs_tol, rel_tol * |I|)`.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{HopfieldError, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Scalar types the integrator can accumulate.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Quadrature settings.
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_intervals: 4000,
        }
    }
}

impl QuadConfig {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral<T> {
    pub value: T,
    pub error: f64,
    pub intervals: usize,
}

fn gk15<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + pair * WGK[i];
        if i % 2 == 1 {
            gauss = gauss + pair * WG[i / 2];
        }
    }
    let kronrod = kronrod * half;
    let gauss = gauss * half;
    (kronrod, (kronrod - gauss).magnitude())
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate<T: QuadValue, F: FnMut(f64) -> T>(
    mut f: F,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<Integral<T>> {
    if a == b {
        return Ok(Integral {
            value: T::zero(),
            error: 0.0,
            intervals: 0,
        });
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    let mut total = v;
    let mut total_err = e;
    while total_err > cfg.abs_tol.max(cfg.rel_tol * total.magnitude()) {
        if pieces.len() >= cfg.max_intervals {
            return Err(HopfieldError::QuadratureFailed {
                estimate: total.magnitude(),
                error: total_err,
            });
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, v_old, e_old) = pieces.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // interval exhausted at machine precision; accept what we have
            pieces.push((lo, hi, v_old, 0.0));
            total_err -= e_old;
            continue;
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        total = total - v_old + v1 + v2;
        total_err += e1 + e2 - e_old;
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
    // re-sum to shed accumulated cancellation error
    let value = pieces.iter().fold(T::zero(), |acc, p| acc + p.2);
    Ok(Integral {
        value,
        error: total_err.max(0.0),
        intervals: pieces.len(),
    })
}

/// Integrates `f` over `[a, ∞)` through the map `x = a + t/(1-t)`.
pub fn integrate_to_infinity<T: QuadValue, F: FnMut(f64) -> T>(
    mut f: F,
    a: f64,
    cfg: &QuadConfig,
) -> Result<Integral<T>> {
    integrate(
        |t: f64| {
            if t >= 1.0 {
                return T::zero();
            }
            let s = 1.0 - t;
            f(a + t / s) * (1.0 / (s * s))
        },
        0.0,
        1.0,
        cfg,
    )
}

/// Cauchy principal value of `∫_a^b g(x)/(x - c) dx` for `a < c < b`.
///
/// A symmetric window `[c-d, c+d]` is folded onto `∫_0^d (g(c+t)-g(c-t))/t dt`,
/// which is regular; the remainder is integrated directly.
pub fn principal_value<F: FnMut(f64) -> f64>(
    mut g: F,
    a: f64,
    b: f64,
    c: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    if !(a < c && c < b) {
        return Err(HopfieldError::InvalidInput(format!(
            "pole {c} not strictly inside ({a}, {b})"
        )));
    }
    let d = (c - a).min(b - c);
    let window = integrate(
        |t: f64| {
            if t == 0.0 {
                0.0
            } else {
                (g(c + t) - g(c - t)) / t
            }
        },
        0.0,
        d,
        cfg,
    )?
    .value;
    let left = integrate(|x: f64| g(x) / (x - c), a, c - d, cfg)?.value;
    let right = integrate(|x: f64| g(x) / (x - c), c + d, b, cfg)?.value;
    Ok(window + left + right)
}
