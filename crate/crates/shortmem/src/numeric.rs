//! Small numeric utilities: compensated summation, the standard normal CDF,
//! and adaptive quadrature.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Neumaier-compensated accumulator. Deterministic for a fixed add order.
#[derive(Debug, Clone, Copy)]
pub struct CompensatedSum<T> {
    sum: T,
    correction: T,
}

impl<T: Real> Default for CompensatedSum<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        CompensatedSum { sum: T::zero(), correction: T::zero() }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.correction = self.correction + ((self.sum - t) + x);
        } else {
            self.correction = self.correction + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.correction
    }
}

/// Standard normal cumulative distribution function.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Inverse of [`normal_cdf`] by bisection; self-consistent with the CDF.
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile needs p in (0,1)");
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    adaptive(f, a, b, fa, fm, fb, whole, tol, 48)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::QuadratureDidNotConverge);
    }
    let lv = adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let rv = adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok(lv + rv)
}

/// Sorted copy of a slice (total order; inputs must be finite).
pub fn sorted<T: Real>(values: &[T]) -> Vec<T> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    v
}

/// Median of a slice (average of the two middle order statistics).
pub fn median<T: Real>(values: &[T]) -> T {
    let v = sorted(values);
    let n = v.len();
    assert!(n > 0, "median of empty slice");
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / T::of(2.0)
    }
}

/// Nearest-rank upper quantile: smallest order statistic with rank >= q*n.
pub fn quantile<T: Real>(values: &[T], q: f64) -> T {
    let v = sorted(values);
    let n = v.len();
    assert!(n > 0, "quantile of empty slice");
    let rank = (q * n as f64).ceil() as usize;
    v[rank.clamp(1, n) - 1]
}

pub fn mean<T: Real>(values: &[T]) -> T {
    let mut acc = CompensatedSum::new();
    for &x in values {
        acc.add(x);
    }
    acc.value() / T::of_usize(values.len())
}

/// Unbiased sample variance.
pub fn sample_variance<T: Real>(values: &[T]) -> T {
    let n = values.len();
    assert!(n > 1, "variance needs at least two samples");
    let m = mean(values);
    let mut acc = CompensatedSum::new();
    for &x in values {
        let d = x - m;
        acc.add(d * d);
    }
    acc.value() / T::of_usize(n - 1)
}
