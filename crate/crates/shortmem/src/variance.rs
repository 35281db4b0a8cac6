//! Exact second moments for Gaussian linear processes: partial-sum
//! variances by two independent routes, staircase lower-bound reports,
//! projection norms, regular-variation slope diagnostics, and exact
//! weighted variances.

use crate::coefficients::{CoefficientSequence, StaircaseBlocks};
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::scalar::Real;
use crate::weights::WeightFn;

/// Cap on the index work of one exact-variance evaluation.
const WORK_CAPACITY: u128 = 1 << 32;

/// `Var(S_n) = sigma2 * sum_i (sum_{k=1}^n a_{k-i})^2`.
///
/// The inner sums are maintained by sliding-window updates (O(1) per shift,
/// compensated), and the outer sum of squares is compensated as well.
pub fn exact_variance<T: Real>(
    coeffs: &CoefficientSequence<T>,
    n: usize,
    sigma2: T,
) -> Result<T> {
    if n == 0 {
        return Err(Error::InvalidParameter { name: "n", reason: "must be >= 1" });
    }
    let (lo, hi) = coeffs.window();
    let work = n as u128 + (hi - lo + 1) as u128;
    if work > WORK_CAPACITY {
        return Err(Error::CapacityExceeded { needed: work, capacity: WORK_CAPACITY });
    }

    // inner(i) = sum of a_m over m in [max(lo, 1-i), min(hi, n-i)]
    let i_min = 1 - hi;
    let i_max = n as i64 - lo;
    let mut inner = CompensatedSum::new();
    {
        let m_lo = (1 - i_min).max(lo);
        let m_hi = (n as i64 - i_min).min(hi);
        for m in m_lo..=m_hi {
            inner.add(coeffs.value(m));
        }
    }
    let mut outer = CompensatedSum::new();
    let mut i = i_min;
    loop {
        let v = inner.value();
        outer.add(v * v);
        if i == i_max {
            break;
        }
        // shift i -> i + 1: the m-interval moves down by one
        let old_hi = (n as i64 - i).min(hi);
        let new_lo = (1 - (i + 1)).max(lo);
        let new_hi = (n as i64 - (i + 1)).min(hi);
        if new_hi < old_hi {
            inner.add(-coeffs.value(old_hi));
        }
        if new_lo < (1 - i).max(lo) {
            inner.add(coeffs.value(new_lo));
        }
        i += 1;
    }
    Ok(sigma2 * outer.value())
}

/// Independent second route: `Var(S_n) = n gamma(0) + 2 sum_h (n-h) gamma(h)`
/// from the autocovariances. Cross-checks [`exact_variance`].
pub fn variance_from_autocovariance<T: Real>(
    coeffs: &CoefficientSequence<T>,
    n: usize,
    sigma2: T,
) -> T {
    let (lo, hi) = coeffs.window();
    let band = ((hi - lo) as usize).min(n.saturating_sub(1));
    let mut acc = CompensatedSum::new();
    acc.add(T::of_usize(n) * coeffs.autocovariance(sigma2, 0));
    for h in 1..=band as i64 {
        let w = T::of_usize(n - h as usize);
        acc.add(T::of(2.0) * w * coeffs.autocovariance(sigma2, h));
    }
    acc.value()
}

/// Exact `Var(S_n)` over a grid of `n`, with normalizations and log-log
/// slopes between consecutive grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceProfile<T> {
    grid: Vec<usize>,
    variance: Vec<T>,
    normalized: Vec<T>,
    slopes: Vec<T>,
}

impl<T: Real> VarianceProfile<T> {
    pub fn build(coeffs: &CoefficientSequence<T>, grid: &[usize], sigma2: T) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::InvalidParameter { name: "grid", reason: "needs >= 2 points" });
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter { name: "grid", reason: "must be ascending" });
        }
        let mut variance = Vec::with_capacity(grid.len());
        let mut normalized = Vec::with_capacity(grid.len());
        for &n in grid {
            let v = exact_variance(coeffs, n, sigma2)?;
            variance.push(v);
            normalized.push(v / T::of_usize(n));
        }
        let slopes = slopes_of(grid, &variance);
        Ok(VarianceProfile { grid: grid.to_vec(), variance, normalized, slopes })
    }

    pub fn grid(&self) -> &[usize] {
        &self.grid
    }

    pub fn variance(&self) -> &[T] {
        &self.variance
    }

    /// `Var(S_n) / n`.
    pub fn normalized(&self) -> &[T] {
        &self.normalized
    }

    /// `d log Var / d log n` between consecutive grid points; entry `i`
    /// belongs to the interval ending at grid point `i + 1`.
    pub fn slopes(&self) -> &[T] {
        &self.slopes
    }

    /// CSV export (n, variance, variance_over_n, slope); the slope column is
    /// empty on the first row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,variance,variance_over_n,slope\n");
        for (i, &n) in self.grid.iter().enumerate() {
            let slope = if i == 0 { String::new() } else { format!("{}", self.slopes[i - 1]) };
            out.push_str(&format!("{},{},{},{}\n", n, self.variance[i], self.normalized[i], slope));
        }
        out
    }
}

/// Log-log slopes of `values` against `grid`.
pub fn slopes_of<T: Real>(grid: &[usize], values: &[T]) -> Vec<T> {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(ns, vs)| {
            (vs[1].ln() - vs[0].ln())
                / (T::of_usize(ns[1]).ln() - T::of_usize(ns[0]).ln())
        })
        .collect()
}

/// Exact variance at a block boundary against the two lower bounds the
/// staircase construction supports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceBounds<T> {
    pub level: u32,
    /// `n = 4^(level+1)`, where the bounds apply.
    pub n: u64,
    pub exact: T,
    /// `height^2 n^3 / 12`, from counting the plateau terms directly.
    pub counting_bound: T,
    /// `n^2 / (9 level^8)`, the stronger stated form; reported, not assumed.
    pub quadratic_bound: T,
}

impl<T: Real> VarianceBounds<T> {
    pub fn meets_counting(&self) -> bool {
        self.exact >= self.counting_bound
    }
    pub fn meets_quadratic(&self) -> bool {
        self.exact >= self.quadratic_bound
    }
}

/// Evaluate `Var(S_{4^(r+1)})` for staircase coefficients and compare it to
/// the block-counting lower bound (which must always hold) and the stated
/// quadratic-over-log bound (which is reported).
pub fn staircase_variance_bounds<T: Real>(
    coeffs: &CoefficientSequence<T>,
    level: u32,
) -> Result<VarianceBounds<T>> {
    let blocks = coeffs.blocks().ok_or(Error::InvalidParameter {
        name: "coeffs",
        reason: "requires staircase coefficients",
    })?;
    if level < 1 || level + 1 > blocks.levels() {
        return Err(Error::InvalidParameter {
            name: "level",
            reason: "must satisfy 1 <= level <= levels - 1",
        });
    }
    let n = blocks.boundary(level + 1);
    let exact = exact_variance(coeffs, n as usize, T::one())?;
    let h = blocks.height(level);
    let nf = T::of(n as f64);
    let counting_bound = h * h * nf * nf * nf / T::of(12.0);
    let r = level as f64;
    let quadratic_bound = nf * nf / T::of(9.0 * r.powi(8));
    Ok(VarianceBounds { level, n, exact, counting_bound, quadratic_bound })
}

/// `sum_{j = k + 4^r + 1}^{k + 4^(r+1)} t_j^2`, evaluated analytically from
/// the block structure; never materializes coefficients.
pub fn projection_block_norm<T: Real>(blocks: &StaircaseBlocks<T>, r: u32, k: u64) -> T {
    let lo = k + blocks.boundary(r) + 1;
    let hi = k + blocks.boundary(r + 1);
    let mut acc = CompensatedSum::new();
    for s in 1..=blocks.levels() {
        let b_lo = blocks.boundary(s) + 1;
        let b_hi = blocks.boundary(s + 1);
        let o_lo = lo.max(b_lo);
        let o_hi = hi.min(b_hi);
        if o_lo <= o_hi {
            let h = blocks.height(s);
            acc.add(T::of((o_hi - o_lo + 1) as f64) * h * h);
        }
    }
    acc.value()
}

/// `sum_{r=1}^{levels} sqrt(projection_block_norm(r, 0))`, the cumulative
/// projection norm whose finiteness is the summability condition.
pub fn projection_norm_sum<T: Real>(blocks: &StaircaseBlocks<T>) -> T {
    let mut acc = CompensatedSum::new();
    for r in 1..=blocks.levels() {
        acc.add(projection_block_norm(blocks, r, 0).sqrt());
    }
    acc.value()
}

/// Per-level projection norms at offset `k`, their `k = 0` bounds, and the
/// cumulative norm sum.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionProfile<T> {
    pub offset: u64,
    pub rows: Vec<ProjectionRow<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionRow<T> {
    pub level: u32,
    pub norm_sq: T,
    /// Offset-zero value; dominates `norm_sq` for every `k >= 0`.
    pub bound_sq: T,
    pub cumulative_norm: T,
}

impl<T: Real> ProjectionProfile<T> {
    pub fn build(blocks: &StaircaseBlocks<T>, offset: u64) -> Self {
        let mut rows = Vec::with_capacity(blocks.levels() as usize);
        let mut cum = T::zero();
        for r in 1..=blocks.levels() {
            let norm_sq = projection_block_norm(blocks, r, offset);
            let bound_sq = projection_block_norm(blocks, r, 0);
            cum = cum + norm_sq.sqrt();
            rows.push(ProjectionRow { level: r, norm_sq, bound_sq, cumulative_norm: cum });
        }
        ProjectionProfile { offset, rows }
    }

    /// CSV export (level, norm_sq, bound_sq, cumulative_norm).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,norm_sq,bound_sq,cumulative_norm\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.level, row.norm_sq, row.bound_sq, row.cumulative_norm
            ));
        }
        out
    }
}

/// Exact `Var(n^{-1/2} sum_{i<=floor(nt)} g(i/n) X_i)`, computed from the
/// banded autocovariance in `O(n * bandwidth)`.
pub fn weighted_exact_variance<T: Real>(
    coeffs: &CoefficientSequence<T>,
    weight: &WeightFn<T>,
    n: usize,
    t: T,
    sigma2: T,
) -> Result<T> {
    if n == 0 {
        return Err(Error::InvalidParameter { name: "n", reason: "must be >= 1" });
    }
    if t < T::zero() || t > T::one() {
        return Err(Error::InvalidParameter { name: "t", reason: "must lie in [0, 1]" });
    }
    let m = (T::of_usize(n) * t).floor().as_f64() as usize;
    if m == 0 {
        return Ok(T::zero());
    }
    let (lo, hi) = coeffs.window();
    let band = ((hi - lo) as usize).min(m - 1);
    let work = m as u128 * (band as u128 + 1);
    if work > WORK_CAPACITY {
        return Err(Error::CapacityExceeded { needed: work, capacity: WORK_CAPACITY });
    }
    let nf = T::of_usize(n);
    let g: Vec<T> = (1..=m).map(|i| weight.eval(T::of_usize(i) / nf)).collect();

    let mut acc = CompensatedSum::new();
    let gamma0 = coeffs.autocovariance(sigma2, 0);
    let mut diag = CompensatedSum::new();
    for gi in &g {
        diag.add(*gi * *gi);
    }
    acc.add(gamma0 * diag.value());
    for h in 1..=band {
        let gamma = coeffs.autocovariance(sigma2, h as i64);
        if gamma == T::zero() {
            continue;
        }
        let mut cross = CompensatedSum::new();
        for i in 0..m - h {
            cross.add(g[i] * g[i + h]);
        }
        acc.add(T::of(2.0) * gamma * cross.value());
    }
    Ok(acc.value() / nf)
}
