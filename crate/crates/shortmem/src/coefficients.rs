//! Absolutely summable coefficient sequences with exact tail accounting.
//!
//! A sequence stores a finite window of values `a_j`, `j in [-L, R]`, plus a
//! decay descriptor that certifies the l1 mass beyond the window in closed
//! form. Everything downstream (filtering, exact variances, projections)
//! works off this representation.

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::scalar::Real;

/// Largest index a materialized sequence may reach.
pub const INDEX_CAPACITY: u64 = 1 << 22;

/// Decay family of a coefficient sequence, used for certified tail bounds.
#[derive(Debug, Clone, PartialEq)]
pub enum Decay<T> {
    /// All mass inside the stored window; tail exactly zero.
    Finite,
    /// `a_j = ratio^|j|` on both sides, `ratio in (0, 1)`.
    TwoSidedGeometric { ratio: T },
    /// `a_i = ratio^i` for `i >= 0`, zero for `i < 0`.
    CausalGeometric { ratio: T },
    /// `a_0 = 1`, `a_j = |j|^-exponent`, `exponent > 1`. Tail bounds are
    /// integral bounds, not exact.
    Polynomial { exponent: T },
    /// One-sided staircase over dyadic blocks; see [`StaircaseBlocks`].
    Staircase { levels: u32 },
}

/// A series value together with a certified half-width interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum<T> {
    pub value: T,
    /// Zero when the descriptor admits an exact closed-form tail.
    pub uncertainty: T,
}

impl<T: Real> SeriesSum<T> {
    pub fn lower(&self) -> T {
        self.value - self.uncertainty
    }
    pub fn upper(&self) -> T {
        self.value + self.uncertainty
    }
}

/// Two-sided coefficient window with a certified tail.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSequence<T> {
    neg: usize,
    pos: usize,
    values: Vec<T>, // index j stored at values[j + neg]
    decay: Decay<T>,
    tail: T, // certified l1 mass beyond the window
}

impl<T: Real> CoefficientSequence<T> {
    /// The identity filter `{a_0 = 1}`.
    pub fn identity() -> Self {
        CoefficientSequence {
            neg: 0,
            pos: 0,
            values: vec![T::one()],
            decay: Decay::Finite,
            tail: T::zero(),
        }
    }

    /// Finite-support sequence from `(index, value)` pairs.
    pub fn finite(entries: &[(i64, T)]) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParameter { name: "entries", reason: "must be nonempty" });
        }
        let lo = entries.iter().map(|&(j, _)| j).min().unwrap().min(0);
        let hi = entries.iter().map(|&(j, _)| j).max().unwrap().max(0);
        if (-lo as u64) > INDEX_CAPACITY || (hi as u64) > INDEX_CAPACITY {
            return Err(Error::CapacityExceeded {
                needed: hi.unsigned_abs().max(lo.unsigned_abs()) as u128,
                capacity: INDEX_CAPACITY as u128,
            });
        }
        let neg = (-lo) as usize;
        let pos = hi as usize;
        let mut values = vec![T::zero(); neg + pos + 1];
        for &(j, a) in entries {
            values[(j + neg as i64) as usize] = a;
        }
        Ok(CoefficientSequence { neg, pos, values, decay: Decay::Finite, tail: T::zero() })
    }

    /// `a_j = ratio^|j|` stored on `[-half_width, half_width]`.
    pub fn two_sided_geometric(ratio: T, half_width: usize) -> Result<Self> {
        if !(ratio > T::zero() && ratio < T::one()) {
            return Err(Error::InvalidParameter { name: "ratio", reason: "must lie in (0, 1)" });
        }
        let w = half_width as i64;
        let mut values = vec![T::zero(); 2 * half_width + 1];
        for j in -w..=w {
            values[(j + w) as usize] = ratio.powi(j.unsigned_abs() as i32);
        }
        let two = T::of(2.0);
        let tail = two * ratio.powi(half_width as i32 + 1) / (T::one() - ratio);
        Ok(CoefficientSequence {
            neg: half_width,
            pos: half_width,
            values,
            decay: Decay::TwoSidedGeometric { ratio },
            tail,
        })
    }

    /// `a_i = ratio^i` for `i in [0, width]`.
    pub fn causal_geometric(ratio: T, width: usize) -> Result<Self> {
        if !(ratio > T::zero() && ratio < T::one()) {
            return Err(Error::InvalidParameter { name: "ratio", reason: "must lie in (0, 1)" });
        }
        let values = (0..=width).map(|i| ratio.powi(i as i32)).collect();
        let tail = ratio.powi(width as i32 + 1) / (T::one() - ratio);
        Ok(CoefficientSequence {
            neg: 0,
            pos: width,
            values,
            decay: Decay::CausalGeometric { ratio },
            tail,
        })
    }

    /// `a_0 = 1`, `a_j = |j|^-exponent` on `[-half_width, half_width]`.
    pub fn polynomial(exponent: T, half_width: usize) -> Result<Self> {
        if exponent <= T::one() {
            return Err(Error::InvalidParameter { name: "exponent", reason: "must exceed 1" });
        }
        if half_width == 0 {
            return Err(Error::InvalidParameter { name: "half_width", reason: "must be >= 1" });
        }
        let w = half_width as i64;
        let mut values = vec![T::zero(); 2 * half_width + 1];
        for j in -w..=w {
            let a = if j == 0 {
                T::one()
            } else {
                T::of_usize(j.unsigned_abs() as usize).powf(-exponent)
            };
            values[(j + w) as usize] = a;
        }
        let tail = polynomial_tail_bound(exponent, half_width as u64);
        Ok(CoefficientSequence {
            neg: half_width,
            pos: half_width,
            values,
            decay: Decay::Polynomial { exponent },
            tail,
        })
    }

    /// Materialize the staircase sequence for `levels` blocks.
    ///
    /// Rejects `levels` whose top boundary exceeds [`INDEX_CAPACITY`]; use
    /// [`StaircaseBlocks`] directly for analytic work at larger depths.
    pub fn staircase(levels: u32) -> Result<Self> {
        let blocks = StaircaseBlocks::<T>::new(levels)?;
        let top = blocks.boundary(levels + 1);
        if top > INDEX_CAPACITY {
            return Err(Error::CapacityExceeded {
                needed: top as u128,
                capacity: INDEX_CAPACITY as u128,
            });
        }
        let mut values = vec![T::zero(); top as usize + 1];
        for r in 1..=levels {
            let h = blocks.height(r);
            for j in blocks.boundary(r) + 1..=blocks.boundary(r + 1) {
                values[j as usize] = h;
            }
        }
        Ok(CoefficientSequence {
            neg: 0,
            pos: top as usize,
            values,
            decay: Decay::Staircase { levels },
            tail: T::zero(),
        })
    }

    pub fn decay(&self) -> &Decay<T> {
        &self.decay
    }

    /// Window bounds `(-L, R)`.
    pub fn window(&self) -> (i64, i64) {
        (-(self.neg as i64), self.pos as i64)
    }

    /// Coefficient at index `j`; zero outside the window.
    pub fn value(&self, j: i64) -> T {
        let idx = j + self.neg as i64;
        if idx < 0 || idx as usize >= self.values.len() {
            T::zero()
        } else {
            self.values[idx as usize]
        }
    }

    pub fn is_causal(&self) -> bool {
        (0..self.neg).all(|i| self.values[i] == T::zero())
    }

    /// Documented summation order: ascending |j|, negative index first at
    /// equal |j|. Fixed for reproducibility.
    pub fn ordered_indices(&self) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.values.len());
        out.push(0);
        let m = self.neg.max(self.pos) as i64;
        for a in 1..=m {
            if a <= self.neg as i64 {
                out.push(-a);
            }
            if a <= self.pos as i64 {
                out.push(a);
            }
        }
        out
    }

    fn windowed_sum(&self, absolute: bool) -> T {
        let mut acc = CompensatedSum::new();
        for j in self.ordered_indices() {
            let a = self.value(j);
            acc.add(if absolute { a.abs() } else { a });
        }
        acc.value()
    }

    /// `A = sum_j a_j`, with the closed-form tail folded in when the
    /// descriptor admits one and reported as an interval otherwise.
    pub fn total_sum(&self) -> SeriesSum<T> {
        let w = self.windowed_sum(false);
        match self.decay {
            Decay::Finite | Decay::Staircase { .. } => {
                SeriesSum { value: w, uncertainty: T::zero() }
            }
            Decay::TwoSidedGeometric { .. } | Decay::CausalGeometric { .. } => {
                // all coefficients positive, so the signed tail is the l1 tail
                SeriesSum { value: w + self.tail, uncertainty: T::zero() }
            }
            Decay::Polynomial { .. } => SeriesSum { value: w, uncertainty: self.tail },
        }
    }

    /// Reported l1 norm: windowed absolute sum plus the certified tail.
    pub fn l1_norm(&self) -> T {
        self.windowed_sum(true) + self.tail
    }

    /// Certified l1 mass beyond the stored window.
    pub fn certified_tail(&self) -> T {
        self.tail
    }

    /// `sum_{|j| > m} |a_j|`: exact for finite support and staircase, closed
    /// form for geometric, integral upper bound for polynomial.
    pub fn tail_mass(&self, m: u64) -> T {
        match self.decay {
            Decay::Finite | Decay::Staircase { .. } => {
                let mut acc = CompensatedSum::new();
                for j in self.ordered_indices() {
                    if j.unsigned_abs() > m {
                        acc.add(self.value(j).abs());
                    }
                }
                acc.value()
            }
            Decay::TwoSidedGeometric { ratio } => {
                T::of(2.0) * geometric_tail(ratio, m)
            }
            Decay::CausalGeometric { ratio } => geometric_tail(ratio, m),
            Decay::Polynomial { exponent } => polynomial_tail_bound(exponent, m),
        }
    }

    /// `gamma(h) = sigma2 * sum_k a_k a_{k+h}` over the stored window.
    pub fn autocovariance(&self, sigma2: T, h: i64) -> T {
        let (lo, hi) = self.window();
        let mut acc = CompensatedSum::new();
        for k in lo..=hi {
            let kh = k + h;
            if kh < lo || kh > hi {
                continue;
            }
            acc.add(self.value(k) * self.value(kh));
        }
        sigma2 * acc.value()
    }

    /// Finite-support copy keeping only `|j| <= m`. The discarded mass is
    /// reported by `tail_mass(m)` on the original.
    pub fn truncated(&self, m: u64) -> Self {
        let neg = self.neg.min(m as usize);
        let pos = self.pos.min(m as usize);
        let mut values = vec![T::zero(); neg + pos + 1];
        for j in -(neg as i64)..=(pos as i64) {
            values[(j + neg as i64) as usize] = self.value(j);
        }
        CoefficientSequence { neg, pos, values, decay: Decay::Finite, tail: T::zero() }
    }

    /// Staircase metadata when this sequence was built from blocks.
    pub fn blocks(&self) -> Option<StaircaseBlocks<T>> {
        match self.decay {
            Decay::Staircase { levels } => StaircaseBlocks::new(levels).ok(),
            _ => None,
        }
    }
}

impl<T: Real> std::fmt::Display for CoefficientSequence<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.decay {
            Decay::Finite if self.neg == 0 && self.pos == 0 && self.values[0] == T::one() => {
                write!(f, "identity")
            }
            Decay::Finite => write!(f, "finite(window=[-{},{}])", self.neg, self.pos),
            Decay::TwoSidedGeometric { ratio } => {
                write!(f, "geometric(ratio={ratio},window={})", self.pos)
            }
            Decay::CausalGeometric { ratio } => {
                write!(f, "causal-geometric(ratio={ratio},window={})", self.pos)
            }
            Decay::Polynomial { exponent } => {
                write!(f, "polynomial(exponent={exponent},window={})", self.pos)
            }
            Decay::Staircase { levels } => write!(f, "staircase(levels={levels})"),
        }
    }
}

fn geometric_tail<T: Real>(ratio: T, m: u64) -> T {
    ratio.powi(m as i32 + 1) / (T::one() - ratio)
}

/// `2 * sum_{j > m} j^-beta` bounded by `2 m^{1-beta}/(beta-1)` for `m >= 1`;
/// at `m = 0` the bound is `2 beta/(beta-1)`. Documented as an upper bound.
fn polynomial_tail_bound<T: Real>(exponent: T, m: u64) -> T {
    let two = T::of(2.0);
    if m == 0 {
        two * exponent / (exponent - T::one())
    } else {
        two * T::of(m as f64).powf(T::one() - exponent) / (exponent - T::one())
    }
}

/// Staircase block structure: boundaries `4^r` and plateau heights
/// `1/(3 r^4 2^r)` for levels `r = 1..=levels`. Coefficients are zero up to
/// and including the first boundary and beyond the last one.
#[derive(Debug, Clone, PartialEq)]
pub struct StaircaseBlocks<T> {
    levels: u32,
    _marker: std::marker::PhantomData<T>,
}

/// Deepest level the analytic block machinery supports (`4^(levels+1)` must
/// fit in u64 comfortably).
pub const MAX_LEVELS: u32 = 30;

impl<T: Real> StaircaseBlocks<T> {
    pub fn new(levels: u32) -> Result<Self> {
        if levels < 1 {
            return Err(Error::InvalidParameter { name: "levels", reason: "must be >= 1" });
        }
        if levels > MAX_LEVELS {
            return Err(Error::CapacityExceeded {
                needed: levels as u128,
                capacity: MAX_LEVELS as u128,
            });
        }
        Ok(StaircaseBlocks { levels, _marker: std::marker::PhantomData })
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    /// Block boundary `4^r`.
    pub fn boundary(&self, r: u32) -> u64 {
        4u64.pow(r)
    }

    /// Plateau height on block `r`, i.e. on `(4^r, 4^(r+1)]`.
    pub fn height(&self, r: u32) -> T {
        let r = r as f64;
        T::of(1.0 / (3.0 * r.powi(4) * r.exp2()))
    }

    /// Coefficient `t_j`. Zero for `j <= 4` and beyond the last block; the
    /// first boundary itself carries no block, so it is assigned zero, which
    /// preserves monotonicity.
    pub fn coefficient(&self, j: u64) -> T {
        match self.level_of(j) {
            Some(r) => self.height(r),
            None => T::zero(),
        }
    }

    /// Level whose half-open block `(4^r, 4^(r+1)]` contains `j`.
    pub fn level_of(&self, j: u64) -> Option<u32> {
        if j <= self.boundary(1) || j > self.boundary(self.levels + 1) {
            return None;
        }
        let mut r = 1;
        while self.boundary(r + 1) < j {
            r += 1;
        }
        Some(r)
    }

    /// l1 mass of block `r`: `(4^(r+1) - 4^r) * height(r) = 2^r / r^4`.
    pub fn block_l1(&self, r: u32) -> T {
        T::of((self.boundary(r + 1) - self.boundary(r)) as f64) * self.height(r)
    }

    /// l2 mass of block `r`: `(4^(r+1) - 4^r) * height(r)^2 = 1/(3 r^8)`.
    pub fn block_sq_norm(&self, r: u32) -> T {
        let h = self.height(r);
        T::of((self.boundary(r + 1) - self.boundary(r)) as f64) * h * h
    }
}
