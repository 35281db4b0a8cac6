//! Seedable, mean-zero stationary innovation streams.
//!
//! Draw `k` is a pure function of `(variant, seed, k)`, so overlapping index
//! ranges agree bit-exactly. The Brownian-coupled variant exposes the grid
//! `W(k/n)` built from the innovations' own partial sums, which makes the
//! coupling identities hold at the bit level.

use crate::error::{Error, Result};
use crate::rng::{self, Stream};
use crate::scalar::Real;

/// Innovation variant tag with parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum InnovationKind<T> {
    /// iid `N(0, sigma^2)`.
    Gaussian { sigma: T },
    /// iid uniform on `[-half_width, half_width]`.
    UniformCentered { half_width: T },
    /// iid `Exponential(rate) - 1/rate`.
    ExponentialCentered { rate: T },
    /// `xi_k = eps_k * sign(eps_{k-1})` with iid standard Gaussian `eps`:
    /// a stationary martingale-difference sequence that is not independent.
    MartingaleDifference,
    /// iid standard Gaussians on `1..=n`, coupled to the Brownian grid of
    /// the same seed. Indices outside `1..=n` are rejected by sampling; the
    /// filter is served by an independent auxiliary stream instead.
    BmCoupled { n: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnovationModel<T> {
    kind: InnovationKind<T>,
    seed: u64,
}

impl<T: Real> InnovationModel<T> {
    pub fn new(kind: InnovationKind<T>, seed: u64) -> Result<Self> {
        match &kind {
            InnovationKind::Gaussian { sigma } => {
                if *sigma <= T::zero() {
                    return Err(Error::InvalidParameter { name: "sigma", reason: "must be > 0" });
                }
            }
            InnovationKind::UniformCentered { half_width } => {
                if *half_width <= T::zero() {
                    return Err(Error::InvalidParameter {
                        name: "half_width",
                        reason: "must be > 0",
                    });
                }
            }
            InnovationKind::ExponentialCentered { rate } => {
                if *rate <= T::zero() {
                    return Err(Error::InvalidParameter { name: "rate", reason: "must be > 0" });
                }
            }
            InnovationKind::MartingaleDifference => {}
            InnovationKind::BmCoupled { n } => {
                if *n == 0 {
                    return Err(Error::InvalidParameter { name: "n", reason: "must be >= 1" });
                }
            }
        }
        Ok(InnovationModel { kind, seed })
    }

    pub fn gaussian(sigma: T, seed: u64) -> Self {
        Self::new(InnovationKind::Gaussian { sigma }, seed).expect("sigma > 0")
    }

    pub fn standard_gaussian(seed: u64) -> Self {
        Self::gaussian(T::one(), seed)
    }

    pub fn bm_coupled(n: usize, seed: u64) -> Result<Self> {
        Self::new(InnovationKind::BmCoupled { n }, seed)
    }

    pub fn kind(&self) -> &InnovationKind<T> {
        &self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Same variant and parameters, different seed.
    pub fn reseeded(&self, seed: u64) -> Self {
        InnovationModel { kind: self.kind.clone(), seed }
    }

    /// For the Brownian-coupled variant, reseed and retarget to path length
    /// `n`; other variants just reseed.
    pub fn for_cell(&self, n: usize, seed: u64) -> Self {
        let kind = match self.kind {
            InnovationKind::BmCoupled { .. } => InnovationKind::BmCoupled { n },
            ref k => k.clone(),
        };
        InnovationModel { kind, seed }
    }

    /// `xi_k`. The Brownian-coupled variant rejects indices outside `1..=n`.
    pub fn value(&self, k: i64) -> Result<T> {
        match &self.kind {
            InnovationKind::BmCoupled { n } => {
                if k < 1 || k > *n as i64 {
                    return Err(Error::IndexOutOfRange { index: k, lo: 1, hi: *n as i64 });
                }
                Ok(T::of(rng::standard_normal(self.seed, Stream::Main, k)))
            }
            _ => Ok(self.unchecked_value(k)),
        }
    }

    fn unchecked_value(&self, k: i64) -> T {
        match &self.kind {
            InnovationKind::Gaussian { sigma } => {
                *sigma * T::of(rng::standard_normal(self.seed, Stream::Main, k))
            }
            InnovationKind::UniformCentered { half_width } => {
                let u = rng::standard_uniform(self.seed, Stream::Main, k);
                *half_width * T::of(2.0 * u - 1.0)
            }
            InnovationKind::ExponentialCentered { rate } => {
                let e = rng::standard_exponential(self.seed, Stream::Main, k);
                T::of(e - 1.0) / *rate
            }
            InnovationKind::MartingaleDifference => {
                let eps = rng::standard_normal(self.seed, Stream::Main, k);
                let prev = rng::standard_normal(self.seed, Stream::Main, k - 1);
                let s = if prev < 0.0 { -1.0 } else { 1.0 };
                T::of(eps * s)
            }
            InnovationKind::BmCoupled { .. } => {
                T::of(rng::standard_normal(self.seed, Stream::Main, k))
            }
        }
    }

    /// Innovation demanded by the filter at index `k`. Identical to
    /// [`value`](Self::value) except that the Brownian-coupled variant serves
    /// out-of-range indices from a documented independent auxiliary stream:
    /// the coupling identity only concerns indices `1..=n`.
    pub fn filter_value(&self, k: i64) -> T {
        match &self.kind {
            InnovationKind::BmCoupled { n } => {
                if k < 1 || k > *n as i64 {
                    T::of(rng::standard_normal(self.seed, Stream::Auxiliary, k))
                } else {
                    T::of(rng::standard_normal(self.seed, Stream::Main, k))
                }
            }
            _ => self.unchecked_value(k),
        }
    }

    /// `xi_first..=xi_last`, deterministic in `(variant, seed, index)`.
    pub fn sample_stream(&self, first: i64, last: i64) -> Result<Vec<T>> {
        if first > last {
            return Err(Error::InvalidRange { first, last });
        }
        (first..=last).map(|k| self.value(k)).collect()
    }

    /// Whether the innovations are independent across indices (closed-form
    /// conditional expectations apply).
    pub fn is_iid(&self) -> bool {
        !matches!(self.kind, InnovationKind::MartingaleDifference)
    }

    /// Innovation standard deviation.
    pub fn sigma(&self) -> T {
        match &self.kind {
            InnovationKind::Gaussian { sigma } => *sigma,
            InnovationKind::UniformCentered { half_width } => {
                *half_width / T::of(3.0).sqrt()
            }
            InnovationKind::ExponentialCentered { rate } => T::one() / *rate,
            InnovationKind::MartingaleDifference => T::one(),
            InnovationKind::BmCoupled { .. } => T::one(),
        }
    }

    pub fn variance(&self) -> T {
        let s = self.sigma();
        s * s
    }

    /// `E |xi_0|` in closed form; used for committed truncation errors.
    pub fn expected_abs(&self) -> T {
        let sqrt_2_over_pi = (2.0 / std::f64::consts::PI).sqrt();
        match &self.kind {
            InnovationKind::Gaussian { sigma } => *sigma * T::of(sqrt_2_over_pi),
            InnovationKind::UniformCentered { half_width } => *half_width / T::of(2.0),
            InnovationKind::ExponentialCentered { rate } => {
                T::of(2.0 / std::f64::consts::E) / *rate
            }
            InnovationKind::MartingaleDifference => T::of(sqrt_2_over_pi),
            InnovationKind::BmCoupled { .. } => T::of(sqrt_2_over_pi),
        }
    }

    /// Density of the associated non-negative variable, where one exists in
    /// closed form (exponential: the raw positive variable; uniform: |xi|).
    pub fn positive_density(&self, x: f64) -> Option<f64> {
        match &self.kind {
            InnovationKind::ExponentialCentered { rate } => {
                let l = rate.as_f64();
                Some(if x < 0.0 { 0.0 } else { l * (-l * x).exp() })
            }
            InnovationKind::UniformCentered { half_width } => {
                let h = half_width.as_f64();
                Some(if (0.0..=h).contains(&x) { 1.0 / h } else { 0.0 })
            }
            _ => None,
        }
    }

    /// Upper tail `P(xi >= t)` of the same non-negative variable.
    pub fn positive_tail(&self, t: f64) -> Option<f64> {
        match &self.kind {
            InnovationKind::ExponentialCentered { rate } => {
                let l = rate.as_f64();
                Some(if t <= 0.0 { 1.0 } else { (-l * t).exp() })
            }
            InnovationKind::UniformCentered { half_width } => {
                let h = half_width.as_f64();
                Some(if t <= 0.0 { 1.0 } else { (1.0 - t / h).max(0.0) })
            }
            _ => None,
        }
    }

    /// Upper edge of the positive variable's support, if bounded.
    pub fn positive_support_end(&self) -> Option<f64> {
        match &self.kind {
            InnovationKind::UniformCentered { half_width } => Some(half_width.as_f64()),
            InnovationKind::ExponentialCentered { .. } => None,
            _ => None,
        }
    }
}

impl<T: Real> std::fmt::Display for InnovationModel<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            InnovationKind::Gaussian { sigma } => write!(f, "gaussian(sigma={sigma})")?,
            InnovationKind::UniformCentered { half_width } => {
                write!(f, "uniform(half_width={half_width})")?
            }
            InnovationKind::ExponentialCentered { rate } => {
                write!(f, "exponential(rate={rate})")?
            }
            InnovationKind::MartingaleDifference => write!(f, "martingale")?,
            InnovationKind::BmCoupled { n } => write!(f, "bm(n={n})")?,
        }
        write!(f, ",seed={}", self.seed)
    }
}

/// `max_{1<=j<=n} |xi_j| / norm`.
pub fn max_abs_over<T: Real>(stream: &[T], norm: T) -> T {
    assert!(!stream.is_empty(), "max_abs_over of empty stream");
    assert!(norm > T::zero(), "norm must be positive");
    let mut m = T::zero();
    for &x in stream {
        if x.abs() > m {
            m = x.abs();
        }
    }
    m / norm
}

/// Brownian motion on the grid `{k/n}`, stored through the exact partial
/// sums of its generating standard Gaussians: `W(k/n) = S_k / sqrt(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianGrid<T> {
    n: usize,
    partial: Vec<T>, // S_0..S_n of the generating standard normals
    scale: T,        // sqrt(n)
    seed: u64,
}

impl<T: Real> BrownianGrid<T> {
    /// Generate from `(seed, n)`. Shares the innovation stream of the
    /// Brownian-coupled model with the same seed, so the two are coupled.
    pub fn generate(seed: u64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter { name: "n", reason: "must be >= 1" });
        }
        let mut partial = Vec::with_capacity(n + 1);
        let mut s = T::zero();
        partial.push(s);
        for k in 1..=n as i64 {
            s = s + T::of(rng::standard_normal(seed, Stream::Main, k));
            partial.push(s);
        }
        Ok(BrownianGrid { n, partial, scale: T::of_usize(n).sqrt(), seed })
    }

    /// Grid coupled to a Brownian-coupled innovation model.
    pub fn coupled_to(model: &InnovationModel<T>) -> Result<Self> {
        match model.kind() {
            InnovationKind::BmCoupled { n } => Self::generate(model.seed(), *n),
            _ => Err(Error::UnsupportedModel {
                operation: "BrownianGrid::coupled_to",
                needed: "a Brownian-coupled innovation model",
            }),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `sqrt(n)`, the scale relating grid values to innovation sums.
    pub fn scale(&self) -> T {
        self.scale
    }

    /// `W(k/n)`.
    pub fn value(&self, k: usize) -> T {
        self.partial[k] / self.scale
    }

    /// Exact partial sum `S_k` of the generating Gaussians.
    pub fn innovation_partial_sum(&self, k: usize) -> T {
        self.partial[k]
    }

    /// Grid increment `W(k/n) - W((k-1)/n)`. Equals the generating Gaussian
    /// scaled by `1/sqrt(n)` up to partial-sum rounding.
    pub fn increment(&self, k: usize) -> T {
        self.value(k) - self.value(k - 1)
    }

    /// The standard Gaussian that drove step `k`; the innovation value of
    /// the coupled model at the same index.
    pub fn generator(&self, k: usize) -> T {
        T::of(rng::standard_normal(self.seed, Stream::Main, k as i64))
    }

    /// CSV export (k, w) with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,w\n");
        for k in 0..=self.n {
            out.push_str(&format!("{},{}\n", k, self.value(k)));
        }
        out
    }
}

/// CSV export of a stream (index, value) with a header row.
pub fn stream_to_csv<T: Real>(first: i64, values: &[T]) -> String {
    let mut out = String::from("index,value\n");
    for (off, v) in values.iter().enumerate() {
        out.push_str(&format!("{},{}\n", first + off as i64, v));
    }
    out
}
