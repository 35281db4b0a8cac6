//! The short-memory filter, partial-sum paths, and coupling statistics.

use crate::coefficients::CoefficientSequence;
use crate::error::{Error, Result};
use crate::innovations::{BrownianGrid, InnovationModel};
use crate::numeric;
use crate::scalar::Real;

/// Hard cap on `n * window` work per filtered path.
const WORK_CAPACITY: u128 = 1 << 34;

/// Options for [`filter_with`].
#[derive(Debug, Clone, Copy)]
pub struct FilterOptions<T> {
    /// Path normalization `b_n`; defaults to `sqrt(n)`.
    pub norm: Option<T>,
    /// Maximum admissible coefficient tail mass beyond the stored window.
    pub eps_tail: T,
}

impl<T: Real> Default for FilterOptions<T> {
    fn default() -> Self {
        FilterOptions { norm: None, eps_tail: T::of(1e-10) }
    }
}

/// Where a path came from; carried along for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub coefficients: String,
    pub model: String,
    pub seed: u64,
}

/// A filtered path `X_1..X_n` with its partial sums, the innovation partial
/// sums it was driven by, and the committed truncation error.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessPath<T> {
    n: usize,
    values: Vec<T>,             // X_1..X_n
    partial: Vec<T>,            // S_0..S_n, plain prefix sums in index order
    innovation_partial: Vec<T>, // S^xi_0..S^xi_n, same summation order
    norm: T,
    truncation_error: T,
    provenance: Provenance,
}

/// Filter `model` innovations through `coeffs` with default options.
pub fn filter<T: Real>(
    coeffs: &CoefficientSequence<T>,
    model: &InnovationModel<T>,
    n: usize,
) -> Result<ProcessPath<T>> {
    filter_with(coeffs, model, n, FilterOptions::default())
}

/// Filter with explicit normalization / tail threshold.
pub fn filter_with<T: Real>(
    coeffs: &CoefficientSequence<T>,
    model: &InnovationModel<T>,
    n: usize,
    opts: FilterOptions<T>,
) -> Result<ProcessPath<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter { name: "n", reason: "must be >= 1" });
    }
    let tail = coeffs.certified_tail();
    if tail > opts.eps_tail {
        return Err(Error::TailAboveThreshold {
            tail: tail.as_f64(),
            threshold: opts.eps_tail.as_f64(),
        });
    }
    let (lo, hi) = coeffs.window();
    let width = (hi - lo + 1) as u128;
    if n as u128 * width > WORK_CAPACITY {
        return Err(Error::CapacityExceeded {
            needed: n as u128 * width,
            capacity: WORK_CAPACITY,
        });
    }

    // innovations demanded on [1 - R, n + L]
    let first = 1 - hi;
    let last = n as i64 - lo;
    let buf: Vec<T> = (first..=last).map(|k| model.filter_value(k)).collect();
    let at = |k: i64| buf[(k - first) as usize];

    let order = coeffs.ordered_indices();
    let mut values = Vec::with_capacity(n);
    for k in 1..=n as i64 {
        let mut x = T::zero();
        for &j in &order {
            x = x + coeffs.value(j) * at(k - j);
        }
        values.push(x);
    }

    let norm = opts.norm.unwrap_or_else(|| T::of_usize(n).sqrt());
    if norm <= T::zero() {
        return Err(Error::InvalidParameter { name: "norm", reason: "must be > 0" });
    }

    let mut innovation_partial = Vec::with_capacity(n + 1);
    let mut s = T::zero();
    innovation_partial.push(s);
    for k in 1..=n as i64 {
        s = s + model.value(k)?;
        innovation_partial.push(s);
    }

    let truncation_error = tail * model.expected_abs();
    Ok(ProcessPath::assemble(
        values,
        innovation_partial,
        norm,
        truncation_error,
        Provenance {
            coefficients: coeffs.to_string(),
            model: model.to_string(),
            seed: model.seed(),
        },
    ))
}

/// Filter an arbitrary stream function. Used by truncation diagnostics and
/// tests; no tail gate is applied.
pub fn filter_stream<T: Real>(
    coeffs: &CoefficientSequence<T>,
    stream: impl Fn(i64) -> T,
    n: usize,
    norm: T,
) -> ProcessPath<T> {
    assert!(n >= 1 && norm > T::zero());
    let (lo, hi) = coeffs.window();
    let first = 1 - hi;
    let last = n as i64 - lo;
    let buf: Vec<T> = (first..=last).map(&stream).collect();
    let at = |k: i64| buf[(k - first) as usize];

    let order = coeffs.ordered_indices();
    let mut values = Vec::with_capacity(n);
    for k in 1..=n as i64 {
        let mut x = T::zero();
        for &j in &order {
            x = x + coeffs.value(j) * at(k - j);
        }
        values.push(x);
    }
    let mut innovation_partial = Vec::with_capacity(n + 1);
    let mut s = T::zero();
    innovation_partial.push(s);
    for k in 1..=n as i64 {
        s = s + stream(k);
        innovation_partial.push(s);
    }
    ProcessPath::assemble(
        values,
        innovation_partial,
        norm,
        T::zero(),
        Provenance { coefficients: coeffs.to_string(), model: "custom".into(), seed: 0 },
    )
}

impl<T: Real> ProcessPath<T> {
    fn assemble(
        values: Vec<T>,
        innovation_partial: Vec<T>,
        norm: T,
        truncation_error: T,
        provenance: Provenance,
    ) -> Self {
        let n = values.len();
        let mut partial = Vec::with_capacity(n + 1);
        let mut s = T::zero();
        partial.push(s);
        for &x in &values {
            s = s + x;
            partial.push(s);
        }
        ProcessPath { n, values, partial, innovation_partial, norm, truncation_error, provenance }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `X_k`, 1-based.
    pub fn value(&self, k: usize) -> T {
        self.values[k - 1]
    }

    /// `S_j`, with `S_0 = 0`.
    pub fn partial_sum(&self, j: usize) -> T {
        self.partial[j]
    }

    /// `S^xi_j`, with `S^xi_0 = 0`.
    pub fn innovation_partial_sum(&self, j: usize) -> T {
        self.innovation_partial[j]
    }

    pub fn norm(&self) -> T {
        self.norm
    }

    /// Committed l1 truncation error of the filter: certified coefficient
    /// tail times `E |xi_0|`.
    pub fn truncation_error(&self) -> T {
        self.truncation_error
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// `S_{floor(n t)} / b_n` for `t in [0, 1]`.
    pub fn scaled_partial_sum(&self, t: T) -> T {
        assert!(t >= T::zero() && t <= T::one(), "t must lie in [0, 1]");
        let j = (T::of_usize(self.n) * t).floor().as_f64() as usize;
        self.partial[j.min(self.n)] / self.norm
    }

    /// `max_{1<=j<=n} |S_j - a S^xi_j| / b_n`.
    pub fn coupling_stat(&self, a: T) -> T {
        let mut m = T::zero();
        for j in 1..=self.n {
            let d = (self.partial[j] - a * self.innovation_partial[j]).abs();
            if d > m {
                m = d;
            }
        }
        m / self.norm
    }

    /// `coupling_stat^p`; ensemble averaging lives in the harness.
    pub fn coupling_stat_pow(&self, a: T, p: T) -> T {
        assert!(p >= T::one(), "p must be >= 1");
        self.coupling_stat(a).powf(p)
    }

    /// `max_{0<=j<=n} |S_j / sqrt(n) - a W(j/n)|` against a coupled grid.
    ///
    /// Both the path and the coupled comparison are piecewise constant
    /// between grid points, so the grid maximum is the exact sup over t.
    pub fn sup_bm_distance(&self, a: T, grid: &BrownianGrid<T>) -> Result<T> {
        if grid.n() != self.n {
            return Err(Error::GridMismatch { expected: self.n, got: grid.n() });
        }
        if grid.scale() != self.norm {
            return Err(Error::InvalidParameter {
                name: "norm",
                reason: "sup_bm_distance requires b_n = sqrt(n)",
            });
        }
        let mut m = T::zero();
        for j in 0..=self.n {
            let d = (self.partial[j] / self.norm - a * grid.value(j)).abs();
            if d > m {
                m = d;
            }
        }
        Ok(m)
    }

    /// CSV export (j, x, s, s_xi) with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,x,s,s_xi\n");
        for j in 1..=self.n {
            out.push_str(&format!(
                "{},{},{},{}\n",
                j,
                self.values[j - 1],
                self.partial[j],
                self.innovation_partial[j]
            ));
        }
        out
    }
}

/// Result of the truncation-bound diagnostic: Monte Carlo mean of the sup
/// gap between the full-window path and its `|j| <= m` truncation, against
/// the bound `2 * tail_mass(m) * sup_j E ||U_j||`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationCheck<T> {
    pub mean_gap: T,
    pub bound: T,
    pub std_error: T,
    pub pass: bool,
}

/// Compare filtered paths with the full window and with the `|j| <= m`
/// truncation over Monte Carlo replicates; the sup gap must sit below the
/// l1-tail bound (allowing three standard errors of slack).
pub fn truncation_bound_check<T: Real>(
    coeffs: &CoefficientSequence<T>,
    model: &InnovationModel<T>,
    n: usize,
    m: u64,
    replicates: usize,
) -> Result<TruncationCheck<T>> {
    if replicates == 0 {
        return Err(Error::InvalidParameter { name: "replicates", reason: "must be >= 1" });
    }
    let (lo, hi) = coeffs.window();
    let width = (-lo).max(hi);
    let truncated = coeffs.truncated(m);
    let norm = T::of_usize(n).sqrt();

    let mut gaps = Vec::with_capacity(replicates);
    // sup_j E ||U_j||: per window offset j, the running mean over replicates
    // of max_l |sum_{k<=l} xi_{k-j}| / b_n
    let mut u_means = vec![T::zero(); (2 * width + 1) as usize];

    for rep in 0..replicates {
        let seed = crate::rng::derive_seed(model.seed(), n, rep);
        let cell = model.for_cell(n, seed);
        let full = filter_stream(coeffs, |k| cell.filter_value(k), n, norm);
        let trunc = filter_stream(&truncated, |k| cell.filter_value(k), n, norm);
        let mut gap = T::zero();
        for j in 0..=n {
            let d = ((full.partial_sum(j) - trunc.partial_sum(j)) / norm).abs();
            if d > gap {
                gap = d;
            }
        }
        gaps.push(gap);

        // prefix sums of the innovations over the widest demanded range
        let first = 1 - width;
        let last = n as i64 + width;
        let mut prefix = vec![T::zero(); (last - first + 2) as usize];
        let mut s = T::zero();
        for (i, k) in (first..=last).enumerate() {
            s = s + cell.filter_value(k);
            prefix[i + 1] = s;
        }
        let pref_at = |k: i64| prefix[(k - first + 1) as usize]; // sum over [first, k]
        for (ui, j) in (-width..=width).enumerate() {
            let mut mx = T::zero();
            let base = pref_at(-j); // sum over [first, -j] = prefix before k = 1 - j
            for l in 1..=n as i64 {
                let v = (pref_at(l - j) - base).abs();
                if v > mx {
                    mx = v;
                }
            }
            u_means[ui] = u_means[ui] + mx / norm;
        }
    }

    let reps = T::of_usize(replicates);
    let mut sup_u = T::zero();
    for u in &u_means {
        let mean_u = *u / reps;
        if mean_u > sup_u {
            sup_u = mean_u;
        }
    }
    let bound = T::of(2.0) * coeffs.tail_mass(m) * sup_u;
    let mean_gap = numeric::mean(&gaps);
    let std_error = if replicates > 1 {
        (numeric::sample_variance(&gaps) / reps).sqrt()
    } else {
        T::zero()
    };
    let pass = mean_gap <= bound + T::of(3.0) * std_error;
    Ok(TruncationCheck { mean_gap, bound, std_error, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::CoefficientSequence;
    use crate::innovations::InnovationModel;
    use crate::rng::{self, Stream};

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn identity_filter_reproduces_innovations_exactly() {
        let coeffs = CoefficientSequence::<f64>::identity();
        let model = InnovationModel::gaussian(1.0, 17);
        let path = filter(&coeffs, &model, 200).unwrap();
        let xs = model.sample_stream(1, 200).unwrap();
        for k in 1..=200 {
            assert_eq!(path.value(k), xs[k - 1]);
            assert_eq!(path.partial_sum(k), path.innovation_partial_sum(k));
        }
        assert_eq!(path.coupling_stat(1.0), 0.0);
        assert_eq!(path.truncation_error(), 0.0);
    }

    #[test]
    fn convex_pair_on_constant_stream_is_constant() {
        let coeffs = CoefficientSequence::finite(&[(0, 0.5f64), (1, 0.5)]).unwrap();
        let path = filter_stream(&coeffs, |_| 1.0, 50, 1.0);
        for k in 1..=50 {
            assert!((path.value(k) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn impulse_response_recovers_coefficients() {
        let coeffs = CoefficientSequence::two_sided_geometric(0.5f64, 6).unwrap();
        // unit impulse at index 0
        let path = filter_stream(&coeffs, |k| if k == 0 { 1.0 } else { 0.0 }, 6, 1.0);
        for k in 1..=6i64 {
            assert_eq!(path.value(k as usize), coeffs.value(k));
        }
    }

    #[test]
    fn scaled_partial_sum_floor_arithmetic() {
        let coeffs = CoefficientSequence::<f64>::identity();
        let model = InnovationModel::gaussian(1.0, 3);
        let path = filter_with(
            &coeffs,
            &model,
            10,
            FilterOptions { norm: Some(2.0), eps_tail: 1e-10 },
        )
        .unwrap();
        assert_eq!(path.scaled_partial_sum(0.0), 0.0);
        assert_eq!(path.scaled_partial_sum(0.5), path.partial_sum(5) / 2.0);
        assert_eq!(path.scaled_partial_sum(1.0), path.partial_sum(10) / 2.0);
    }

    #[test]
    fn pure_shift_coupling_stat_closed_form() {
        // {a_1 = 1}: S_j - S^xi_j = xi_0 - xi_j
        let coeffs = CoefficientSequence::finite(&[(1, 1.0f64)]).unwrap();
        let model = InnovationModel::gaussian(1.0, 23);
        let n = 300;
        let path = filter(&coeffs, &model, n).unwrap();
        let xs = model.sample_stream(0, n as i64).unwrap();
        let mut expect = 0.0f64;
        for j in 1..=n {
            expect = expect.max((xs[0] - xs[j]).abs());
        }
        let got = path.coupling_stat(1.0);
        assert!(rel_close(got, expect / (n as f64).sqrt(), 1e-12), "{got} vs {expect}");
    }

    #[test]
    fn lp_coupling_stat_examples() {
        let coeffs = CoefficientSequence::finite(&[(1, 1.0f64)]).unwrap();
        let model = InnovationModel::gaussian(1.0, 29);
        let path = filter(&coeffs, &model, 100).unwrap();
        let d = path.coupling_stat(1.0);
        assert_eq!(path.coupling_stat_pow(1.0, 1.0), d);
        assert!(rel_close(path.coupling_stat_pow(1.0, 2.0), d * d, 1e-14));
        let id = filter(&CoefficientSequence::identity(), &model, 100).unwrap();
        assert_eq!(id.coupling_stat_pow(1.0, 3.0), 0.0);
    }

    #[test]
    fn sup_bm_distance_identity_is_exactly_zero() {
        for n in [37usize, 100, 256] {
            for seed in [1u64, 2, 99] {
                let model = InnovationModel::<f64>::bm_coupled(n, seed).unwrap();
                let grid = crate::innovations::BrownianGrid::coupled_to(&model).unwrap();
                let path = filter(&CoefficientSequence::identity(), &model, n).unwrap();
                assert_eq!(path.sup_bm_distance(1.0, &grid).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn sup_bm_distance_scalar_filter_power_of_two_is_exact_zero() {
        // {a_0 = 2}: scaling by a power of two commutes with rounding
        let n = 128;
        let model = InnovationModel::<f64>::bm_coupled(n, 11).unwrap();
        let grid = crate::innovations::BrownianGrid::coupled_to(&model).unwrap();
        let coeffs = CoefficientSequence::finite(&[(0, 2.0f64)]).unwrap();
        let path = filter(&coeffs, &model, n).unwrap();
        assert_eq!(path.sup_bm_distance(2.0, &grid).unwrap(), 0.0);
        // generic scalar stays at rounding level
        let c17 = CoefficientSequence::finite(&[(0, 1.7f64)]).unwrap();
        let p17 = filter(&c17, &model, n).unwrap();
        assert!(p17.sup_bm_distance(1.7, &grid).unwrap() < 1e-13);
    }

    #[test]
    fn coupling_stat_vanishes_for_scalar_filters() {
        // X_k = c xi_k makes the statistic zero through A = c alone; exact
        // when c is a power of two, rounding-level otherwise
        let model = InnovationModel::gaussian(1.0, 41);
        let c2 = CoefficientSequence::finite(&[(0, 2.0f64)]).unwrap();
        let p2 = filter(&c2, &model, 200).unwrap();
        assert_eq!(p2.coupling_stat(2.0), 0.0);
        let c17 = CoefficientSequence::finite(&[(0, 1.7f64)]).unwrap();
        let p17 = filter(&c17, &model, 200).unwrap();
        assert!(p17.coupling_stat(1.7) < 1e-13);
    }

    #[test]
    fn sup_bm_distance_rejects_mismatched_n() {
        let model = InnovationModel::<f64>::bm_coupled(64, 1).unwrap();
        let other = InnovationModel::<f64>::bm_coupled(32, 1).unwrap();
        let grid = crate::innovations::BrownianGrid::coupled_to(&other).unwrap();
        let path = filter(&CoefficientSequence::identity(), &model, 64).unwrap();
        assert!(matches!(path.sup_bm_distance(1.0, &grid), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn filter_linearity_on_finite_supports() {
        let a = CoefficientSequence::finite(&[(-1, 0.3f64), (0, 1.0), (2, -0.5)]).unwrap();
        let b = CoefficientSequence::finite(&[(0, 0.25f64), (1, 0.75)]).unwrap();
        let (alpha, beta) = (1.5f64, -2.0f64);
        let combo: Vec<(i64, f64)> = (-1..=2)
            .map(|j| (j, alpha * a.value(j) + beta * b.value(j)))
            .collect();
        let c = CoefficientSequence::finite(&combo).unwrap();
        let stream = |k: i64| rng::standard_normal(77, Stream::Scratch, k);
        let n = 64;
        let pa = filter_stream(&a, stream, n, 1.0);
        let pb = filter_stream(&b, stream, n, 1.0);
        let pc = filter_stream(&c, stream, n, 1.0);
        for k in 1..=n {
            let want = alpha * pa.value(k) + beta * pb.value(k);
            assert!(rel_close(pc.value(k), want, 1e-12));
        }
    }

    #[test]
    fn filter_shift_equivariance() {
        let coeffs = CoefficientSequence::finite(&[(-1, 0.2f64), (0, 1.0), (1, 0.5)]).unwrap();
        let stream = |k: i64| rng::standard_normal(5, Stream::Scratch, k);
        let shifted = |k: i64| stream(k + 1);
        let n = 80;
        let p = filter_stream(&coeffs, stream, n + 1, 1.0);
        let q = filter_stream(&coeffs, shifted, n, 1.0);
        for k in 1..=n {
            assert_eq!(q.value(k), p.value(k + 1));
        }
    }

    #[test]
    fn stored_partials_equal_prefix_sums() {
        let coeffs = CoefficientSequence::two_sided_geometric(0.5f64, 40).unwrap();
        let model = InnovationModel::gaussian(1.0, 31);
        let path = filter(&coeffs, &model, 500).unwrap();
        let mut s = 0.0;
        for k in 1..=500 {
            s += path.value(k);
            assert!(rel_close(path.partial_sum(k), s, 1e-12));
        }
    }

    #[test]
    fn tail_gate_rejects_narrow_windows() {
        let coeffs = CoefficientSequence::two_sided_geometric(0.5f64, 8).unwrap();
        let model = InnovationModel::gaussian(1.0, 1);
        assert!(matches!(
            filter(&coeffs, &model, 10),
            Err(Error::TailAboveThreshold { .. })
        ));
        // permissive threshold admits it
        let opts = FilterOptions { norm: None, eps_tail: 1.0 };
        assert!(filter_with(&coeffs, &model, 10, opts).is_ok());
    }

    #[test]
    fn committed_truncation_error_monotone_in_window() {
        let model = InnovationModel::gaussian(1.0, 1);
        let mut prev = f64::INFINITY;
        for w in [36usize, 40, 48] {
            let coeffs = CoefficientSequence::two_sided_geometric(0.5f64, w).unwrap();
            let path = filter(&coeffs, &model, 16).unwrap();
            assert!(path.truncation_error() <= prev);
            prev = path.truncation_error();
        }
    }

    #[test]
    fn coupling_trend_decreases_for_geometric_coefficients() {
        // medians over 200 seeds shrink from n = 256 to n = 16384; a light
        // version (fewer replicates, shorter top) runs in unit-test budget
        let coeffs = CoefficientSequence::two_sided_geometric(0.5f64, 48).unwrap();
        let a = coeffs.total_sum().value;
        let med = |n: usize| {
            let v: Vec<f64> = (0..60)
                .map(|s| {
                    let m = InnovationModel::gaussian(1.0, rng::derive_seed(400, n, s));
                    filter(&coeffs, &m, n).unwrap().coupling_stat(a)
                })
                .collect();
            crate::numeric::median(&v)
        };
        let (lo, hi) = (med(256), med(4096));
        assert!(hi < lo, "median at 4096 = {hi}, at 256 = {lo}");
    }

    #[test]
    fn truncation_gap_zero_when_m_covers_window() {
        let coeffs = CoefficientSequence::finite(&[(-2, 0.5f64), (0, 1.0), (1, 0.25)]).unwrap();
        let model = InnovationModel::gaussian(1.0, 9);
        let check = truncation_bound_check(&coeffs, &model, 64, 2, 10).unwrap();
        assert_eq!(check.mean_gap, 0.0);
        assert!(check.pass);
        let id = CoefficientSequence::<f64>::identity();
        let check0 = truncation_bound_check(&id, &model, 64, 0, 5).unwrap();
        assert_eq!(check0.mean_gap, 0.0);
    }

    #[test]
    fn truncation_gap_shrinks_with_m_and_meets_bound() {
        let coeffs = CoefficientSequence::two_sided_geometric(0.5f64, 20).unwrap();
        let model = InnovationModel::gaussian(1.0, 101);
        let c5 = truncation_bound_check(&coeffs, &model, 256, 5, 60).unwrap();
        let c10 = truncation_bound_check(&coeffs, &model, 256, 10, 60).unwrap();
        assert!(c10.mean_gap < c5.mean_gap);
        assert!(c5.pass, "gap {} vs bound {}", c5.mean_gap, c5.bound);
        assert!(c10.pass, "gap {} vs bound {}", c10.mean_gap, c10.bound);
    }

    #[test]
    fn path_csv_has_header_and_rows() {
        let model = InnovationModel::gaussian(1.0, 2);
        let path = filter(&CoefficientSequence::identity(), &model, 3).unwrap();
        let csv = path.to_csv();
        assert!(csv.starts_with("j,x,s,s_xi\n"));
        assert_eq!(csv.lines().count(), 4);
    }
}
