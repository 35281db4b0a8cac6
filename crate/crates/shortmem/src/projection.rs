//! Martingale-approximation machinery for causal filters of iid
//! innovations: projection decompositions, the maximal-inequality check,
//! the coboundary decomposition, quadratic-variation paths, the
//! summation-by-parts residual, and weighted partial sums.
//!
//! The filtration is the natural one generated by the innovations, so
//! conditional expectations have closed form: conditioning on `F_k` zeroes
//! every innovation with index above `k`.

use crate::coefficients::CoefficientSequence;
use crate::error::{Error, Result};
use crate::innovations::InnovationModel;
use crate::numeric::{self, CompensatedSum};
use crate::process::ProcessPath;
use crate::rng;
use crate::scalar::Real;
use crate::weights::WeightFn;

fn require_causal<T: Real>(coeffs: &CoefficientSequence<T>) -> Result<()> {
    if coeffs.is_causal() {
        Ok(())
    } else {
        Err(Error::NonCausal)
    }
}

fn require_iid<T: Real>(model: &InnovationModel<T>, operation: &'static str) -> Result<()> {
    if model.is_iid() {
        Ok(())
    } else {
        Err(Error::UnsupportedModel { operation, needed: "independent innovations" })
    }
}

/// Projection components of one `X_k`: `c_i = a_i xi_{k-i}` for
/// `i = 0..=truncation`, with the certified reconstruction residual bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionComponents<T> {
    pub components: Vec<T>,
    pub truncation: usize,
    /// `tail_mass(truncation) * max |xi|` observed over the touched range.
    pub residual_bound: T,
}

impl<T: Real> ProjectionComponents<T> {
    /// `sum_{i <= truncation} c_i`, in ascending `i`.
    pub fn reconstruct(&self) -> T {
        let mut acc = CompensatedSum::new();
        for &c in &self.components {
            acc.add(c);
        }
        acc.value()
    }
}

/// Decompose `X_k` into its projection components along the natural
/// filtration. Requires causal coefficients and iid innovations.
pub fn project<T: Real>(
    coeffs: &CoefficientSequence<T>,
    model: &InnovationModel<T>,
    k: i64,
    truncation: usize,
) -> Result<ProjectionComponents<T>> {
    require_causal(coeffs)?;
    require_iid(model, "project")?;
    let mut components = Vec::with_capacity(truncation + 1);
    let mut max_abs = T::zero();
    for i in 0..=truncation as i64 {
        let xi = model.filter_value(k - i);
        if xi.abs() > max_abs {
            max_abs = xi.abs();
        }
        components.push(coeffs.value(i) * xi);
    }
    let residual_bound = coeffs.tail_mass(truncation as u64) * max_abs;
    Ok(ProjectionComponents { components, truncation, residual_bound })
}

/// Monte Carlo check of the L2 maximal inequality for one projection tap:
/// `E max_j |sum_{k<=j} a_i xi_{k-i}|^2 <= 4 n p_i^2` with
/// `p_i = |a_i| sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaximalCheck<T> {
    pub empirical: T,
    pub bound: T,
    pub std_error: T,
    pub pass: bool,
}

pub fn doob_maximal_check<T: Real>(
    coeffs: &CoefficientSequence<T>,
    model: &InnovationModel<T>,
    n: usize,
    tap: usize,
    replicates: usize,
) -> Result<MaximalCheck<T>> {
    require_causal(coeffs)?;
    if n == 0 || replicates == 0 {
        return Err(Error::InvalidParameter { name: "n/replicates", reason: "must be >= 1" });
    }
    let a = coeffs.value(tap as i64);
    let p = a.abs() * model.sigma();
    let bound = T::of(4.0) * T::of_usize(n) * p * p;

    let mut samples = Vec::with_capacity(replicates);
    for rep in 0..replicates {
        let seed = rng::derive_seed(model.seed(), n, rep);
        let cell = model.for_cell(n, seed);
        let mut s = T::zero();
        let mut max_sq = T::zero();
        for k in 1..=n as i64 {
            s = s + a * cell.filter_value(k - tap as i64);
            let sq = s * s;
            if sq > max_sq {
                max_sq = sq;
            }
        }
        samples.push(max_sq);
    }
    let empirical = numeric::mean(&samples);
    let std_error = if replicates > 1 {
        (numeric::sample_variance(&samples) / T::of_usize(replicates)).sqrt()
    } else {
        T::zero()
    };
    let pass = empirical <= bound + T::of(3.0) * std_error;
    Ok(MaximalCheck { empirical, bound, std_error, pass })
}

/// Coboundary decomposition of order `m` for a causal filter of iid
/// innovations:
///
/// * `Y_k = X_k - E(X_k | F_{k-m}) = sum_{i=0}^{m-1} a_i xi_{k-i}`
/// * `theta_k = sum_{j=k}^{k+m-1} E(Y_j | F_k)`
/// * `Q_k = theta_k - Y_k`
/// * martingale increments `theta_k - E(theta_k | F_{k-1}) = A_m xi_k`
///
/// and `S_n^(Y) = M_n + Q_0 - Q_n` holds to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct CoboundaryDecomposition<T> {
    order: usize,
    short_sum: T, // A_m = sum_{i=0}^{m-1} a_i
    truncated: Vec<T>,  // Y_0..Y_n
    theta: Vec<T>,      // theta_0..theta_n
    corrector: Vec<T>,  // Q_0..Q_n
    martingale: Vec<T>, // M_0..M_n, prefix sums of A_m xi_k
}

pub fn coboundary<T: Real>(
    coeffs: &CoefficientSequence<T>,
    model: &InnovationModel<T>,
    m: usize,
    n: usize,
) -> Result<CoboundaryDecomposition<T>> {
    require_causal(coeffs)?;
    require_iid(model, "coboundary")?;
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter { name: "m/n", reason: "must be >= 1" });
    }
    // innovations demanded on [1 - m, n]
    let first = 1 - m as i64;
    let buf: Vec<T> = (first..=n as i64).map(|k| model.filter_value(k)).collect();
    let xi = |k: i64| buf[(k - first) as usize];

    let mut short_sum = CompensatedSum::new();
    for i in 0..m as i64 {
        short_sum.add(coeffs.value(i));
    }
    let a_m = short_sum.value();

    let y_at = |k: i64| {
        let mut acc = T::zero();
        for i in 0..m as i64 {
            acc = acc + coeffs.value(i) * xi(k - i);
        }
        acc
    };
    // E(Y_j | F_k) for j >= k keeps only terms with j - i <= k
    let theta_at = |k: i64| {
        let mut acc = T::zero();
        for d in 0..m as i64 {
            for i in d..m as i64 {
                acc = acc + coeffs.value(i) * xi(k + d - i);
            }
        }
        acc
    };

    let mut truncated = Vec::with_capacity(n + 1);
    let mut theta = Vec::with_capacity(n + 1);
    let mut corrector = Vec::with_capacity(n + 1);
    let mut martingale = Vec::with_capacity(n + 1);
    let mut mart = T::zero();
    martingale.push(mart);
    for k in 0..=n as i64 {
        let y = y_at(k);
        let th = theta_at(k);
        truncated.push(y);
        theta.push(th);
        corrector.push(th - y);
        if k >= 1 {
            mart = mart + a_m * xi(k);
            martingale.push(mart);
        }
    }
    Ok(CoboundaryDecomposition { order: m, short_sum: a_m, truncated, theta, corrector, martingale })
}

impl<T: Real> CoboundaryDecomposition<T> {
    pub fn order(&self) -> usize {
        self.order
    }

    /// `A_m = sum_{i=0}^{m-1} a_i`.
    pub fn short_sum(&self) -> T {
        self.short_sum
    }

    pub fn len(&self) -> usize {
        self.martingale.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `Y_k`, defined for `k = 0..=n`.
    pub fn truncated(&self, k: usize) -> T {
        self.truncated[k]
    }

    pub fn theta(&self, k: usize) -> T {
        self.theta[k]
    }

    /// `Q_k = theta_k - Y_k`.
    pub fn corrector(&self, k: usize) -> T {
        self.corrector[k]
    }

    /// `M_k`, with `M_0 = 0`.
    pub fn martingale(&self, k: usize) -> T {
        self.martingale[k]
    }

    pub fn martingale_increment(&self, k: usize) -> T {
        self.martingale[k] - self.martingale[k - 1]
    }

    /// `S_j^(Y) = sum_{k=1..j} Y_k`.
    pub fn truncated_partial_sum(&self, j: usize) -> T {
        let mut acc = CompensatedSum::new();
        for k in 1..=j {
            acc.add(self.truncated[k]);
        }
        acc.value()
    }

    /// `|S_n^(Y) - M_n - Q_0 + Q_n|`; an algebraic identity, so this is
    /// rounding noise.
    pub fn identity_residual(&self) -> T {
        let n = self.len();
        (self.truncated_partial_sum(n) - self.martingale[n] - self.corrector[0]
            + self.corrector[n])
            .abs()
    }

    /// `max_j |S_j^(Y)|`, the scale the identity residual is judged against.
    pub fn partial_sum_scale(&self) -> T {
        let mut s = T::zero();
        let mut m = T::zero();
        for k in 1..=self.len() {
            s = s + self.truncated[k];
            if s.abs() > m {
                m = s.abs();
            }
        }
        m
    }

    /// `n^{-1/2} max_j |Q_0 - Q_j|`, the corrector sweep that must vanish.
    pub fn corrector_sweep(&self) -> T {
        let n = self.len();
        let mut m = T::zero();
        for k in 0..=n {
            let d = (self.corrector[0] - self.corrector[k]).abs();
            if d > m {
                m = d;
            }
        }
        m / T::of_usize(n).sqrt()
    }

    /// CSV export (k, y, theta, q, m) with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,y,theta,q,m\n");
        for k in 0..=self.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                k, self.truncated[k], self.theta[k], self.corrector[k], self.martingale[k]
            ));
        }
        out
    }
}

/// `(1/n) sum_{j <= floor(nt)} (A_m xi_j)^2`, the quadratic-variation path
/// of the order-`m` martingale part.
pub fn quadratic_variation<T: Real>(
    coeffs: &CoefficientSequence<T>,
    model: &InnovationModel<T>,
    m: usize,
    n: usize,
    t: T,
) -> Result<T> {
    weighted_quadratic_variation(coeffs, model, &WeightFn::Constant(T::one()), m, n, t)
}

/// `(1/n) sum_{j <= floor(nt)} g^2(j/n) (A_m xi_j)^2`.
pub fn weighted_quadratic_variation<T: Real>(
    coeffs: &CoefficientSequence<T>,
    model: &InnovationModel<T>,
    weight: &WeightFn<T>,
    m: usize,
    n: usize,
    t: T,
) -> Result<T> {
    require_causal(coeffs)?;
    require_iid(model, "quadratic_variation")?;
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter { name: "m/n", reason: "must be >= 1" });
    }
    if t < T::zero() || t > T::one() {
        return Err(Error::InvalidParameter { name: "t", reason: "must lie in [0, 1]" });
    }
    let mut short_sum = CompensatedSum::new();
    for i in 0..m as i64 {
        short_sum.add(coeffs.value(i));
    }
    let a_m = short_sum.value();
    let nf = T::of_usize(n);
    let top = (nf * t).floor().as_f64() as usize;
    let mut acc = CompensatedSum::new();
    for j in 1..=top.min(n) as i64 {
        let g = weight.eval(T::of(j as f64) / nf);
        let z = a_m * model.filter_value(j);
        acc.add(g * g * z * z);
    }
    Ok(acc.value() / nf)
}

/// Residual of the summation-by-parts identity
/// `sum_j G_j psi_j = G_N U_N + sum_{j<N} (G_j - G_{j+1}) U_j` with `U_j`
/// the prefix sums of `psi`. Zero in exact arithmetic.
pub fn abel_residual<T: Real>(g_values: &[T], psi_values: &[T]) -> T {
    assert_eq!(g_values.len(), psi_values.len(), "sequences must have equal length");
    assert!(!g_values.is_empty(), "sequences must be nonempty");
    let n = g_values.len();
    let mut lhs = CompensatedSum::new();
    for (g, p) in g_values.iter().zip(psi_values) {
        lhs.add(*g * *p);
    }
    let mut prefix = Vec::with_capacity(n);
    let mut s = T::zero();
    for &p in psi_values {
        s = s + p;
        prefix.push(s);
    }
    let mut rhs = CompensatedSum::new();
    rhs.add(g_values[n - 1] * prefix[n - 1]);
    for j in 0..n - 1 {
        rhs.add((g_values[j] - g_values[j + 1]) * prefix[j]);
    }
    (lhs.value() - rhs.value()).abs()
}

/// `n^{-1/2} sum_{i <= floor(nt)} g(i/n) X_i` over an already filtered path.
pub fn weighted_partial_sum<T: Real>(path: &ProcessPath<T>, weight: &WeightFn<T>, t: T) -> T {
    assert!(t >= T::zero() && t <= T::one(), "t must lie in [0, 1]");
    let n = path.n();
    let nf = T::of_usize(n);
    let top = (nf * t).floor().as_f64() as usize;
    let mut acc = CompensatedSum::new();
    for i in 1..=top.min(n) {
        acc.add(weight.eval(T::of_usize(i) / nf) * path.value(i));
    }
    acc.value() / nf.sqrt()
}

/// `||E(X_k | F_{k-cut})||_2 = sigma * sqrt(sum_{i >= cut} a_i^2)`
/// (window-truncated): the computable surrogate for the remote-past
/// condition under iid innovations. Must vanish as `cut` grows.
pub fn remote_past_norm<T: Real>(
    coeffs: &CoefficientSequence<T>,
    sigma: T,
    cut: usize,
) -> Result<T> {
    require_causal(coeffs)?;
    let (_, hi) = coeffs.window();
    let mut acc = CompensatedSum::new();
    for i in cut as i64..=hi {
        let a = coeffs.value(i);
        acc.add(a * a);
    }
    Ok(sigma * acc.value().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::CoefficientSequence;
    use crate::innovations::{InnovationKind, InnovationModel};

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    /// Brute-force conditional expectation of a linear functional of iid
    /// innovations given `F_j`: zero out every innovation above `j`.
    /// Linearity makes this exact for the closed forms under test.
    struct BruteStream {
        first: i64,
        values: Vec<f64>,
    }

    impl BruteStream {
        fn from_model(model: &InnovationModel<f64>, first: i64, last: i64) -> Self {
            BruteStream {
                first,
                values: (first..=last).map(|k| model.filter_value(k)).collect(),
            }
        }

        fn xi(&self, k: i64, measurable_up_to: i64) -> f64 {
            if k > measurable_up_to {
                0.0
            } else {
                self.values[(k - self.first) as usize]
            }
        }

        fn y(&self, coeffs: &CoefficientSequence<f64>, m: usize, k: i64, cond: i64) -> f64 {
            (0..m as i64).map(|i| coeffs.value(i) * self.xi(k - i, cond)).sum()
        }

        fn theta(&self, coeffs: &CoefficientSequence<f64>, m: usize, k: i64, cond: i64) -> f64 {
            // sum_{j=k}^{k+m-1} E(Y_j | F_cond), evaluated by zeroing
            (k..k + m as i64).map(|j| self.y(coeffs, m, j, cond)).sum()
        }
    }

    #[test]
    fn project_identity_single_component() {
        let id = CoefficientSequence::<f64>::identity();
        let model = InnovationModel::gaussian(1.0, 5);
        let p = project(&id, &model, 10, 0).unwrap();
        assert_eq!(p.components.len(), 1);
        assert_eq!(p.components[0], model.value(10).unwrap());
        assert_eq!(p.residual_bound, 0.0);
    }

    #[test]
    fn project_pair_reconstructs_exactly() {
        let pair = CoefficientSequence::finite(&[(0, 1.0f64), (1, 1.0)]).unwrap();
        let model = InnovationModel::gaussian(1.0, 6);
        let p = project(&pair, &model, 4, 1).unwrap();
        let x = model.value(4).unwrap() + model.value(3).unwrap();
        assert!(rel_close(p.reconstruct(), x, 1e-15));
    }

    #[test]
    fn project_geometric_residual_within_tail_bound() {
        let coeffs = CoefficientSequence::causal_geometric(0.5f64, 60).unwrap();
        let model = InnovationModel::gaussian(1.0, 7);
        let trunc = 20;
        let p = project(&coeffs, &model, 0, trunc).unwrap();
        // reconstruct X_0 from the full window
        let mut x = 0.0;
        for i in 0..=60i64 {
            x += coeffs.value(i) * model.filter_value(-i);
        }
        let residual = (x - p.reconstruct()).abs();
        // the bound only sees |xi| over 0..=trunc, so allow the full-window max
        let mut max_abs: f64 = 0.0;
        for i in 0..=60i64 {
            max_abs = max_abs.max(model.filter_value(-i).abs());
        }
        assert!(residual <= coeffs.tail_mass(trunc as u64) * max_abs);
        assert!(p.residual_bound <= coeffs.tail_mass(trunc as u64) * max_abs);
    }

    #[test]
    fn project_rejects_non_causal() {
        let c = CoefficientSequence::two_sided_geometric(0.5f64, 4).unwrap();
        let model = InnovationModel::gaussian(1.0, 1);
        assert!(matches!(project(&c, &model, 0, 2), Err(Error::NonCausal)));
    }

    #[test]
    fn maximal_check_zero_tap_is_degenerate() {
        let c = CoefficientSequence::finite(&[(0, 1.0f64)]).unwrap();
        let model = InnovationModel::gaussian(1.0, 2);
        // tap 1 has a_1 = 0: empirical 0 <= bound 0
        let r = doob_maximal_check(&c, &model, 50, 1, 20).unwrap();
        assert_eq!(r.empirical, 0.0);
        assert_eq!(r.bound, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn maximal_check_random_walk_within_bound() {
        let c = CoefficientSequence::<f64>::identity();
        let model = InnovationModel::gaussian(1.0, 3);
        let r = doob_maximal_check(&c, &model, 1000, 0, 400).unwrap();
        assert!(r.pass, "empirical {} vs bound {}", r.empirical, r.bound);
        // E max |S_j|^2 is comfortably below 4n but above n
        assert!(r.empirical > 1000.0 && r.empirical < 4000.0);
    }

    #[test]
    fn maximal_check_scales_quadratically() {
        let c1 = CoefficientSequence::finite(&[(0, 1.0f64)]).unwrap();
        let c3 = CoefficientSequence::finite(&[(0, 3.0f64)]).unwrap();
        let model = InnovationModel::gaussian(1.0, 4);
        let r1 = doob_maximal_check(&c1, &model, 200, 0, 100).unwrap();
        let r3 = doob_maximal_check(&c3, &model, 200, 0, 100).unwrap();
        assert!(rel_close(r3.empirical, 9.0 * r1.empirical, 1e-10));
        assert!(rel_close(r3.bound, 9.0 * r1.bound, 1e-12));
        assert_eq!(r1.pass, r3.pass);
    }

    #[test]
    fn coboundary_m1_has_zero_corrector() {
        let c = CoefficientSequence::causal_geometric(0.5f64, 10).unwrap();
        let model = InnovationModel::gaussian(1.0, 9);
        let d = coboundary(&c, &model, 1, 100).unwrap();
        for k in 0..=100 {
            assert_eq!(d.corrector(k), 0.0);
            assert_eq!(d.theta(k), d.truncated(k));
        }
        assert!(d.identity_residual() < 1e-12 * (1.0 + d.partial_sum_scale()));
    }

    #[test]
    fn coboundary_increments_match_short_sum() {
        let c = CoefficientSequence::finite(&[(0, 1.0f64), (1, 1.0)]).unwrap();
        let model = InnovationModel::gaussian(1.0, 10);
        let d = coboundary(&c, &model, 2, 500).unwrap();
        assert_eq!(d.short_sum(), 2.0);
        for k in 1..=500 {
            let want = 2.0 * model.value(k as i64).unwrap();
            assert!((d.martingale_increment(k) - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn coboundary_identity_holds_for_various_orders() {
        let c = CoefficientSequence::causal_geometric(0.5f64, 30).unwrap();
        let model = InnovationModel::gaussian(1.0, 11);
        for m in [1usize, 2, 5, 40] {
            // m beyond the window is allowed; extra terms vanish
            let d = coboundary(&c, &model, m, 400).unwrap();
            let scale = d.partial_sum_scale();
            assert!(
                d.identity_residual() < 1e-10 * (1.0 + scale),
                "m = {m}: residual {}",
                d.identity_residual()
            );
        }
    }

    #[test]
    fn coboundary_identity_holds_at_every_prefix() {
        let c = CoefficientSequence::causal_geometric(0.5f64, 20).unwrap();
        let model = InnovationModel::gaussian(1.0, 13);
        let n = 500;
        let d = coboundary(&c, &model, 3, n).unwrap();
        let scale = 1.0 + d.partial_sum_scale();
        let mut s_y = 0.0;
        for j in 1..=n {
            s_y += d.truncated(j);
            let residual = (s_y - d.martingale(j) - d.corrector(0) + d.corrector(j)).abs();
            assert!(residual < 1e-10 * scale, "j = {j}: residual {residual}");
        }
    }

    #[test]
    fn coboundary_matches_brute_force_conditionals_on_short_streams() {
        let c = CoefficientSequence::finite(&[(0, 0.7f64), (1, 0.5), (2, -0.3)]).unwrap();
        let model = InnovationModel::gaussian(1.0, 12);
        for m in [1usize, 2, 3] {
            let n = 20;
            let d = coboundary(&c, &model, m, n).unwrap();
            let brute = BruteStream::from_model(&model, 1 - m as i64 - 4, n as i64 + 4);
            for k in 0..=n as i64 {
                let y = brute.y(&c, m, k, i64::MAX >> 1);
                assert!(rel_close(d.truncated(k as usize), y, 1e-12), "Y_{k} m={m}");
                let th = brute.theta(&c, m, k, k);
                assert!(rel_close(d.theta(k as usize), th, 1e-12), "theta_{k} m={m}");
                if k >= 1 {
                    // increment = theta_k - E(theta_k | F_{k-1})
                    let want = th - brute.theta(&c, m, k, k - 1);
                    assert!(
                        (d.martingale_increment(k as usize) - want).abs() < 1e-12,
                        "increment {k} m={m}"
                    );
                }
            }
        }
    }

    #[test]
    fn coboundary_rejects_invalid_inputs() {
        let two_sided = CoefficientSequence::two_sided_geometric(0.5f64, 4).unwrap();
        let model = InnovationModel::gaussian(1.0, 1);
        assert!(matches!(coboundary(&two_sided, &model, 2, 10), Err(Error::NonCausal)));
        let causal = CoefficientSequence::causal_geometric(0.5f64, 4).unwrap();
        let md = InnovationModel::<f64>::new(InnovationKind::MartingaleDifference, 1).unwrap();
        assert!(matches!(
            coboundary(&causal, &md, 2, 10),
            Err(Error::UnsupportedModel { .. })
        ));
    }

    #[test]
    fn corrector_sweep_shrinks_with_n() {
        let c = CoefficientSequence::causal_geometric(0.5f64, 20).unwrap();
        let sweep_median = |n: usize| {
            let v: Vec<f64> = (0..30)
                .map(|rep| {
                    let seed = rng::derive_seed(55, n, rep);
                    let model = InnovationModel::gaussian(1.0, seed);
                    coboundary(&c, &model, 3, n).unwrap().corrector_sweep()
                })
                .collect();
            numeric::median(&v)
        };
        let (a, b, c3) = (sweep_median(100), sweep_median(1000), sweep_median(10000));
        assert!(b < a && c3 < b, "sweep medians {a}, {b}, {c3}");
    }

    #[test]
    fn quadratic_variation_basics() {
        let c = CoefficientSequence::<f64>::identity();
        let model = InnovationModel::gaussian(1.0, 14);
        assert_eq!(quadratic_variation(&c, &model, 1, 100, 0.0).unwrap(), 0.0);
        // LLN: at t = 1 the path approaches sigma^2 = 1
        let v = quadratic_variation(&c, &model, 1, 100_000, 1.0).unwrap();
        assert!((v - 1.0).abs() < 0.05, "v = {v}");
    }

    #[test]
    fn quadratic_variation_pair_closed_form() {
        let c = CoefficientSequence::finite(&[(0, 1.0f64), (1, 1.0)]).unwrap();
        let model = InnovationModel::gaussian(1.0, 15);
        let v = quadratic_variation(&c, &model, 2, 100_000, 0.5).unwrap();
        // A_m^2 sigma^2 t = 4 * 0.5 = 2
        assert!((v - 2.0).abs() < 0.05 * 2.0, "v = {v}");
    }

    #[test]
    fn quadratic_variation_matches_brute_force_projections() {
        // the summand is P_j applied to the next m partial-sum increments;
        // on a short stream the projection is computed from definitions by
        // zeroing innovations the conditioning sigma-field cannot see
        let c = CoefficientSequence::finite(&[(0, 0.8f64), (1, 0.4), (2, -0.2)]).unwrap();
        let model = InnovationModel::gaussian(1.0, 17);
        let (m, n) = (3usize, 20usize);
        let brute = BruteStream::from_model(&model, 1 - m as i64 - 4, n as i64 + m as i64 + 4);
        // X_k restricted to F_cond
        let x_at = |k: i64, cond: i64| -> f64 {
            (0..=2i64).map(|i| c.value(i) * brute.xi(k - i, cond)).sum()
        };
        let block = |j: i64, cond: i64| -> f64 {
            // S_{j+m-1} - S_{j-1} = sum of X over [j, j+m-1]
            (j..j + m as i64).map(|k| x_at(k, cond)).sum()
        };
        for t in [0.3f64, 1.0] {
            let top = ((n as f64) * t).floor() as i64;
            let mut sum = 0.0;
            for j in 1..=top {
                let proj = block(j, j) - block(j, j - 1);
                sum += proj * proj;
            }
            let direct = sum / n as f64;
            let closed = quadratic_variation(&c, &model, m, n, t).unwrap();
            assert!(rel_close(direct, closed, 1e-12), "t = {t}: {direct} vs {closed}");
        }
    }

    #[test]
    fn weighted_quadratic_variation_cases() {
        let c = CoefficientSequence::<f64>::identity();
        let model = InnovationModel::gaussian(1.0, 16);
        let zero = WeightFn::Constant(0.0);
        assert_eq!(
            weighted_quadratic_variation(&c, &model, &zero, 1, 1000, 1.0).unwrap(),
            0.0
        );
        let one = WeightFn::Constant(1.0);
        let a = weighted_quadratic_variation(&c, &model, &one, 1, 1000, 0.7).unwrap();
        let b = quadratic_variation(&c, &model, 1, 1000, 0.7).unwrap();
        assert_eq!(a, b);
        // g(x) = x: LLN limit sigma^2 / 3
        let lin = WeightFn::Linear;
        let v = weighted_quadratic_variation(&c, &model, &lin, 1, 100_000, 1.0).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 0.05 / 3.0, "v = {v}");
    }

    #[test]
    fn abel_residual_is_rounding_noise() {
        // N = 1: both sides are G_1 psi_1
        assert_eq!(abel_residual(&[2.0f64], &[3.0]), 0.0);
        // constant G telescopes
        let psi: Vec<f64> = (0..50).map(|k| rng::standard_normal(1, rng::Stream::Scratch, k)).collect();
        let g = vec![0.77f64; 50];
        assert!(abel_residual(&g, &psi) < 1e-13);
        // random G and psi of length 10^3
        let psi: Vec<f64> =
            (0..1000).map(|k| rng::standard_normal(2, rng::Stream::Scratch, k)).collect();
        let g: Vec<f64> =
            (0..1000).map(|k| rng::standard_uniform(3, rng::Stream::Scratch, k)).collect();
        let scale: f64 = psi.iter().map(|p| p.abs()).sum();
        assert!(abel_residual(&g, &psi) < 1e-10 * scale);
    }

    #[test]
    fn weighted_partial_sum_examples() {
        let c = CoefficientSequence::two_sided_geometric(0.5f64, 40).unwrap();
        let model = InnovationModel::gaussian(1.0, 18);
        let path = crate::process::filter(&c, &model, 400).unwrap();
        let zero = WeightFn::Constant(0.0);
        assert_eq!(weighted_partial_sum(&path, &zero, 1.0), 0.0);
        // g = 1 reproduces S_{floor(nt)} / sqrt(n)
        let one = WeightFn::Constant(1.0);
        for t in [0.3f64, 0.5, 1.0] {
            let a = weighted_partial_sum(&path, &one, t);
            let b = path.scaled_partial_sum(t); // norm defaults to sqrt(n)
            assert!(rel_close(a, b, 1e-12), "t = {t}");
        }
    }

    #[test]
    fn remote_past_norm_examples() {
        let id = CoefficientSequence::<f64>::identity();
        assert_eq!(remote_past_norm(&id, 1.0, 1).unwrap(), 0.0);
        let c = CoefficientSequence::causal_geometric(0.5f64, 60).unwrap();
        let got = remote_past_norm(&c, 1.0, 10).unwrap();
        let want = 2.0f64.powi(-10) * (4.0f64 / 3.0).sqrt();
        assert!(rel_close(got, want, 1e-9));
        // monotone in the cut
        let mut prev = f64::INFINITY;
        for cut in 0..20 {
            let v = remote_past_norm(&c, 1.0, cut).unwrap();
            assert!(v <= prev);
            prev = v;
        }
    }
}
