//! Monte Carlo orchestration: ensembles over n-grids, marginal
//! distribution checks, empirical L_p couplings, convergence-trend
//! verdicts, and the truncated-mean / staircase-weight identities.

use rayon::prelude::*;
use serde::Serialize;

use crate::coefficients::CoefficientSequence;
use crate::error::{Error, Result};
use crate::innovations::{max_abs_over, BrownianGrid, InnovationKind, InnovationModel};
use crate::numeric::{self, integrate, normal_cdf};
use crate::process::{filter_with, FilterOptions};
use crate::rng;
use crate::scalar::Real;

/// What to simulate: coefficients, an innovation template (its seed is the
/// master seed), the n-grid, replicates, and the L_p exponents to report.
#[derive(Debug, Clone)]
pub struct EnsembleConfig<T> {
    pub coeffs: CoefficientSequence<T>,
    pub model: InnovationModel<T>,
    pub grid: Vec<usize>,
    pub replicates: usize,
    pub p_list: Vec<f64>,
    pub eps_tail: T,
}

impl<T: Real> EnsembleConfig<T> {
    pub fn new(
        coeffs: CoefficientSequence<T>,
        model: InnovationModel<T>,
        grid: Vec<usize>,
        replicates: usize,
    ) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::InvalidParameter { name: "grid", reason: "must be nonempty" });
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter { name: "grid", reason: "must be ascending" });
        }
        if replicates == 0 {
            return Err(Error::InvalidParameter { name: "replicates", reason: "must be >= 1" });
        }
        Ok(EnsembleConfig {
            coeffs,
            model,
            grid,
            replicates,
            p_list: vec![1.0, 2.0],
            eps_tail: T::of(1e-10),
        })
    }

    pub fn with_p_list(mut self, p_list: Vec<f64>) -> Self {
        self.p_list = p_list;
        self
    }
}

/// Statistics of one `(n, replicate)` cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellStats<T> {
    pub n: usize,
    pub replicate: usize,
    pub seed: u64,
    pub coupling_stat: T,
    pub max_innovation: T,
    /// Terminal marginal `S_n / b_n`.
    pub terminal: T,
    /// Sup distance to the coupled Brownian path; populated only for the
    /// Brownian-coupled innovation variant.
    pub sup_bm: Option<T>,
}

/// All cell statistics of one run, in (n, replicate) order with no gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble<T> {
    pub grid: Vec<usize>,
    pub replicates: usize,
    pub master_seed: u64,
    pub total_sum: T,
    pub cells: Vec<CellStats<T>>,
}

/// Run every `(n, replicate)` cell. Cells are independent pure functions of
/// `(master seed, n, replicate)`; they are computed in parallel and merged
/// in index order, so results do not depend on scheduling.
pub fn run_ensemble<T: Real>(config: &EnsembleConfig<T>) -> Result<PathEnsemble<T>> {
    let a = config.coeffs.total_sum().value;
    let master = config.model.seed();
    let coupled = matches!(config.model.kind(), InnovationKind::BmCoupled { .. });

    let cells: Vec<(usize, usize)> = config
        .grid
        .iter()
        .flat_map(|&n| (0..config.replicates).map(move |rep| (n, rep)))
        .collect();

    let stats: Vec<Result<CellStats<T>>> = cells
        .par_iter()
        .map(|&(n, rep)| {
            run_cell(config, a, master, n, rep, coupled).map_err(|e| e.in_cell(n, rep))
        })
        .collect();

    let mut out = Vec::with_capacity(stats.len());
    for s in stats {
        out.push(s?);
    }
    Ok(PathEnsemble {
        grid: config.grid.clone(),
        replicates: config.replicates,
        master_seed: master,
        total_sum: a,
        cells: out,
    })
}

fn run_cell<T: Real>(
    config: &EnsembleConfig<T>,
    a: T,
    master: u64,
    n: usize,
    rep: usize,
    coupled: bool,
) -> Result<CellStats<T>> {
    let seed = rng::derive_seed(master, n, rep);
    let model = config.model.for_cell(n, seed);
    let opts = FilterOptions { norm: None, eps_tail: config.eps_tail };
    let path = filter_with(&config.coeffs, &model, n, opts)?;
    let stream = model.sample_stream(1, n as i64)?;
    let sup_bm = if coupled {
        let grid = BrownianGrid::coupled_to(&model)?;
        Some(path.sup_bm_distance(a, &grid)?)
    } else {
        None
    };
    Ok(CellStats {
        n,
        replicate: rep,
        seed,
        coupling_stat: path.coupling_stat(a),
        max_innovation: max_abs_over(&stream, path.norm()),
        terminal: path.scaled_partial_sum(T::one()),
        sup_bm,
    })
}

impl<T: Real> PathEnsemble<T> {
    /// Values of one statistic for a fixed grid point, in replicate order.
    pub fn per_n<F: Fn(&CellStats<T>) -> T>(&self, n: usize, stat: F) -> Vec<T> {
        self.cells.iter().filter(|c| c.n == n).map(stat).collect()
    }

    pub fn coupled(&self) -> bool {
        self.cells.first().map(|c| c.sup_bm.is_some()).unwrap_or(false)
    }

    /// Per-n Monte Carlo means of `(sup-BM distance)^p`.
    pub fn lp_estimate(&self, p: f64) -> Result<Vec<(usize, T)>> {
        if !self.coupled() {
            return Err(Error::UnsupportedModel {
                operation: "lp_estimate",
                needed: "a Brownian-coupled ensemble",
            });
        }
        let pt = T::of(p);
        Ok(self
            .grid
            .iter()
            .map(|&n| {
                let vals = self.per_n(n, |c| c.sup_bm.unwrap().powf(pt));
                (n, numeric::mean(&vals))
            })
            .collect())
    }

    /// CSV export of the raw cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if self.coupled() {
            out.push_str("n,replicate,seed,coupling_stat,max_innovation,terminal,sup_bm\n");
        } else {
            out.push_str("n,replicate,seed,coupling_stat,max_innovation,terminal\n");
        }
        for c in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{},{}",
                c.n, c.replicate, c.seed, c.coupling_stat, c.max_innovation, c.terminal
            ));
            if let Some(s) = c.sup_bm {
                out.push_str(&format!(",{s}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Summary of one statistic at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StatSummary<T> {
    pub n: usize,
    pub mean: T,
    pub median: T,
    pub q90: T,
}

fn summarize<T: Real>(n: usize, values: &[T]) -> StatSummary<T> {
    StatSummary {
        n,
        mean: numeric::mean(values),
        median: numeric::median(values),
        q90: numeric::quantile(values, 0.9),
    }
}

/// Per-n summaries of the coupling statistic, the sup-BM distance, the
/// normalized max innovation, terminal marginals, and the configured L_p
/// means, plus monotone-trend verdicts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingReport<T> {
    pub master_seed: u64,
    pub replicates: usize,
    pub total_sum: T,
    pub coupling: Vec<StatSummary<T>>,
    pub max_innovation: Vec<StatSummary<T>>,
    pub terminal: Vec<StatSummary<T>>,
    pub sup_bm: Option<Vec<StatSummary<T>>>,
    /// `(p, per-n summaries of (sup-BM distance)^p)`.
    pub lp: Vec<(f64, Vec<StatSummary<T>>)>,
    pub coupling_trend: bool,
    pub sup_bm_trend: Option<bool>,
    pub lp_trends: Vec<(f64, bool)>,
}

impl<T: Real> CouplingReport<T> {
    pub fn build(ensemble: &PathEnsemble<T>, p_list: &[f64]) -> Self {
        let per_stat = |stat: fn(&CellStats<T>) -> T| -> Vec<StatSummary<T>> {
            ensemble
                .grid
                .iter()
                .map(|&n| summarize(n, &ensemble.per_n(n, stat)))
                .collect()
        };
        let coupling = per_stat(|c| c.coupling_stat);
        let max_innovation = per_stat(|c| c.max_innovation);
        let terminal = per_stat(|c| c.terminal);
        let sup_bm = if ensemble.coupled() {
            Some(per_stat(|c| c.sup_bm.unwrap()))
        } else {
            None
        };
        let lp: Vec<(f64, Vec<StatSummary<T>>)> = if ensemble.coupled() {
            p_list
                .iter()
                .map(|&p| {
                    let rows = ensemble
                        .grid
                        .iter()
                        .map(|&n| {
                            let vals =
                                ensemble.per_n(n, |c| c.sup_bm.unwrap().powf(T::of(p)));
                            summarize(n, &vals)
                        })
                        .collect();
                    (p, rows)
                })
                .collect()
        } else {
            Vec::new()
        };

        let medians = |rows: &[StatSummary<T>]| rows.iter().map(|r| r.median).collect::<Vec<_>>();
        let means = |rows: &[StatSummary<T>]| rows.iter().map(|r| r.mean).collect::<Vec<_>>();
        let coupling_trend = trend_verdict(&medians(&coupling));
        let sup_bm_trend = sup_bm.as_ref().map(|rows| trend_verdict(&medians(rows)));
        let lp_trends = lp.iter().map(|(p, rows)| (*p, trend_verdict(&means(rows)))).collect();

        CouplingReport {
            master_seed: ensemble.master_seed,
            replicates: ensemble.replicates,
            total_sum: ensemble.total_sum,
            coupling,
            max_innovation,
            terminal,
            sup_bm,
            lp,
            coupling_trend,
            sup_bm_trend,
            lp_trends,
        }
    }

    /// Long-format CSV: (n, statistic, mean, median, q90).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,statistic,mean,median,q90\n");
        let mut push = |name: &str, rows: &[StatSummary<T>]| {
            for r in rows {
                out.push_str(&format!("{},{},{},{},{}\n", r.n, name, r.mean, r.median, r.q90));
            }
        };
        push("coupling", &self.coupling);
        if let Some(rows) = &self.sup_bm {
            push("sup_bm", rows);
        }
        push("max_innovation", &self.max_innovation);
        push("terminal", &self.terminal);
        for (p, rows) in &self.lp {
            push(&format!("lp_{p}"), rows);
        }
        out
    }
}

/// Pass iff the per-n values are non-increasing across the grid and the
/// last is at most half the first. Codifies "goes to zero" at desk scale;
/// the theory provides no rates.
pub fn trend_verdict<T: Real>(values: &[T]) -> bool {
    assert!(values.len() >= 3, "trend verdict needs >= 3 grid points");
    let monotone = values.windows(2).all(|w| w[1] <= w[0]);
    monotone && values[values.len() - 1] <= values[0] / T::of(2.0)
}

/// Two-sided Kolmogorov-Smirnov distance between the sample and the
/// `N(mean, std^2)` law, evaluated at both one-sided gaps of every order
/// statistic.
pub fn ks_statistic<T: Real>(samples: &[T], mean: T, std: T) -> T {
    assert!(!samples.is_empty(), "ks_statistic needs samples");
    assert!(std > T::zero(), "std must be positive");
    let sorted = numeric::sorted(samples);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let z = ((x - mean) / std).as_f64();
        let f = normal_cdf(z);
        let upper = (i as f64 + 1.0) / n - f;
        let lower = f - i as f64 / n;
        d = d.max(upper).max(lower);
    }
    T::of(d)
}

/// KS critical values from the standard asymptotic approximation; these are
/// approximations external to the underlying theory.
pub fn ks_critical_5pct(n: usize) -> f64 {
    1.36 / (n as f64).sqrt()
}

pub fn ks_critical_1pct(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

/// Both sides of the truncated-mean identity
/// `E g(a xi) = a int_0^{1/a} P(xi >= t) dt` with
/// `g(x) = x 1{x <= 1} + 1{x > 1}`, each evaluated by quadrature against
/// the model's closed-form density and tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub a: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

pub fn truncated_mean_identity<T: Real>(
    a: f64,
    model: &InnovationModel<T>,
) -> Result<IdentityCheck> {
    if a <= 0.0 {
        return Err(Error::InvalidParameter { name: "a", reason: "must be > 0" });
    }
    let density = |x: f64| {
        model.positive_density(x).expect("model provides a closed-form density")
    };
    if model.positive_density(0.0).is_none() {
        return Err(Error::UnsupportedModel {
            operation: "truncated_mean_identity",
            needed: "exponential or uniform innovations",
        });
    }
    let tail = |t: f64| model.positive_tail(t).expect("model provides a closed-form tail");
    let kink = 1.0 / a;
    let tol = 1e-11;

    // Quadrature stops where the closed-form tail is negligible; the mass
    // dropped beyond the cutoff sits far below the checked tolerance.
    let support_end = model.positive_support_end().unwrap_or_else(|| {
        let mut cut = 1.0;
        while tail(cut) > 1e-18 && cut < 1e12 {
            cut *= 2.0;
        }
        cut
    });
    let hi = support_end.min(kink);

    // E g(a xi) = int_0^{1/a} a x f(x) dx + P(xi >= 1/a); the indicator part
    // comes from the closed-form tail, so no unbounded quadrature is needed.
    let lhs = integrate(&|x| a * x * density(x), 0.0, hi, tol)? + tail(kink);
    let rhs = a * integrate(&tail, 0.0, hi, tol)?;
    Ok(IdentityCheck { a, lhs, rhs, residual: (lhs - rhs).abs() })
}

/// Staircase weight `t_a(x) = sum_{j <= terms} a_j 1{x <= 1/a_j}` for a
/// positive non-increasing summable sequence.
pub fn staircase_weight<T: Real>(x: T, seq: &[T], terms: usize) -> Result<T> {
    if x < T::zero() {
        return Err(Error::InvalidParameter { name: "x", reason: "must be >= 0" });
    }
    let take = terms.min(seq.len());
    for w in seq[..take].windows(2) {
        if w[1] > w[0] {
            return Err(Error::InvalidParameter {
                name: "seq",
                reason: "must be non-increasing",
            });
        }
    }
    let mut acc = numeric::CompensatedSum::new();
    for &a in &seq[..take] {
        if a <= T::zero() {
            return Err(Error::InvalidParameter { name: "seq", reason: "must be positive" });
        }
        if x <= T::one() / a {
            acc.add(a);
        }
    }
    Ok(acc.value())
}
