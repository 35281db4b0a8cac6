//! Command dispatch and artifact writers.
//!
//! Every data file is a pure function of the configuration: byte-identical
//! across reruns and worker counts. Timestamps only ever go into the
//! `run_meta.json` sidecar.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use shortmem::harness::{
    run_ensemble, truncated_mean_identity, CouplingReport, EnsembleConfig, IdentityCheck,
};
use shortmem::innovations::InnovationKind;
use shortmem::numeric;
use shortmem::process::{self, truncation_bound_check};
use shortmem::projection;
use shortmem::variance::{
    staircase_variance_bounds, weighted_exact_variance, ProjectionProfile, VarianceProfile,
};
use shortmem::weights::WeightFn;

use crate::config::{parse_weight, ConfigError, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Couple,
    Counterexample,
    Variance,
    Weighted,
    Coboundary,
    Diagnose,
}

impl Command {
    pub fn parse(name: &str) -> Option<Command> {
        Some(match name {
            "simulate" => Command::Simulate,
            "couple" => Command::Couple,
            "counterexample" => Command::Counterexample,
            "variance" => Command::Variance,
            "weighted" => Command::Weighted,
            "coboundary" => Command::Coboundary,
            "diagnose" => Command::Diagnose,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Couple => "couple",
            Command::Counterexample => "counterexample",
            Command::Variance => "variance",
            Command::Weighted => "weighted",
            Command::Coboundary => "coboundary",
            Command::Diagnose => "diagnose",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Module(shortmem::Error),
    Io(std::io::Error),
    Usage(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Module(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
            CliError::Usage(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Module(_) => "runtime",
            CliError::Io(_) => "io",
            CliError::Usage(_) => "usage",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    /// Machine-readable form emitted on stderr.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct ErrorJson<'a> {
            kind: &'a str,
            error: String,
        }
        serde_json::to_string(&ErrorJson { kind: self.kind(), error: self.to_string() })
            .expect("error serializes")
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<shortmem::Error> for CliError {
    fn from(e: shortmem::Error) -> Self {
        CliError::Module(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

fn write_json<S: Serialize>(dir: &Path, name: &str, value: &S) -> Result<PathBuf, CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    write_file(dir, name, &text)
}

/// Sidecar metadata: the only artifact allowed to carry a timestamp.
fn write_meta(dir: &Path, command: Command, cfg: &SimConfig) -> Result<PathBuf, CliError> {
    #[derive(Serialize)]
    struct Meta<'a> {
        command: &'a str,
        timestamp_unix_secs: u64,
        config: String,
    }
    let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    write_json(
        dir,
        "run_meta.json",
        &Meta { command: command.name(), timestamp_unix_secs: ts, config: cfg.to_config_text() },
    )
}

fn ensemble_config(cfg: &SimConfig) -> Result<EnsembleConfig<f64>, CliError> {
    let coeffs = cfg.coeffs.build()?;
    let model = cfg.model.build(cfg.seed)?;
    let mut e = EnsembleConfig::new(coeffs, model, cfg.grid.clone(), cfg.replicates)?
        .with_p_list(cfg.p_list.clone());
    e.eps_tail = cfg.eps_tail;
    Ok(e)
}

/// Run `command` under `cfg`, writing artifacts into `cfg.out_dir`.
/// Returns the paths written.
pub fn dispatch(command: Command, cfg: &SimConfig) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(&cfg.out_dir)?;
    let dir = cfg.out_dir.clone();
    let mut written = Vec::new();
    match command {
        Command::Simulate => {
            let ensemble = run_ensemble(&ensemble_config(cfg)?)?;
            written.push(write_file(&dir, "ensemble.csv", &ensemble.to_csv())?);
            written.push(write_json(&dir, "ensemble.json", &ensemble.cells)?);
        }
        Command::Couple => {
            if cfg.model.kind != "bm" {
                return Err(ConfigError::Validation {
                    key: "model.kind",
                    message: "couple requires the Brownian-coupled model (`bm`)".into(),
                }
                .into());
            }
            let ecfg = ensemble_config(cfg)?;
            let ensemble = run_ensemble(&ecfg)?;
            let report = CouplingReport::build(&ensemble, &cfg.p_list);
            written.push(write_json(&dir, "coupling.json", &report)?);
            written.push(write_file(&dir, "coupling.csv", &report.to_csv())?);
        }
        Command::Counterexample => {
            written.extend(run_counterexample(cfg, &dir)?);
        }
        Command::Variance => {
            let coeffs = cfg.coeffs.build()?;
            let sigma2 = cfg.model.build(cfg.seed)?.variance();
            let profile = VarianceProfile::build(&coeffs, &cfg.grid, sigma2)?;
            written.push(write_file(&dir, "profile.csv", &profile.to_csv())?);
        }
        Command::Weighted => {
            written.push(run_weighted(cfg, &dir)?);
        }
        Command::Coboundary => {
            written.extend(run_coboundary(cfg, &dir)?);
        }
        Command::Diagnose => {
            written.push(run_diagnose(cfg, &dir)?);
        }
    }
    written.push(write_meta(&dir, command, cfg)?);
    Ok(written)
}

fn run_counterexample(cfg: &SimConfig, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    if cfg.coeffs.kind != "staircase" {
        return Err(ConfigError::Validation {
            key: "coeffs.kind",
            message: "counterexample requires staircase coefficients".into(),
        }
        .into());
    }
    let coeffs = cfg.coeffs.build()?;
    let blocks = coeffs.blocks().expect("staircase coefficients carry blocks");
    let levels = blocks.levels();

    let mut variance_table =
        String::from("level,n,exact,counting_bound,quadratic_bound,meets_counting,meets_quadratic\n");
    for level in 1..levels {
        let b = staircase_variance_bounds(&coeffs, level)?;
        variance_table.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            b.level,
            b.n,
            b.exact,
            b.counting_bound,
            b.quadratic_bound,
            b.meets_counting(),
            b.meets_quadratic()
        ));
    }

    let projection = ProjectionProfile::build(&blocks, 0);
    let grid: Vec<usize> = (1..=levels).map(|r| blocks.boundary(r) as usize).collect();
    let profile = VarianceProfile::build(&coeffs, &grid, 1.0)?;

    Ok(vec![
        write_file(dir, "variance_table.csv", &variance_table)?,
        write_file(dir, "projection_table.csv", &projection.to_csv())?,
        write_file(dir, "slope_table.csv", &profile.to_csv())?,
    ])
}

fn run_weighted(cfg: &SimConfig, dir: &Path) -> Result<PathBuf, CliError> {
    let weight_name = cfg.weight.as_ref().ok_or(ConfigError::Validation {
        key: "weight",
        message: "weighted requires a weight".into(),
    })?;
    let weight: WeightFn<f64> = parse_weight(weight_name)?;
    let coeffs = cfg.coeffs.build()?;
    let model = cfg.model.build(cfg.seed)?;
    let sigma2 = model.variance();

    let mut out = String::from("n,empirical_variance,exact_variance,std_error,z,pass\n");
    for &n in &cfg.grid {
        let exact = weighted_exact_variance(&coeffs, &weight, n, 1.0, sigma2)?;
        let mut samples = Vec::with_capacity(cfg.replicates);
        for rep in 0..cfg.replicates {
            let seed = shortmem::rng::derive_seed(cfg.seed, n, rep);
            let cell = model.for_cell(n, seed);
            let path = process::filter_with(
                &coeffs,
                &cell,
                n,
                process::FilterOptions { norm: None, eps_tail: cfg.eps_tail },
            )?;
            samples.push(projection::weighted_partial_sum(&path, &weight, 1.0));
        }
        let empirical = numeric::sample_variance(&samples);
        let se = exact * (2.0 / (cfg.replicates as f64 - 1.0)).sqrt();
        let z = (empirical - exact) / se;
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            n,
            empirical,
            exact,
            se,
            z,
            z.abs() <= cfg.mc_slack
        ));
    }
    write_file(dir, "weighted.csv", &out)
}

fn run_coboundary(cfg: &SimConfig, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let m = cfg.m.ok_or(ConfigError::Validation {
        key: "m",
        message: "coboundary requires m".into(),
    })?;
    let coeffs = cfg.coeffs.build()?;
    let model = cfg.model.build(cfg.seed)?;
    let n = *cfg.grid.last().expect("grid validated nonempty");
    let decomposition = projection::coboundary(&coeffs, &model, m, n)?;

    let mut max_gap = 0.0f64;
    for k in 1..=n {
        let want = decomposition.short_sum() * model.value(k as i64)?;
        max_gap = max_gap.max((decomposition.martingale_increment(k) - want).abs());
    }

    #[derive(Serialize)]
    struct Summary {
        order: usize,
        n: usize,
        short_sum: f64,
        identity_residual: f64,
        partial_sum_scale: f64,
        max_increment_gap: f64,
        corrector_sweep: f64,
    }
    let summary = Summary {
        order: m,
        n,
        short_sum: decomposition.short_sum(),
        identity_residual: decomposition.identity_residual(),
        partial_sum_scale: decomposition.partial_sum_scale(),
        max_increment_gap: max_gap,
        corrector_sweep: decomposition.corrector_sweep(),
    };
    Ok(vec![
        write_file(dir, "coboundary.csv", &decomposition.to_csv())?,
        write_json(dir, "coboundary_summary.json", &summary)?,
    ])
}

fn run_diagnose(cfg: &SimConfig, dir: &Path) -> Result<PathBuf, CliError> {
    let coeffs = cfg.coeffs.build()?;
    let model = cfg.model.build(cfg.seed)?;
    if !matches!(
        model.kind(),
        InnovationKind::ExponentialCentered { .. } | InnovationKind::UniformCentered { .. }
    ) {
        return Err(ConfigError::Validation {
            key: "model.kind",
            message: "diagnose requires exponential or uniform innovations".into(),
        }
        .into());
    }

    let identity: Vec<IdentityCheck> = [0.1, 1.0, 10.0]
        .iter()
        .map(|&a| truncated_mean_identity(a, &model))
        .collect::<shortmem::Result<_>>()?;

    let n = *cfg.grid.last().expect("grid validated nonempty");
    let (lo, hi) = coeffs.window();
    let default_m = ((-lo).max(hi) as u64) / 2;
    let m = cfg.m.map(|m| m as u64).unwrap_or(default_m);
    let truncation = truncation_bound_check(&coeffs, &model, n, m, cfg.replicates)?;

    #[derive(Serialize)]
    struct TruncationJson {
        m: u64,
        n: usize,
        replicates: usize,
        mean_gap: f64,
        bound: f64,
        std_error: f64,
        pass: bool,
    }
    #[derive(Serialize)]
    struct Diagnostics {
        identity: Vec<IdentityCheck>,
        identity_max_residual: f64,
        truncation: TruncationJson,
    }
    let diag = Diagnostics {
        identity_max_residual: identity.iter().map(|c| c.residual).fold(0.0, f64::max),
        identity,
        truncation: TruncationJson {
            m,
            n,
            replicates: cfg.replicates,
            mean_gap: truncation.mean_gap,
            bound: truncation.bound,
            std_error: truncation.std_error,
            pass: truncation.pass,
        },
    };
    write_json(dir, "diagnostics.json", &diag)
}

