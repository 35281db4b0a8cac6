//! Flat key-value experiment configuration.
//!
//! One `key = value` pair per line, `#` comments, blank lines allowed.
//! The exact key list is the contract: `coeffs.kind`, `coeffs.param`,
//! `coeffs.window`, `model.kind`, `model.param`, `grid`, `replicates`,
//! `p_list`, `seed`, `out_dir`, `m`, `weight`, `tol.eps_tail`,
//! `tol.mc_slack`. Unknown keys are rejected.

use std::fmt;
use std::path::PathBuf;

use shortmem::coefficients::CoefficientSequence;
use shortmem::innovations::{InnovationKind, InnovationModel};
use shortmem::weights::WeightFn;

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Parse { line: usize, message: String },
    Validation { key: &'static str, message: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse { line, message } => write!(f, "line {line}: {message}"),
            ConfigError::Validation { key, message } => write!(f, "key `{key}`: {message}"),
        }
    }
}

impl std::error::Error for ConfigError {}

fn validation(key: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation { key, message: message.into() }
}

/// Coefficient descriptor as written in a config file.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffSpec {
    pub kind: String,
    pub param: Option<f64>,
    pub window: Option<usize>,
}

impl CoeffSpec {
    pub fn build(&self) -> Result<CoefficientSequence<f64>, ConfigError> {
        let need_param = || {
            self.param.ok_or_else(|| validation("coeffs.param", "required for this kind"))
        };
        let need_window = || {
            self.window.ok_or_else(|| validation("coeffs.window", "required for this kind"))
        };
        let wrap = |r: shortmem::Result<CoefficientSequence<f64>>| {
            r.map_err(|e| validation("coeffs.kind", e.to_string()))
        };
        match self.kind.as_str() {
            "identity" => Ok(CoefficientSequence::identity()),
            "geometric" => wrap(CoefficientSequence::two_sided_geometric(
                need_param()?,
                need_window()?,
            )),
            "causal-geometric" => wrap(CoefficientSequence::causal_geometric(
                need_param()?,
                need_window()?,
            )),
            "polynomial" => wrap(CoefficientSequence::polynomial(need_param()?, need_window()?)),
            "staircase" => {
                let levels = need_param()?;
                if levels < 1.0 || levels.fract() != 0.0 {
                    return Err(validation("coeffs.param", "levels must be a positive integer"));
                }
                wrap(CoefficientSequence::staircase(levels as u32))
            }
            other => Err(validation("coeffs.kind", format!("unknown kind `{other}`"))),
        }
    }

    pub fn to_config_lines(&self) -> String {
        let mut out = format!("coeffs.kind = {}\n", self.kind);
        if let Some(p) = self.param {
            out.push_str(&format!("coeffs.param = {p}\n"));
        }
        if let Some(w) = self.window {
            out.push_str(&format!("coeffs.window = {w}\n"));
        }
        out
    }
}

/// Innovation descriptor as written in a config file.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub kind: String,
    pub param: Option<f64>,
}

impl ModelSpec {
    /// Build the model template; the Brownian-coupled variant is retargeted
    /// to each grid point by the harness, so any placeholder length works.
    pub fn build(&self, seed: u64) -> Result<InnovationModel<f64>, ConfigError> {
        let need_param = || {
            self.param.ok_or_else(|| validation("model.param", "required for this kind"))
        };
        let no_param = |kind: &str| {
            if self.param.is_some() {
                Err(validation("model.param", format!("not accepted for kind `{kind}`")))
            } else {
                Ok(())
            }
        };
        let kind = match self.kind.as_str() {
            "gaussian" => InnovationKind::Gaussian { sigma: need_param()? },
            "uniform" => InnovationKind::UniformCentered { half_width: need_param()? },
            "exponential" => InnovationKind::ExponentialCentered { rate: need_param()? },
            "martingale" => {
                no_param("martingale")?;
                InnovationKind::MartingaleDifference
            }
            "bm" => {
                no_param("bm")?;
                InnovationKind::BmCoupled { n: 1 }
            }
            other => return Err(validation("model.kind", format!("unknown kind `{other}`"))),
        };
        InnovationModel::new(kind, seed).map_err(|e| validation("model.param", e.to_string()))
    }

    pub fn to_config_lines(&self) -> String {
        let mut out = format!("model.kind = {}\n", self.kind);
        if let Some(p) = self.param {
            out.push_str(&format!("model.param = {p}\n"));
        }
        out
    }
}

/// A fully parsed and validated experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub coeffs: CoeffSpec,
    pub model: ModelSpec,
    pub grid: Vec<usize>,
    pub replicates: usize,
    pub p_list: Vec<f64>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub m: Option<usize>,
    pub weight: Option<String>,
    pub eps_tail: f64,
    pub mc_slack: f64,
}

impl SimConfig {
    pub fn parse(text: &str) -> Result<SimConfig, ConfigError> {
        let mut coeffs_kind = None;
        let mut coeffs_param = None;
        let mut coeffs_window = None;
        let mut model_kind = None;
        let mut model_param = None;
        let mut grid = None;
        let mut replicates = None;
        let mut p_list = None;
        let mut seed = None;
        let mut out_dir = None;
        let mut m = None;
        let mut weight = None;
        let mut eps_tail = None;
        let mut mc_slack = None;

        for (lineno, raw) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Parse {
                line: lineno,
                message: "expected `key = value`".into(),
            })?;
            let key = key.trim();
            let value = value.trim();
            if value.is_empty() {
                return Err(ConfigError::Parse {
                    line: lineno,
                    message: format!("empty value for `{key}`"),
                });
            }
            let parse_f64 = |v: &str| {
                v.parse::<f64>().map_err(|_| ConfigError::Parse {
                    line: lineno,
                    message: format!("`{v}` is not a number"),
                })
            };
            let parse_usize = |v: &str| {
                v.parse::<usize>().map_err(|_| ConfigError::Parse {
                    line: lineno,
                    message: format!("`{v}` is not a non-negative integer"),
                })
            };
            match key {
                "coeffs.kind" => coeffs_kind = Some(value.to_string()),
                "coeffs.param" => coeffs_param = Some(parse_f64(value)?),
                "coeffs.window" => coeffs_window = Some(parse_usize(value)?),
                "model.kind" => model_kind = Some(value.to_string()),
                "model.param" => model_param = Some(parse_f64(value)?),
                "grid" => {
                    let parsed: Result<Vec<usize>, ConfigError> =
                        value.split(',').map(|v| parse_usize(v.trim())).collect();
                    grid = Some(parsed?);
                }
                "replicates" => replicates = Some(parse_usize(value)?),
                "p_list" => {
                    let parsed: Result<Vec<f64>, ConfigError> =
                        value.split(',').map(|v| parse_f64(v.trim())).collect();
                    p_list = Some(parsed?);
                }
                "seed" => {
                    seed = Some(value.parse::<u64>().map_err(|_| ConfigError::Parse {
                        line: lineno,
                        message: format!("`{value}` is not a u64 seed"),
                    })?)
                }
                "out_dir" => out_dir = Some(PathBuf::from(value)),
                "m" => m = Some(parse_usize(value)?),
                "weight" => weight = Some(value.to_string()),
                "tol.eps_tail" => eps_tail = Some(parse_f64(value)?),
                "tol.mc_slack" => mc_slack = Some(parse_f64(value)?),
                other => {
                    return Err(ConfigError::Parse {
                        line: lineno,
                        message: format!("unknown key `{other}`"),
                    })
                }
            }
        }

        let seed = seed.ok_or_else(|| validation("seed", "seed required"))?;
        let coeffs = CoeffSpec {
            kind: coeffs_kind.ok_or_else(|| validation("coeffs.kind", "required"))?,
            param: coeffs_param,
            window: coeffs_window,
        };
        let model = ModelSpec {
            kind: model_kind.ok_or_else(|| validation("model.kind", "required"))?,
            param: model_param,
        };
        let grid = grid.ok_or_else(|| validation("grid", "required"))?;
        if grid.is_empty() {
            return Err(validation("grid", "must be nonempty"));
        }
        if grid.contains(&0) {
            return Err(validation("grid", "entries must be >= 1"));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(validation("grid", "must be strictly ascending"));
        }
        let replicates = replicates.unwrap_or(1);
        if replicates == 0 {
            return Err(validation("replicates", "must be >= 1"));
        }
        let p_list = p_list.unwrap_or_else(|| vec![1.0, 2.0]);
        if p_list.iter().any(|&p| p < 1.0) {
            return Err(validation("p_list", "entries must be >= 1"));
        }
        let eps_tail = eps_tail.unwrap_or(1e-10);
        if eps_tail <= 0.0 {
            return Err(validation("tol.eps_tail", "must be > 0"));
        }
        let mc_slack = mc_slack.unwrap_or(3.0);
        if mc_slack < 0.0 {
            return Err(validation("tol.mc_slack", "must be >= 0"));
        }

        let cfg = SimConfig {
            coeffs,
            model,
            grid,
            replicates,
            p_list,
            seed,
            out_dir: out_dir.unwrap_or_else(|| PathBuf::from("out")),
            m,
            weight,
            eps_tail,
            mc_slack,
        };
        // descriptors must be resolvable up front
        cfg.coeffs.build()?;
        cfg.model.build(seed)?;
        if let Some(w) = &cfg.weight {
            parse_weight(w)?;
        }
        Ok(cfg)
    }

    /// Write the configuration back in the same key-value format; values
    /// round-trip bit-exactly through shortest round-trip float formatting.
    pub fn to_config_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.coeffs.to_config_lines());
        out.push_str(&self.model.to_config_lines());
        let grid: Vec<String> = self.grid.iter().map(|n| n.to_string()).collect();
        out.push_str(&format!("grid = {}\n", grid.join(",")));
        out.push_str(&format!("replicates = {}\n", self.replicates));
        let ps: Vec<String> = self.p_list.iter().map(|p| p.to_string()).collect();
        out.push_str(&format!("p_list = {}\n", ps.join(",")));
        out.push_str(&format!("seed = {}\n", self.seed));
        out.push_str(&format!("out_dir = {}\n", self.out_dir.display()));
        if let Some(m) = self.m {
            out.push_str(&format!("m = {m}\n"));
        }
        if let Some(w) = &self.weight {
            out.push_str(&format!("weight = {w}\n"));
        }
        out.push_str(&format!("tol.eps_tail = {}\n", self.eps_tail));
        out.push_str(&format!("tol.mc_slack = {}\n", self.mc_slack));
        out
    }
}

/// Weight registry names: `constant:<c>`, `linear`, or
/// `pwl:x0:y0,x1:y1,...`.
pub fn parse_weight(spec: &str) -> Result<WeightFn<f64>, ConfigError> {
    if spec == "linear" {
        return Ok(WeightFn::Linear);
    }
    if let Some(c) = spec.strip_prefix("constant:") {
        let c = c.parse::<f64>().map_err(|_| {
            validation("weight", format!("`{c}` is not a number"))
        })?;
        return Ok(WeightFn::Constant(c));
    }
    if let Some(body) = spec.strip_prefix("pwl:") {
        let mut knots = Vec::new();
        for pair in body.split(',') {
            let (x, y) = pair.split_once(':').ok_or_else(|| {
                validation("weight", format!("bad knot `{pair}`, expected x:y"))
            })?;
            let parse = |v: &str| {
                v.parse::<f64>()
                    .map_err(|_| validation("weight", format!("`{v}` is not a number")))
            };
            knots.push((parse(x)?, parse(y)?));
        }
        return WeightFn::piecewise_linear(knots)
            .map_err(|e| validation("weight", e.to_string()));
    }
    Err(validation("weight", format!("unknown weight `{spec}`")))
}
