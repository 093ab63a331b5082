//! TOML experiment configuration for `sqfn run`.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
    #[serde(default)]
    pub plots: bool,
    #[serde(default)]
    pub suites: Vec<String>,
    #[serde(default)]
    pub tree: TreeSpec,
    #[serde(default)]
    pub function: FunctionSpec,
    #[serde(default)]
    pub grids: Grids,
    pub certs: Option<CertSpec>,
    pub sharpness: Option<SharpnessSpec>,
}

fn default_trials() -> usize {
    50
}

fn default_out_dir() -> String {
    "artifacts".into()
}

pub const SUITES: &[&str] = &[
    "bellman",
    "moment",
    "distribution",
    "maximal",
    "cww",
    "goodlambda",
    "weighted",
    "unweighted",
    "wofe",
    "wilson",
];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeSpec {
    #[serde(default = "default_kind")]
    pub kind: String,
    #[serde(default = "default_max_depth")]
    pub max_depth: usize,
    #[serde(default = "default_alpha_min")]
    pub alpha_min: f64,
    #[serde(default = "default_max_branch")]
    pub max_branch: usize,
    /// Branching factor when kind = "nadic".
    pub n: Option<usize>,
    /// Depth when kind = "nadic".
    pub depth: Option<usize>,
}

fn default_kind() -> String {
    "random".into()
}
fn default_max_depth() -> usize {
    7
}
fn default_alpha_min() -> f64 {
    0.05
}
fn default_max_branch() -> usize {
    4
}

impl Default for TreeSpec {
    fn default() -> Self {
        TreeSpec {
            kind: default_kind(),
            max_depth: default_max_depth(),
            alpha_min: default_alpha_min(),
            max_branch: default_max_branch(),
            n: None,
            depth: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default = "default_target_sup")]
    pub target_sup: f64,
}

fn default_model() -> String {
    "random-haar-coefficients".into()
}
fn default_target_sup() -> f64 {
    4.0
}

impl Default for FunctionSpec {
    fn default() -> Self {
        FunctionSpec {
            model: default_model(),
            target_sup: default_target_sup(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    #[serde(default = "default_lambda_factors")]
    pub lambda_factors: Vec<f64>,
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    #[serde(default = "default_p")]
    pub p: Vec<f64>,
}

fn default_lambda_factors() -> Vec<f64> {
    vec![0.5, 1.0, 2.0, 4.0]
}
fn default_eps() -> Vec<f64> {
    vec![0.25, 0.5, 0.75]
}
fn default_p() -> Vec<f64> {
    vec![0.5, 1.0, 2.0, 4.0]
}

impl Default for Grids {
    fn default() -> Self {
        Grids {
            lambda_factors: default_lambda_factors(),
            eps: default_eps(),
            p: default_p(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertSpec {
    #[serde(default)]
    pub dzili_n: Vec<f64>,
    #[serde(default)]
    pub twopoint_alpha: Vec<f64>,
    /// (C, alpha) pairs for the remainder sign check.
    #[serde(default)]
    pub rm1: Vec<[f64; 2]>,
    #[serde(default)]
    pub optimal_c_alpha: Vec<f64>,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_series_eps")]
    pub series_eps: f64,
}

fn default_grid() -> usize {
    100_000
}
fn default_series_eps() -> f64 {
    1e-15
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharpnessSpec {
    pub alpha: f64,
    #[serde(default = "default_c")]
    pub c: f64,
    pub lambda_min: f64,
    #[serde(default = "default_count")]
    pub count: usize,
}

fn default_c() -> f64 {
    1.2
}
fn default_count() -> usize {
    6
}

pub fn load(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let cfg: ExperimentConfig = toml::from_str(&text).context("malformed config")?;
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &ExperimentConfig) -> Result<()> {
    for s in &cfg.suites {
        if s != "all" && !SUITES.contains(&s.as_str()) {
            bail!("unknown suite {s:?}; known: {}", SUITES.join(", "));
        }
    }
    match cfg.tree.kind.as_str() {
        "random" => {}
        "nadic" => {
            if cfg.tree.n.is_none() || cfg.tree.depth.is_none() {
                bail!("tree.kind = \"nadic\" needs tree.n and tree.depth");
            }
        }
        k => bail!("unknown tree.kind {k:?}"),
    }
    match cfg.function.model.as_str() {
        "gaussian-leaves" | "random-haar-coefficients" | "spike" => {}
        m => bail!("unknown function.model {m:?}"),
    }
    if cfg.suites.is_empty() && cfg.certs.is_none() && cfg.sharpness.is_none() {
        bail!("config requests no suites, certificates, or sharpness sweep");
    }
    if let Some(s) = &cfg.sharpness {
        if !(s.alpha > 0.0 && s.alpha <= 0.5) {
            bail!("sharpness.alpha must be in (0, 1/2]");
        }
        if s.count == 0 {
            bail!("sharpness.count must be positive");
        }
    }
    Ok(())
}
