//! Verifier suites driven by an [`ExperimentConfig`].

use std::sync::Arc;

use anyhow::{bail, Result};
use sqfn_core::constructions;
use sqfn_core::filtration::build_nadic;
use sqfn_core::inequalities;
use sqfn_core::random::{self, ChaCha8Rng, FunctionModel, RandomTreeParams};
use sqfn_core::{FiltrationTree, InequalityReport, StepFunction};

use crate::config::{ExperimentConfig, FunctionSpec, TreeSpec, SUITES};

pub fn parse_model(spec: &FunctionSpec) -> Result<FunctionModel> {
    Ok(match spec.model.as_str() {
        "gaussian-leaves" => FunctionModel::GaussianLeaves,
        "random-haar-coefficients" => FunctionModel::RandomHaarCoefficients {
            target_sup: spec.target_sup,
        },
        "spike" => FunctionModel::Spike,
        m => bail!("unknown function model {m:?}"),
    })
}

fn build_tree(spec: &TreeSpec, rng: &mut ChaCha8Rng) -> Result<Arc<FiltrationTree>> {
    Ok(match spec.kind.as_str() {
        "nadic" => build_nadic(spec.n.unwrap(), spec.depth.unwrap())?,
        _ => random::random_tree(
            rng,
            &RandomTreeParams {
                max_depth: spec.max_depth,
                alpha_min: spec.alpha_min,
                max_branch: spec.max_branch,
            },
        )?,
    })
}

fn sup(values: &[f64]) -> f64 {
    values.iter().cloned().fold(0.0f64, f64::max)
}

fn median_abs_average(f: &StepFunction) -> f64 {
    let mut mags: Vec<f64> = f.atom_averages().iter().map(|a| a.abs()).collect();
    mags.sort_by(f64::total_cmp);
    mags[mags.len() / 2]
}

fn spike_mixture(t: &Arc<FiltrationTree>, rng: &mut ChaCha8Rng) -> StepFunction {
    let a = random::random_function(t, rng, FunctionModel::Spike);
    let b = random::random_function(t, rng, FunctionModel::Spike);
    StepFunction::new(
        t.clone(),
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| 0.2 + x + 0.5 * y)
            .collect(),
    )
    .expect("values match tree")
}

/// Run the configured suites over `trials` random inputs; the report order
/// is deterministic for a fixed config.
pub fn run_suites(cfg: &ExperimentConfig) -> Result<Vec<InequalityReport>> {
    let suites: Vec<&str> = if cfg.suites.iter().any(|s| s == "all") {
        SUITES.to_vec()
    } else {
        cfg.suites.iter().map(String::as_str).collect()
    };
    let model = parse_model(&cfg.function)?;
    let needs_weight = suites
        .iter()
        .any(|s| matches!(*s, "weighted" | "wofe" | "wilson"));
    let mut rng = random::rng_from_seed(cfg.seed);
    let mut out = Vec::new();
    for _ in 0..cfg.trials {
        let tree = build_tree(&cfg.tree, &mut rng)?;
        let f = random::random_function(&tree, &mut rng, model);
        let centered = random::center(&f);
        let w = needs_weight.then(|| spike_mixture(&tree, &mut rng));
        for &suite in &suites {
            match suite {
                "bellman" => out.push(inequalities::verify_exp_bellman(&f)),
                "moment" => out.push(inequalities::verify_exp_moment(&f)),
                "distribution" => {
                    let s_sup = sup(f.square_function().values());
                    if s_sup > 0.0 {
                        let grid: Vec<f64> =
                            cfg.grids.lambda_factors.iter().map(|c| c * s_sup).collect();
                        out.extend(inequalities::verify_superexp_distribution(&f, &grid)?);
                    }
                }
                "maximal" => {
                    let s_sup = sup(centered.square_function().values());
                    if s_sup > 0.0 {
                        let grid: Vec<f64> =
                            cfg.grids.lambda_factors.iter().map(|c| c * s_sup).collect();
                        out.extend(inequalities::verify_superexp_maximal(&centered, &grid)?);
                    }
                }
                "cww" => {
                    let sinf_sup = sup(f.square_function_p(f64::INFINITY)?.values());
                    if sinf_sup > 0.0 {
                        let grid: Vec<f64> = cfg
                            .grids
                            .lambda_factors
                            .iter()
                            .map(|c| c * sinf_sup)
                            .collect();
                        out.extend(inequalities::verify_cww_sinf(&f, &grid)?);
                    }
                }
                "goodlambda" => {
                    let lambda = median_abs_average(&centered);
                    if lambda > 0.0 {
                        for &eps in &cfg.grids.eps {
                            out.extend(inequalities::verify_good_lambda(&centered, lambda, eps)?);
                        }
                    }
                }
                "weighted" => {
                    let w = w.as_ref().unwrap();
                    for &p in &cfg.grids.p {
                        out.push(inequalities::verify_weighted_lower_bound(&centered, w, p)?);
                    }
                }
                "unweighted" => {
                    for &p in &cfg.grids.p {
                        out.push(inequalities::verify_unweighted_lp(&centered, p)?);
                    }
                }
                "wofe" => {
                    let leaf = tree.leaf_node_id(0);
                    out.push(inequalities::verify_w_of_e(w.as_ref().unwrap(), 0, &[leaf])?);
                }
                "wilson" => {
                    out.push(inequalities::verify_wilson_ratio(&centered, w.as_ref().unwrap(), 2.0)?);
                }
                s => bail!("unknown suite {s:?}"),
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SharpnessRow {
    pub lambda: f64,
    pub measure: f64,
    pub bound: f64,
    pub ratio: f64,
}

pub fn run_sharpness(alpha: f64, c: f64, lambda_min: f64, count: usize) -> Result<Vec<SharpnessRow>> {
    let mut rows = Vec::with_capacity(count);
    for i in 0..count {
        let lambda = lambda_min + i as f64;
        let fam = constructions::build_f_lambda(alpha, lambda)?;
        let f = fam.f_lambda.as_ref().expect("built via build_f_lambda");
        let measure = f.distribution(lambda * (1.0 - 1e-6));
        let bound = (-c * alpha * lambda * lambda).exp();
        let ratio = measure.ln() / (-alpha * lambda * lambda);
        rows.push(SharpnessRow {
            lambda,
            measure,
            bound,
            ratio,
        });
    }
    Ok(rows)
}
