//! Seeded random trees and step functions for the verification sweeps.
//! Everything is deterministic given the seed.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::filtration::{build_custom, FiltrationTree};
use crate::operators::StepFunction;

#[derive(Debug, Clone, Copy)]
pub struct RandomTreeParams {
    pub max_depth: usize,
    /// Lower bound for the homogeneity parameter of the generated tree.
    pub alpha_min: f64,
    pub max_branch: usize,
}

impl Default for RandomTreeParams {
    fn default() -> Self {
        RandomTreeParams {
            max_depth: 8,
            alpha_min: 0.05,
            max_branch: 4,
        }
    }
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random tree with homogeneity >= alpha_min: per-atom branching count in
/// 2..=max_branch (capped by 1/alpha_min) and child fractions of the form
/// alpha + (1 - n alpha) * dirichlet.
pub fn random_tree(rng: &mut ChaCha8Rng, params: &RandomTreeParams) -> Result<Arc<FiltrationTree>> {
    let depth = rng.gen_range(2..=params.max_depth.max(2));
    let hard_cap = (1.0 / params.alpha_min).floor() as usize;
    let max_branch = params.max_branch.clamp(2, hard_cap.max(2));
    let alpha = rng.gen_range(params.alpha_min..=(1.0 / max_branch as f64));
    let mut profile: Vec<Vec<Vec<f64>>> = Vec::with_capacity(depth);
    let mut atoms = 1usize;
    for _ in 0..depth {
        let mut level = Vec::with_capacity(atoms);
        let mut next = 0usize;
        for _ in 0..atoms {
            let n = rng.gen_range(2..=max_branch);
            let mut fr: Vec<f64> = (0..n).map(|_| -(rng.gen::<f64>().max(1e-12)).ln()).collect();
            let s: f64 = fr.iter().sum();
            for x in fr.iter_mut() {
                *x = alpha + (1.0 - n as f64 * alpha) * (*x / s);
            }
            let s: f64 = fr.iter().sum();
            for x in fr.iter_mut() {
                *x /= s;
            }
            next += n;
            level.push(fr);
        }
        profile.push(level);
        atoms = next;
    }
    build_custom(&profile)
}

/// Random step function models.
#[derive(Debug, Clone, Copy)]
pub enum FunctionModel {
    /// Independent standard normals on the leaves.
    GaussianLeaves,
    /// Independent bounded martingale differences, rescaled so that
    /// ‖Sf‖_∞ lands at `target_sup` (up to a random factor in [1/2, 1]).
    RandomHaarCoefficients { target_sup: f64 },
    /// A single-leaf spike of unit integral.
    Spike,
}

pub fn random_function(
    tree: &Arc<FiltrationTree>,
    rng: &mut ChaCha8Rng,
    model: FunctionModel,
) -> StepFunction {
    match model {
        FunctionModel::GaussianLeaves => {
            let values = (0..tree.leaf_count())
                .map(|_| StandardNormal.sample(rng))
                .collect();
            StepFunction::new(tree.clone(), values).expect("leaf count matches")
        }
        FunctionModel::RandomHaarCoefficients { target_sup } => {
            random_haar(tree, rng, target_sup)
        }
        FunctionModel::Spike => {
            let mut values = vec![0.0; tree.leaf_count()];
            let i = rng.gen_range(0..tree.leaf_count());
            values[i] = 1.0 / tree.measure(tree.leaf_node_id(i));
            StepFunction::new(tree.clone(), values).expect("leaf count matches")
        }
    }
}

fn random_haar(tree: &Arc<FiltrationTree>, rng: &mut ChaCha8Rng, target_sup: f64) -> StepFunction {
    let mut values = vec![0.0; tree.leaf_count()];
    let scale = target_sup / (tree.depth().max(1) as f64).sqrt();
    for q in 0..tree.node_count() {
        if tree.child_count(q) < 2 {
            continue;
        }
        let kids: Vec<usize> = tree.children(q).collect();
        let raw: Vec<f64> = kids.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mq = tree.measure(q);
        let mean: f64 = kids
            .iter()
            .zip(&raw)
            .map(|(&c, &v)| v * tree.measure(c))
            .sum::<f64>()
            / mq;
        for (&c, &v) in kids.iter().zip(&raw) {
            let d = (v - mean) * scale;
            let (a, b) = tree.span(c);
            for x in &mut values[a..b] {
                *x += d;
            }
        }
    }
    let mut f = StepFunction::new(tree.clone(), values).expect("leaf count matches");
    let s = f.square_function();
    let sup = s.values().iter().fold(0.0f64, |m, &v| m.max(v));
    if sup > 0.0 {
        let factor = target_sup * rng.gen_range(0.5..1.0) / sup;
        f = f.map(|v| v * factor);
    }
    f
}

/// f minus its mean.
pub fn center(f: &StepFunction) -> StepFunction {
    let m = f.mean();
    f.map(|v| v - m)
}
