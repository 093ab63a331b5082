//! The two extremal constructions: the planar function with bounded `S` but
//! unbounded `S_∞`, and the sharpness family `g_N` built from repeated
//! (α, 1−α) splits.

use std::sync::Arc;

use num::{BigInt, One};

use crate::error::{Error, Result};
use crate::exact::ExactStepFunction;
use crate::filtration::{build_custom, build_custom_exact, build_uniform_split, FiltrationTree, Rational};
use crate::operators::StepFunction;

/// α for the sharpness construction: exact `p/q` keeps the whole family in
/// rational arithmetic; a float α builds the f64-only family.
#[derive(Debug, Clone, Copy)]
pub enum SharpAlpha {
    Rational(i64, i64),
    Float(f64),
}

impl SharpAlpha {
    pub fn as_f64(&self) -> f64 {
        match self {
            SharpAlpha::Rational(p, q) => *p as f64 / *q as f64,
            SharpAlpha::Float(a) => *a,
        }
    }
}

/// The family of §-style martingales `g_N = Σ d_k` witnessing that the
/// homogeneity constant in the superexponential bound cannot be improved.
#[derive(Debug, Clone)]
pub struct SharpnessFamily {
    pub alpha: f64,
    pub alpha_exact: Option<Rational>,
    /// Number of differences d_0..d_{N-1}.
    pub n_diffs: usize,
    pub tree: Arc<FiltrationTree>,
    pub g: StepFunction,
    pub g_exact: Option<ExactStepFunction>,
    /// Normalized member g_N / ‖S g_N‖_∞, when built via [`build_f_lambda`].
    pub f_lambda: Option<StepFunction>,
    pub lambda: Option<f64>,
    pub n_of_lambda: Option<usize>,
}

impl SharpnessFamily {
    /// ‖S g_N‖²_∞ = N − 1 + (1−α)²/α².
    pub fn s_sup_sq_closed_form(&self) -> f64 {
        let a = self.alpha;
        (self.n_diffs as f64) - 1.0 + (1.0 - a) * (1.0 - a) / (a * a)
    }

    pub fn s_sup_sq_exact(&self) -> Option<Rational> {
        let a = self.alpha_exact.as_ref()?;
        let one = Rational::one();
        let r = (&one - a) / a;
        Some(Rational::from(BigInt::from(self.n_diffs as i64 - 1)) + &r * &r)
    }

    /// (1−α)^N, the measure of `{g_N ≥ N}`.
    pub fn top_set_measure(&self) -> f64 {
        (1.0 - self.alpha).powi(self.n_diffs as i32)
    }

    pub fn top_set_measure_exact(&self) -> Option<Rational> {
        let a = self.alpha_exact.as_ref()?;
        Some(crate::exact::pow(&(Rational::one() - a), self.n_diffs))
    }
}

/// Depth-`n` chain-split tree for the sharpness family: at every level the
/// surviving set splits off the leftmost mass-α child, everything already
/// split off is carried down by single-child chains.
fn sharpness_tree_profile_f64(alpha: f64, n: usize) -> Vec<Vec<Vec<f64>>> {
    (0..n)
        .map(|k| {
            let mut level = vec![vec![1.0]; k];
            level.push(vec![alpha, 1.0 - alpha]);
            level
        })
        .collect()
}

fn sharpness_tree_profile_exact(alpha: &Rational, n: usize) -> Vec<Vec<Vec<Rational>>> {
    (0..n)
        .map(|k| {
            let mut level = vec![vec![Rational::one()]; k];
            level.push(vec![alpha.clone(), Rational::one() - alpha]);
            level
        })
        .collect()
}

/// Build `g_N = Σ_{k<N} d_k` with `d_k = 1 on E_k^β, −(1−α)/α on E_k^α`.
///
/// Leaf `j < N` is the chain descendant of `E_j^α` (measure `α(1−α)^j`,
/// value `j − (1−α)/α`), leaf `N` is `E_N` (measure `(1−α)^N`, value `N`).
pub fn build_sharpness(alpha: SharpAlpha, n: usize) -> Result<SharpnessFamily> {
    let a = alpha.as_f64();
    if !(a > 0.0 && a <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "sharpness family needs alpha in (0, 1/2], got {a}"
        )));
    }
    if n < 1 {
        return Err(Error::InvalidParameter("need N >= 1".into()));
    }
    let (tree, alpha_exact) = match alpha {
        SharpAlpha::Rational(p, q) => {
            let ar = Rational::new(BigInt::from(p), BigInt::from(q));
            let t = build_custom_exact(&sharpness_tree_profile_exact(&ar, n))?;
            (t, Some(ar))
        }
        SharpAlpha::Float(_) => (build_custom(&sharpness_tree_profile_f64(a, n))?, None),
    };

    let jump = (1.0 - a) / a;
    let mut values: Vec<f64> = (0..n).map(|j| j as f64 - jump).collect();
    values.push(n as f64);
    let g = StepFunction::new(tree.clone(), values)?;

    let g_exact = alpha_exact.as_ref().map(|ar| {
        let jump = (Rational::one() - ar) / ar;
        let mut vals: Vec<Rational> = (0..n)
            .map(|j| Rational::from(BigInt::from(j as i64)) - &jump)
            .collect();
        vals.push(Rational::from(BigInt::from(n as i64)));
        ExactStepFunction::new(tree.clone(), vals).expect("exact tree")
    });

    Ok(SharpnessFamily {
        alpha: a,
        alpha_exact,
        n_diffs: n,
        tree,
        g,
        g_exact,
        f_lambda: None,
        lambda: None,
        n_of_lambda: None,
    })
}

/// Smallest N with N/‖S g_N‖_∞ ≥ λ.
pub fn n_of_lambda(alpha: f64, lambda: f64) -> usize {
    let jump_sq = (1.0 - alpha) * (1.0 - alpha) / (alpha * alpha);
    let ok = |n: usize| {
        let nn = n as f64;
        nn / (nn - 1.0 + jump_sq).sqrt() >= lambda
    };
    let mut hi = 1usize;
    while !ok(hi) {
        hi *= 2;
    }
    let mut lo = hi / 2; // every n <= lo fails (or lo = 0)
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// The normalized sharpness member f_λ = g_{N(λ)} / ‖S g_{N(λ)}‖_∞.
/// Requires λ large enough that N(λ) > 1/α².
pub fn build_f_lambda(alpha: f64, lambda: f64) -> Result<SharpnessFamily> {
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(Error::InvalidParameter(format!("alpha out of range: {alpha}")));
    }
    let n = n_of_lambda(alpha, lambda);
    if (n as f64) <= 1.0 / (alpha * alpha) {
        return Err(Error::Resolution(format!(
            "lambda = {lambda} too small: N(lambda) = {n} <= 1/alpha^2"
        )));
    }
    let mut fam = build_sharpness(SharpAlpha::Float(alpha), n)?;
    let s_sup = fam.s_sup_sq_closed_form().sqrt();
    fam.f_lambda = Some(fam.g.map(|v| v / s_sup));
    fam.lambda = Some(lambda);
    fam.n_of_lambda = Some(n);
    Ok(fam)
}

/// The planar example: a function on the 4-ary (dyadic ℝ²) tree of depth
/// `k_max` with `S f ≡ 1` on every leaf while `max S_∞ f = √k_max`.
///
/// Generations k = 0..k_max−1 contribute `f_Q = 1_{I¹₊}(x₁) h_{I²}(x₂)` for
/// the squares `Q = [0, 2^{-k}) × I`; the last generation uses the full
/// first factor `1_{I¹}` so that the supports tile all of `[0,1)` in `x₁`
/// at finite depth (depth truncation of the infinite sum).
pub fn build_example_2d(k_max: usize) -> Result<StepFunction> {
    if k_max < 1 {
        return Err(Error::InvalidParameter("need k_max >= 1".into()));
    }
    // quarter splits are exact in f64; skip the rational bookkeeping, the
    // depth-10 tree already has ~1.4M nodes
    let tree = build_uniform_split(&[0.25; 4], k_max)?;
    let mut values = vec![0.0; tree.leaf_count()];
    for (i, v) in values.iter_mut().enumerate() {
        let (x1, x2) = leaf_coords_2d(k_max, i);
        *v = example_2d_value(k_max, x1, x2);
    }
    StepFunction::new(tree, values)
}

/// Integer cell coordinates in `[0, 2^k_max)²` of leaf number `i`; child
/// digit encodes (x₁ half, x₂ half) as `2·b₁ + b₂`, most significant first.
pub fn leaf_coords_2d(k_max: usize, leaf: usize) -> (u64, u64) {
    let mut x1 = 0u64;
    let mut x2 = 0u64;
    for lvl in (0..k_max).rev() {
        let digit = (leaf >> (2 * lvl)) & 3;
        x1 = (x1 << 1) | (digit as u64 >> 1);
        x2 = (x2 << 1) | (digit as u64 & 1);
    }
    (x1, x2)
}

fn example_2d_value(k_max: usize, x1: u64, x2: u64) -> f64 {
    let mut v = 0.0;
    for k in 0..k_max {
        let shift = (k_max - k - 1) as u64;
        let in_x1 = if k + 1 == k_max {
            x1 >> 1 == 0 // last generation: full I¹ = [0, 2^{1-k_max})
        } else {
            x1 >> shift == 1 // I¹₊ = [2^{-k-1}, 2^{-k})
        };
        if in_x1 {
            let upper = (x2 >> shift) & 1 == 1;
            v += if upper { 1.0 } else { -1.0 };
        }
    }
    v
}

/// Whether a level-`k` node of the 4-ary tree is one of the special squares
/// `[0, 2^{-k}) × I` (those carrying the nonzero martingale differences).
pub fn is_special_square(tree: &FiltrationTree, k_max: usize, node: usize) -> bool {
    let level = tree.node(node).level as usize;
    if level >= k_max {
        return false;
    }
    let (a, _) = tree.span(node);
    let (x1, _) = leaf_coords_2d(k_max, a);
    x1 >> (k_max - level) == 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::ratio;
    use num::ToPrimitive;

    #[test]
    fn sharpness_n1_half_is_haar_like() {
        let fam = build_sharpness(SharpAlpha::Rational(1, 2), 1).unwrap();
        assert_eq!(fam.g.values(), &[-1.0, 1.0]);
        let s = fam.g.square_function();
        assert!(s.values().iter().all(|&v| (v - 1.0).abs() < 1e-15));
        assert!((fam.g.distribution(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sharpness_closed_forms() {
        // alpha = 1/4, N = 20 > 1/alpha^2: ‖S g_N‖²_∞ = 19 + 9 = 28
        let fam = build_sharpness(SharpAlpha::Rational(1, 4), 20).unwrap();
        assert_eq!(fam.s_sup_sq_closed_form(), 28.0);
        let s2 = fam.g_exact.as_ref().unwrap().square_sq();
        let max = s2.iter().max().unwrap();
        assert_eq!(max, &ratio(28, 1));
        // |{g_N > N - 1/2}| = (3/4)^20 exactly
        let d = fam
            .g_exact
            .as_ref()
            .unwrap()
            .distribution(&(ratio(20, 1) - ratio(1, 2)));
        assert_eq!(d, crate::exact::pow(&ratio(3, 4), 20));
        // zero mean, exactly
        assert!(fam.g_exact.as_ref().unwrap().integral().to_f64().unwrap() == 0.0);
    }

    #[test]
    fn sharpness_square_levels() {
        // S g² takes values k + (1−α)²/α² on E_k^α and N on E_N
        let fam = build_sharpness(SharpAlpha::Rational(1, 4), 6).unwrap();
        let ge = fam.g_exact.as_ref().unwrap();
        let s2 = ge.square_sq();
        let jump_sq = ratio(9, 1);
        for k in 0..6usize {
            assert_eq!(s2[k], ratio(k as i64, 1) + &jump_sq);
        }
        assert_eq!(s2[6], ratio(6, 1));
        // E d_k = 0 carries over: reconstruction of g from differences
        let rec = fam.g.decompose().reconstruct();
        for (a, b) in rec.values().iter().zip(fam.g.values()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn maximal_of_g_hits_n() {
        let fam = build_sharpness(SharpAlpha::Float(0.3), 7).unwrap();
        let m = fam.g.maximal_function();
        let last = *m.values().last().unwrap();
        assert!(last >= 7.0 - 1e-12);
    }

    #[test]
    fn f_lambda_normalization() {
        let fam = build_f_lambda(0.25, 6.0).unwrap();
        let f = fam.f_lambda.as_ref().unwrap();
        let s = f.square_function();
        let sup = s.values().iter().fold(0.0f64, |m, &v| m.max(v));
        assert!((sup - 1.0).abs() < 1e-12);
        let n = fam.n_of_lambda.unwrap();
        assert!(n as f64 > 1.0 / (0.25 * 0.25));
        // N(λ)/λ² approaches 1 from above as λ grows
        let big = build_f_lambda(0.25, 40.0).unwrap();
        let ratio40 = big.n_of_lambda.unwrap() as f64 / (40.0 * 40.0);
        assert!(ratio40 < 1.10 && ratio40 >= 1.0 - 1e-12, "ratio {ratio40}");
    }

    #[test]
    fn f_lambda_too_small() {
        assert!(build_f_lambda(0.1, 1.0).is_err());
    }

    #[test]
    fn example_2d_square_function_is_one() {
        for k_max in [1usize, 2, 3, 5] {
            let f = build_example_2d(k_max).unwrap();
            assert!(f.mean().abs() < 1e-12, "mean at k_max={k_max}");
            let s = f.square_function();
            for &v in s.values() {
                assert!((v - 1.0).abs() < 1e-12, "k_max={k_max}: Sf = {v}");
            }
        }
    }

    #[test]
    fn example_2d_sinf_overlap_count() {
        let k_max = 5usize;
        let f = build_example_2d(k_max).unwrap();
        let sinf = f.square_function_p(f64::INFINITY).unwrap();
        let mut max = 0.0f64;
        for (i, &v) in sinf.values().iter().enumerate() {
            let (x1, _) = leaf_coords_2d(k_max, i);
            // x1 in [2^{j-1}, 2^j) sees k_max - j + 1 generations; x1 = 0 sees all
            let expected = if x1 == 0 {
                k_max as f64
            } else {
                let j = 64 - (x1.leading_zeros() as usize); // floor(log2 x1) + 1
                (k_max - j + 1) as f64
            };
            assert!(
                (v * v - expected).abs() < 1e-10,
                "leaf {i} x1={x1}: S_inf^2 = {} expected {expected}",
                v * v
            );
            max = max.max(v);
        }
        assert!((max - (k_max as f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn example_2d_differences_on_special_squares() {
        let k_max = 4usize;
        let f = build_example_2d(k_max).unwrap();
        let t = f.tree().clone();
        let dec = f.decompose();
        for a in &dec.atoms {
            let nonzero = a.child_values.iter().any(|v| v.abs() > 1e-12);
            assert_eq!(
                nonzero,
                is_special_square(&t, k_max, a.atom),
                "atom {} level {}",
                a.atom,
                t.node(a.atom).level
            );
        }
    }
}
