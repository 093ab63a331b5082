//! Verifiers for the theorem-level inequalities: exponential moment bounds,
//! superexponential distribution bounds, good-λ, weighted and unweighted Lᵖ
//! estimates, and the ratio-mode monitors for the ≲ statements.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{Kahan, StepFunction};
use crate::weights;

/// Pass threshold: margin ≥ −1e-9·max(|rhs|, 1).
pub const REL_TOL: f64 = 1e-9;

/// Exponent magnitude beyond which reports switch to the log domain.
const LOG_DOMAIN_CUTOFF: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    #[serde(rename = "strict-bound")]
    StrictBound,
    #[serde(rename = "ratio")]
    Ratio,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::StrictBound => "strict-bound",
            Mode::Ratio => "ratio",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// rhs − lhs, signed.
    pub margin: f64,
    pub params: BTreeMap<String, f64>,
    pub mode: Mode,
    pub pass: bool,
    pub tolerance: f64,
    pub flag: Option<String>,
}

pub(crate) fn strict_report(
    name: &str,
    lhs: f64,
    rhs: f64,
    params: BTreeMap<String, f64>,
) -> InequalityReport {
    strict(name, lhs, rhs, params)
}

fn strict(name: &str, lhs: f64, rhs: f64, params: BTreeMap<String, f64>) -> InequalityReport {
    let margin = rhs - lhs;
    let tolerance = REL_TOL * rhs.abs().max(1.0);
    InequalityReport {
        name: name.into(),
        lhs,
        rhs,
        margin,
        params,
        mode: Mode::StrictBound,
        pass: margin >= -tolerance,
        tolerance,
        flag: None,
    }
}

fn ratio_mode(name: &str, lhs: f64, rhs: f64, params: BTreeMap<String, f64>) -> InequalityReport {
    InequalityReport {
        name: name.into(),
        lhs,
        rhs,
        margin: rhs - lhs,
        params,
        mode: Mode::Ratio,
        pass: true,
        tolerance: 0.0,
        flag: None,
    }
}

/// ln Σ m_i e^{e_i} without overflow.
pub(crate) fn log_weighted_exp_sum(exponents: &[f64], measures: &[f64]) -> f64 {
    let top = exponents.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return top;
    }
    let mut acc = Kahan::default();
    for (e, m) in exponents.iter().zip(measures) {
        acc.add(m * (e - top).exp());
    }
    top + acc.value().ln()
}

/// Build a strict report for `∫ e^{exponents} ≤ e^{log_rhs}`, switching to
/// the log domain when either side would overflow.
fn exp_report(
    name: &str,
    exponents: &[f64],
    measures: &[f64],
    log_rhs: f64,
    mut params: BTreeMap<String, f64>,
) -> InequalityReport {
    let log_lhs = log_weighted_exp_sum(exponents, measures);
    if log_lhs.max(log_rhs) > LOG_DOMAIN_CUTOFF {
        let mut r = strict(name, log_lhs, log_rhs, params);
        r.flag = Some("log-domain".into());
        r
    } else {
        params.insert("log_lhs".into(), log_lhs);
        strict(name, log_lhs.exp(), log_rhs.exp(), params)
    }
}

/// 𝔼 exp(f − S(f)²/4α) ≤ exp(𝔼f).
pub fn verify_exp_bellman(f: &StepFunction) -> InequalityReport {
    let alpha = f.tree().homogeneity().effective_alpha;
    let s2 = f.square_sq();
    let exps: Vec<f64> = f
        .values()
        .iter()
        .zip(s2.values())
        .map(|(v, s)| v - s / (4.0 * alpha))
        .collect();
    let mut params = BTreeMap::new();
    params.insert("alpha".into(), alpha);
    exp_report(
        "exp-bellman",
        &exps,
        &f.tree().leaf_measures(),
        f.mean(),
        params,
    )
}

/// 𝔼 exp(f − 𝔼f) ≤ e^{‖Sf‖²∞/4α}.
pub fn verify_exp_moment(f: &StepFunction) -> InequalityReport {
    let alpha = f.tree().homogeneity().effective_alpha;
    let mean = f.mean();
    let sup = sup_value(&f.square_function());
    let exps: Vec<f64> = f.values().iter().map(|v| v - mean).collect();
    let mut params = BTreeMap::new();
    params.insert("alpha".into(), alpha);
    params.insert("s_sup".into(), sup);
    exp_report(
        "exp-moment",
        &exps,
        &f.tree().leaf_measures(),
        sup * sup / (4.0 * alpha),
        params,
    )
}

fn sup_value(f: &StepFunction) -> f64 {
    f.values().iter().cloned().fold(0.0f64, f64::max)
}

fn check_lambda_grid(lambda_grid: &[f64]) -> Result<()> {
    if lambda_grid.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::InvalidParameter("lambda values must be positive".into()));
    }
    Ok(())
}

/// |{x : f(x) − 𝔼f > λ}| ≤ e^{−αλ²/‖Sf‖²∞}, one report per λ.
pub fn verify_superexp_distribution(
    f: &StepFunction,
    lambda_grid: &[f64],
) -> Result<Vec<InequalityReport>> {
    check_lambda_grid(lambda_grid)?;
    let alpha = f.tree().homogeneity().effective_alpha;
    let mean = f.mean();
    let centered = f.map(|v| v - mean);
    let sup = sup_value(&f.square_function());
    Ok(lambda_grid
        .iter()
        .map(|&lambda| {
            let lhs = centered.distribution(lambda);
            let rhs = if sup > 0.0 {
                (-alpha * lambda * lambda / (sup * sup)).exp()
            } else {
                0.0 // f constant, lhs = 0
            };
            let mut params = BTreeMap::new();
            params.insert("alpha".into(), alpha);
            params.insert("lambda".into(), lambda);
            params.insert("s_sup".into(), sup);
            strict("superexp-distribution", lhs, rhs, params)
        })
        .collect())
}

/// |{x : f*(x) > λ}| ≤ 2 e^{−αλ²/‖Sf‖²∞}; requires 𝔼f = 0.
pub fn verify_superexp_maximal(
    f: &StepFunction,
    lambda_grid: &[f64],
) -> Result<Vec<InequalityReport>> {
    check_lambda_grid(lambda_grid)?;
    if f.mean().abs() > 1e-12 {
        return Err(Error::Precondition(format!(
            "maximal bound needs a centered function, mean = {}",
            f.mean()
        )));
    }
    let alpha = f.tree().homogeneity().effective_alpha;
    let maximal = f.maximal_function();
    let sup = sup_value(&f.square_function());
    Ok(lambda_grid
        .iter()
        .map(|&lambda| {
            let lhs = maximal.distribution(lambda);
            let rhs = if sup > 0.0 {
                2.0 * (-alpha * lambda * lambda / (sup * sup)).exp()
            } else {
                0.0
            };
            let mut params = BTreeMap::new();
            params.insert("alpha".into(), alpha);
            params.insert("lambda".into(), lambda);
            params.insert("s_sup".into(), sup);
            strict("superexp-maximal", lhs, rhs, params)
        })
        .collect())
}

/// |{x : f(x) − ⟨f⟩ ≥ λ}| ≤ e^{−λ²/(2‖S_∞f‖²∞)}; no homogeneity needed.
pub fn verify_cww_sinf(f: &StepFunction, lambda_grid: &[f64]) -> Result<Vec<InequalityReport>> {
    check_lambda_grid(lambda_grid)?;
    let mean = f.mean();
    let sinf = f.square_function_p(f64::INFINITY)?;
    let sup = sup_value(&sinf);
    let t = f.tree();
    Ok(lambda_grid
        .iter()
        .map(|&lambda| {
            // the bound is stated with the non-strict level set
            let mut lhs = Kahan::default();
            for (i, id) in t.leaf_nodes().enumerate() {
                if f.values()[i] - mean >= lambda {
                    lhs.add(t.measure(id));
                }
            }
            let rhs = if sup > 0.0 {
                (-lambda * lambda / (2.0 * sup * sup)).exp()
            } else {
                0.0
            };
            let mut params = BTreeMap::new();
            params.insert("lambda".into(), lambda);
            params.insert("sinf_sup".into(), sup);
            strict("cww-sinf", lhs.value(), rhs, params)
        })
        .collect())
}

/// C(α,p) = 2^{1/p} · 2^{(p+4)/2} · α^{−3/2} · (ln(2/α))^{1/2}.
pub fn weighted_constant(alpha: f64, p: f64) -> f64 {
    (2.0f64).powf(1.0 / p) * (2.0f64).powf((p + 4.0) / 2.0)
        * alpha.powf(-1.5)
        * (2.0 / alpha).ln().sqrt()
}

/// ‖f*‖_{Lᵖ(w)} ≤ C(α,p)·[w]_{A∞}^{1/2}·‖Sf‖_{Lᵖ(w)}.
pub fn verify_weighted_lower_bound(
    f: &StepFunction,
    w: &StepFunction,
    p: f64,
) -> Result<InequalityReport> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p must be in (0, inf), got {p}")));
    }
    let alpha = f.tree().homogeneity().effective_alpha;
    let a_inf = weights::ainfty_martingale(w)?;
    let lhs = weights::weighted_lp_norm(&f.maximal_function(), w, p)?;
    let s = f.square_function();
    let rhs = weighted_constant(alpha, p) * a_inf.sqrt() * weights::weighted_lp_norm(&s, w, p)?;
    let mut params = BTreeMap::new();
    params.insert("alpha".into(), alpha);
    params.insert("p".into(), p);
    params.insert("a_infty".into(), a_inf);
    let mut r = strict("weighted-lower-bound", lhs, rhs, params);
    if sup_value(&s) == 0.0 {
        r.flag = Some("degenerate: Sf == 0".into());
    } else if f.mean().abs() > 1e-12 {
        r.flag = Some("nonzero mean".into());
    }
    Ok(r)
}

/// ‖f*‖_{Lᵖ} ≤ 4·2^{1/p}·α^{−3/2}·(p+2)^{1/2}·‖Sf‖_{Lᵖ}.
pub fn verify_unweighted_lp(f: &StepFunction, p: f64) -> Result<InequalityReport> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p must be in (0, inf), got {p}")));
    }
    let alpha = f.tree().homogeneity().effective_alpha;
    let lhs = f.maximal_function().lp_norm(p);
    let s = f.square_function();
    let rhs = 4.0 * (2.0f64).powf(1.0 / p) * alpha.powf(-1.5) * (p + 2.0).sqrt() * s.lp_norm(p);
    let mut params = BTreeMap::new();
    params.insert("alpha".into(), alpha);
    params.insert("p".into(), p);
    let mut r = strict("unweighted-lp", lhs, rhs, params);
    if sup_value(&s) == 0.0 {
        r.flag = Some("degenerate: Sf == 0".into());
    } else if f.mean().abs() > 1e-12 {
        r.flag = Some("nonzero mean".into());
    }
    Ok(r)
}

/// 2·exp(−α³(1−ε)²/((1−2α+2α²)ε²)), the good-λ right-hand side per unit
/// measure.
pub fn good_lambda_factor(alpha: f64, eps: f64) -> f64 {
    let a3 = alpha * alpha * alpha;
    2.0 * (-a3 * (1.0 - eps) * (1.0 - eps) / ((1.0 - 2.0 * alpha + 2.0 * alpha * alpha) * eps * eps))
        .exp()
}

/// Maximal atoms Q with |⟨f⟩_Q| > λ.
pub fn stopping_atoms(f: &StepFunction, lambda: f64) -> Vec<usize> {
    let t = f.tree();
    let avg = f.atom_averages();
    let mut out = Vec::new();
    let mut stack = vec![0usize];
    while let Some(q) = stack.pop() {
        if avg[q].abs() > lambda {
            out.push(q);
        } else {
            stack.extend(t.children(q));
        }
    }
    out.sort_unstable();
    out
}

/// Per-Q good-λ reports: |{x∈Q : f* > 2λ, Sf ≤ ελ}| ≤ factor(α,ε)·|Q|.
pub fn verify_good_lambda(
    f: &StepFunction,
    lambda: f64,
    eps: f64,
) -> Result<Vec<InequalityReport>> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter("lambda must be positive".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be in (0,1), got {eps}")));
    }
    let t = f.tree();
    let alpha = t.homogeneity().effective_alpha;
    let maximal = f.maximal_function();
    let s = f.square_function();
    let factor = good_lambda_factor(alpha, eps);
    Ok(stopping_atoms(f, lambda)
        .into_iter()
        .map(|q| {
            let (a, b) = t.span(q);
            let mut lhs = Kahan::default();
            for i in a..b {
                if maximal.values()[i] > 2.0 * lambda && s.values()[i] <= eps * lambda {
                    lhs.add(t.measure(t.leaf_node_id(i)));
                }
            }
            let rhs = factor * t.measure(q);
            let mut params = BTreeMap::new();
            params.insert("alpha".into(), alpha);
            params.insert("lambda".into(), lambda);
            params.insert("epsilon".into(), eps);
            params.insert("atom".into(), q as f64);
            strict("good-lambda", lhs.value(), rhs, params)
        })
        .collect())
}

/// w(E) ≤ 2A·ln(2/α)/ln(|Q0|/|E|)·w(Q0) for E a union of atoms strictly
/// inside Q0, with A = ⟨(w·1_{Q0})*⟩_{Q0}/⟨w⟩_{Q0}.
pub fn verify_w_of_e(
    w: &StepFunction,
    q0: usize,
    atoms: &[usize],
) -> Result<InequalityReport> {
    let t = w.tree().clone();
    if q0 >= t.node_count() {
        return Err(Error::ForeignAtom(q0));
    }
    let (qa, qb) = t.span(q0);
    let mut spans: Vec<(usize, usize)> = Vec::with_capacity(atoms.len());
    for &a in atoms {
        if a >= t.node_count() || a == q0 || !t.ancestors(a).any(|x| x == q0) {
            return Err(Error::Precondition(format!(
                "atom {a} is not strictly inside atom {q0}"
            )));
        }
        spans.push(t.span(a));
    }
    spans.sort_unstable();
    for pair in spans.windows(2) {
        if pair[1].0 < pair[0].1 {
            return Err(Error::Precondition("atoms of E overlap".into()));
        }
    }
    let e_measure: f64 = atoms.iter().map(|&a| t.measure(a)).sum();
    let q_measure = t.measure(q0);
    if e_measure >= q_measure {
        return Err(Error::Precondition(format!(
            "|E| = {e_measure} must be strictly less than |Q0| = {q_measure}"
        )));
    }
    let alpha = t.homogeneity().effective_alpha;
    let avg_w_q0 = w.average(q0)?;
    if avg_w_q0 <= 0.0 {
        return Err(Error::Precondition("w vanishes on Q0".into()));
    }
    let localized = StepFunction::new(
        t.clone(),
        w.values()
            .iter()
            .enumerate()
            .map(|(i, &v)| if i >= qa && i < qb { v } else { 0.0 })
            .collect(),
    )?;
    let wstar = localized.maximal_function();
    let mut acc = Kahan::default();
    for i in qa..qb {
        acc.add(wstar.values()[i] * t.measure(t.leaf_node_id(i)));
    }
    let a_const = acc.value() / q_measure / avg_w_q0;

    let mut lhs = Kahan::default();
    for &(a, b) in spans.iter() {
        for i in a..b {
            lhs.add(w.values()[i] * t.measure(t.leaf_node_id(i)));
        }
    }
    let w_q0 = avg_w_q0 * q_measure;
    let rhs = 2.0 * a_const * (2.0 / alpha).ln() / (q_measure / e_measure).ln() * w_q0;
    let mut params = BTreeMap::new();
    params.insert("alpha".into(), alpha);
    params.insert("a_const".into(), a_const);
    params.insert("atom".into(), q0 as f64);
    params.insert("e_measure".into(), e_measure);
    Ok(strict("w-of-e", lhs.value(), rhs, params))
}

/// Ratio monitor for ∫|f*|ᵖw ≲ [w]^{p/2}·∫(S_∞f)ᵖw; never pass/fail.
pub fn verify_wilson_ratio(
    f: &StepFunction,
    w: &StepFunction,
    p: f64,
) -> Result<InequalityReport> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p must be in (0, inf), got {p}")));
    }
    let a_inf = weights::ainfty_semiclassical(w)?;
    let lhs = weights::weighted_lp_norm(&f.maximal_function(), w, p)?.powf(p);
    let sinf = f.square_function_p(f64::INFINITY)?;
    let denom = a_inf.powf(p / 2.0) * weights::weighted_lp_norm(&sinf, w, p)?.powf(p);
    let mut params = BTreeMap::new();
    params.insert("p".into(), p);
    params.insert("a_infty_scl".into(), a_inf);
    let ratio = if denom > 0.0 {
        lhs / denom
    } else if lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    params.insert("ratio".into(), ratio);
    let mut r = ratio_mode("wilson-ratio", lhs, denom, params);
    if denom == 0.0 && lhs > 0.0 {
        r.flag = Some("degenerate: S_inf f == 0".into());
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::{build_custom, build_nadic};
    use crate::random::{self, FunctionModel, RandomTreeParams};

    #[test]
    fn bellman_equality_on_constants() {
        let t = build_nadic(2, 3).unwrap();
        let f = StepFunction::constant(t, 1.7);
        let r = verify_exp_bellman(&f);
        assert!(r.pass);
        assert!(r.margin.abs() < 1e-12 * r.rhs);
        assert!((r.lhs - (1.7f64).exp()).abs() < 1e-12 * r.rhs);
    }

    #[test]
    fn bellman_random_sweep() {
        let mut rng = random::rng_from_seed(100);
        let params = RandomTreeParams::default();
        for _ in 0..25 {
            let t = random::random_tree(&mut rng, &params).unwrap();
            let f = random::random_function(&t, &mut rng, FunctionModel::RandomHaarCoefficients { target_sup: 4.0 });
            let r = verify_exp_bellman(&f);
            assert!(r.pass, "margin {} rhs {}", r.margin, r.rhs);
        }
    }

    #[test]
    fn bellman_near_equality_haar() {
        // alpha = 1/2, f = t*h: lhs/rhs = e^{-t^2/2} cosh t -> 1 as t -> 0
        let t = build_nadic(2, 1).unwrap();
        let mut best = 0.0f64;
        for k in 1..=40 {
            let tt = 0.01 * k as f64;
            let f = StepFunction::new(t.clone(), vec![-tt, tt]).unwrap();
            let r = verify_exp_bellman(&f);
            assert!(r.pass);
            best = best.max(r.lhs / r.rhs);
        }
        assert!(best > 1.0 - 1e-2 && best <= 1.0 + 1e-12, "best ratio {best}");
    }

    #[test]
    fn moment_dominated_by_bellman() {
        let mut rng = random::rng_from_seed(7);
        let t = random::random_tree(&mut rng, &RandomTreeParams::default()).unwrap();
        let f = random::random_function(&t, &mut rng, FunctionModel::RandomHaarCoefficients { target_sup: 2.0 });
        let alpha = f.tree().homogeneity().effective_alpha;
        let sup = sup_value(&f.square_function());
        let b = verify_exp_bellman(&f);
        let m = verify_exp_moment(&f);
        assert!(m.pass);
        // e^{f-Ef} <= e^{f - Sf^2/4a} * e^{sup^2/4a - Ef} pointwise
        let bound = b.lhs * (sup * sup / (4.0 * alpha) - f.mean()).exp();
        assert!(m.lhs <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn distribution_and_maximal_bounds() {
        let mut rng = random::rng_from_seed(21);
        for _ in 0..10 {
            let t = random::random_tree(&mut rng, &RandomTreeParams::default()).unwrap();
            let f = random::center(&random::random_function(
                &t,
                &mut rng,
                FunctionModel::GaussianLeaves,
            ));
            let sup = sup_value(&f.square_function());
            if sup == 0.0 {
                continue;
            }
            let grid: Vec<f64> = [0.5, 1.0, 2.0, 4.0].iter().map(|c| c * sup).collect();
            for r in verify_superexp_distribution(&f, &grid).unwrap() {
                assert!(r.pass, "{:?}", r);
            }
            for r in verify_superexp_maximal(&f, &grid).unwrap() {
                assert!(r.pass, "{:?}", r);
            }
        }
    }

    #[test]
    fn distribution_beyond_range_is_trivial() {
        let t = build_nadic(2, 2).unwrap();
        let f = StepFunction::new(t, vec![1.0, -1.0, 0.5, -0.5]).unwrap();
        let top = f.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max) - f.mean();
        let rs = verify_superexp_distribution(&f, &[top + 1.0]).unwrap();
        assert_eq!(rs[0].lhs, 0.0);
        assert!(rs[0].pass);
    }

    #[test]
    fn maximal_requires_centering() {
        let t = build_nadic(2, 1).unwrap();
        let f = StepFunction::constant(t, 1.0);
        assert!(verify_superexp_maximal(&f, &[1.0]).is_err());
    }

    #[test]
    fn maximal_on_large_sharpness_exponents() {
        // exponents of order N/alpha overflow naive evaluation; the report
        // must still be produced (log-domain) and pass
        let fam = crate::constructions::build_sharpness(
            crate::constructions::SharpAlpha::Float(0.05),
            400,
        )
        .unwrap();
        let r = verify_exp_moment(&fam.g);
        assert!(r.pass);
        assert_eq!(r.flag.as_deref(), Some("log-domain"));
    }

    #[test]
    fn haar_unweighted_p2_constant() {
        let t = build_nadic(2, 1).unwrap();
        let h = StepFunction::new(t, vec![-1.0, 1.0]).unwrap();
        let r = verify_unweighted_lp(&h, 2.0).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-12);
        assert!((r.rhs - 32.0).abs() < 1e-9);
        assert!(r.pass);
    }

    #[test]
    fn weighted_degenerate_flagged() {
        let t = build_nadic(2, 2).unwrap();
        let f = StepFunction::constant(t.clone(), 3.0);
        let w = StepFunction::constant(t, 1.0);
        let r = verify_weighted_lower_bound(&f, &w, 2.0).unwrap();
        assert!(!r.pass); // f* = 3, Sf = 0: the stated bound genuinely fails
        assert_eq!(r.flag.as_deref(), Some("degenerate: Sf == 0"));
    }

    #[test]
    fn weighted_random_pass() {
        let mut rng = random::rng_from_seed(33);
        for _ in 0..10 {
            let t = random::random_tree(&mut rng, &RandomTreeParams::default()).unwrap();
            let f = random::center(&random::random_function(
                &t,
                &mut rng,
                FunctionModel::GaussianLeaves,
            ));
            let w = random::random_function(&t, &mut rng, FunctionModel::Spike);
            let w = w.map(|v| v + 0.5);
            for p in [0.5, 1.0, 2.0, 4.0] {
                let r = verify_weighted_lower_bound(&f, &w, p).unwrap();
                assert!(r.pass, "p = {p}: {:?}", r);
                let r = verify_unweighted_lp(&f, p).unwrap();
                assert!(r.pass, "p = {p}: {:?}", r);
            }
        }
    }

    #[test]
    fn good_lambda_empty_when_lambda_large() {
        let t = build_nadic(2, 2).unwrap();
        let f = StepFunction::new(t, vec![0.1, -0.1, 0.2, -0.2]).unwrap();
        assert!(verify_good_lambda(&f, 10.0, 0.5).unwrap().is_empty());
    }

    #[test]
    fn good_lambda_random_pass() {
        let mut rng = random::rng_from_seed(55);
        for _ in 0..15 {
            let t = random::random_tree(&mut rng, &RandomTreeParams::default()).unwrap();
            let f = random::center(&random::random_function(
                &t,
                &mut rng,
                FunctionModel::GaussianLeaves,
            ));
            let mut mags: Vec<f64> = f.atom_averages().iter().map(|a| a.abs()).collect();
            mags.sort_by(f64::total_cmp);
            let lambda = mags[mags.len() / 2].max(1e-6);
            for eps in [0.25, 0.5, 0.75] {
                for r in verify_good_lambda(&f, lambda, eps).unwrap() {
                    assert!(r.pass, "{:?}", r);
                }
            }
        }
    }

    #[test]
    fn good_lambda_epsilon_range() {
        let t = build_nadic(2, 1).unwrap();
        let f = StepFunction::new(t, vec![1.0, -1.0]).unwrap();
        assert!(verify_good_lambda(&f, 0.5, 0.0).is_err());
        assert!(verify_good_lambda(&f, 0.5, 1.0).is_err());
    }

    #[test]
    fn w_of_e_single_leaf_constant_weight() {
        let t = build_nadic(2, 3).unwrap();
        let w = StepFunction::constant(t.clone(), 1.0);
        let leaf = t.leaf_node_id(0);
        let r = verify_w_of_e(&w, 0, &[leaf]).unwrap();
        assert!((r.lhs - 0.125).abs() < 1e-15);
        // A = 1, alpha = 1/2: rhs = 2 ln 4 / ln 8 = 4/3
        assert!((r.rhs - 4.0 / 3.0).abs() < 1e-12);
        assert!(r.pass);
    }

    #[test]
    fn w_of_e_rejects_bad_sets() {
        let t = build_nadic(2, 2).unwrap();
        let w = StepFunction::constant(t.clone(), 1.0);
        assert!(verify_w_of_e(&w, 0, &[0]).is_err()); // E = Q0
        assert!(verify_w_of_e(&w, 1, &[t.leaf_node_id(3)]).is_err()); // outside Q0
        let kids: Vec<usize> = t.children(0).collect();
        assert!(verify_w_of_e(&w, 0, &kids).is_err()); // |E| = |Q0|
    }

    #[test]
    fn w_of_e_random_pass() {
        let mut rng = random::rng_from_seed(91);
        use rand::Rng;
        for _ in 0..20 {
            let t = random::random_tree(&mut rng, &RandomTreeParams::default()).unwrap();
            let w = random::random_function(&t, &mut rng, FunctionModel::GaussianLeaves)
                .map(|v| v.abs() + 0.05);
            // E = one random grandchild-or-deeper atom
            let deep: Vec<usize> = (0..t.node_count())
                .filter(|&id| t.node(id).level >= 1 && t.measure(id) < 0.999 * t.measure(0))
                .collect();
            let pick = deep[rng.gen_range(0..deep.len())];
            let r = verify_w_of_e(&w, 0, &[pick]).unwrap();
            assert!(r.pass, "{:?}", r);
        }
    }

    #[test]
    fn cww_on_nonhomogeneous_tree() {
        // a lopsided split the homogeneity-based bounds would not cover well
        let t = build_custom(&[vec![vec![0.001, 0.999]], vec![vec![1.0], vec![0.5, 0.5]]]).unwrap();
        let f = StepFunction::new(t, vec![5.0, -1.0, 1.0]).unwrap();
        let sup = sup_value(&f.square_function_p(f64::INFINITY).unwrap());
        for r in verify_cww_sinf(&f, &[0.5 * sup, sup, 2.0 * sup]).unwrap() {
            assert!(r.pass, "{:?}", r);
        }
    }

    #[test]
    fn wilson_ratio_recorded() {
        let mut rng = random::rng_from_seed(17);
        let t = random::random_tree(&mut rng, &RandomTreeParams::default()).unwrap();
        let f = random::center(&random::random_function(
            &t,
            &mut rng,
            FunctionModel::GaussianLeaves,
        ));
        let w = StepFunction::constant(t, 1.0);
        let r = verify_wilson_ratio(&f, &w, 2.0).unwrap();
        assert_eq!(r.mode, Mode::Ratio);
        assert!(r.pass);
        assert!(r.params["ratio"].is_finite());
    }
}
