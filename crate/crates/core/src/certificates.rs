//! Scalar certificates: grid searches for the two-point lemma and its
//! relatives, the optimal constant C(α), series constants, the extrapolation
//! weight, and the modified good-λ decomposition.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inequalities::{self, InequalityReport};
use crate::operators::{interval_maximal, Kahan, StepFunction};
use crate::random::rng_from_seed;
use crate::weights;

/// Margin threshold under which a grid certificate passes.
pub const CERT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct ScalarCertificate {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub grid: usize,
    pub seed: Option<u64>,
    /// Max over the search space of (lhs − bound); ≤ 0 means the scalar
    /// inequality held everywhere.
    pub worst_margin: f64,
    pub worst_location: Vec<f64>,
    pub pass: bool,
}

fn certificate(
    name: &str,
    params: BTreeMap<String, f64>,
    grid: usize,
    seed: Option<u64>,
    worst_margin: f64,
    worst_location: Vec<f64>,
) -> ScalarCertificate {
    ScalarCertificate {
        name: name.into(),
        params,
        grid,
        seed,
        worst_margin,
        worst_location,
        pass: worst_margin <= CERT_TOL,
    }
}

fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = (b - a) / (n - 1).max(1) as f64;
    (0..n).map(move |i| if i + 1 == n { b } else { a + step * i as f64 })
}

/// U_α(x, y) = e^{x − y²/4α}.
pub fn bellman_u(x: f64, y: f64, alpha: f64) -> Result<f64> {
    if y < 0.0 {
        return Err(Error::InvalidParameter(format!("y must be nonnegative, got {y}")));
    }
    check_alpha(alpha)?;
    Ok((x - y * y / (4.0 * alpha)).exp())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(Error::InvalidParameter(format!("alpha must be in (0, 1/2], got {alpha}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub enum TwoPointStrategy {
    /// The reduction from the proof: p₂ = α, c₁ ∈ [0, 2α], c₂ = −p₁c₁/α.
    Reduced { grid: usize },
    /// Random m-point admissible configurations, m ≤ points_max ≤ 6.
    Random { configs: usize, points_max: usize, seed: u64 },
}

/// Σ p_j e^{c_j − c_j²/4α} ≤ 1 for p_j ≥ α, Σp_j = 1, Σp_jc_j = 0.
pub fn check_two_point_lemma(alpha: f64, strategy: TwoPointStrategy) -> Result<ScalarCertificate> {
    check_alpha(alpha)?;
    let eval = |p: &[f64], c: &[f64]| -> f64 {
        p.iter()
            .zip(c)
            .map(|(&p, &c)| p * (c - c * c / (4.0 * alpha)).exp())
            .sum::<f64>()
            - 1.0
    };
    let mut params = BTreeMap::new();
    params.insert("alpha".into(), alpha);
    match strategy {
        TwoPointStrategy::Reduced { grid } => {
            let p = [1.0 - alpha, alpha];
            let mut worst = f64::NEG_INFINITY;
            let mut at = vec![0.0];
            for c1 in linspace(0.0, 2.0 * alpha, grid.max(2)) {
                let c2 = -p[0] * c1 / alpha;
                let m = eval(&p, &[c1, c2]);
                if m > worst {
                    worst = m;
                    at = vec![c1];
                }
            }
            Ok(certificate("two-point-reduced", params, grid, None, worst, at))
        }
        TwoPointStrategy::Random { configs, points_max, seed } => {
            let cap = ((1.0 / alpha).floor() as usize).min(points_max.min(6)).max(2);
            let mut rng = rng_from_seed(seed);
            let mut worst = f64::NEG_INFINITY;
            let mut at = vec![0.0, 0.0];
            for i in 0..configs {
                let m = rng.gen_range(2..=cap);
                let mut u: Vec<f64> = (0..m).map(|_| -(rng.gen::<f64>().max(1e-12)).ln()).collect();
                let s: f64 = u.iter().sum();
                for x in u.iter_mut() {
                    *x = alpha + (1.0 - m as f64 * alpha) * (*x / s);
                }
                let r: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let bias: f64 = u.iter().zip(&r).map(|(&p, &c)| p * c).sum();
                let c: Vec<f64> = r.iter().map(|&x| x - bias).collect();
                let mg = eval(&u, &c);
                if mg > worst {
                    worst = mg;
                    at = vec![i as f64, m as f64];
                }
            }
            Ok(certificate("two-point-random", params, configs, Some(seed), worst, at))
        }
    }
}

/// max_{a∈[0,1]} (n−1)e^{(1−a²)/n} + e^{(1−(n(1−a)+a)²)/n} ≤ n.
pub fn check_dzili(n: f64, grid_size: usize) -> Result<ScalarCertificate> {
    if !(n >= 2.0) {
        return Err(Error::InvalidParameter(format!("need n >= 2, got {n}")));
    }
    if grid_size < 1000 {
        return Err(Error::InvalidParameter(format!("need grid_size >= 1000, got {grid_size}")));
    }
    let expr = |a: f64| {
        let b = n * (1.0 - a) + a;
        (n - 1.0) * ((1.0 - a * a) / n).exp() + ((1.0 - b * b) / n).exp()
    };
    let mut worst = f64::NEG_INFINITY;
    let mut at = 0.0;
    for a in linspace(0.0, 1.0, grid_size) {
        let m = expr(a) - n;
        if m > worst {
            worst = m;
            at = a;
        }
    }
    let mut params = BTreeMap::new();
    params.insert("n".into(), n);
    params.insert("margin_at_one".into(), expr(1.0) - n);
    Ok(certificate("dzili", params, grid_size, None, worst, vec![at]))
}

/// (1−α)exp(2α − Cα) + α exp(2(α−1) − C(α−1)²/α) − 1.
pub fn check_rm1(c: f64, alpha: f64) -> f64 {
    (1.0 - alpha) * (2.0 * alpha - c * alpha).exp()
        + alpha * (2.0 * (alpha - 1.0) - c * (alpha - 1.0) * (alpha - 1.0) / alpha).exp()
        - 1.0
}

/// Max over admissible two-point configurations of Σp e^{c − c²/4C} − 1,
/// with two-stage grid refinement. Deterministic (ties to the lowest index).
fn two_point_inner_max(alpha: f64, c4: f64, nc: usize) -> (f64, Vec<f64>) {
    const NP: usize = 48;
    const C_MAX: f64 = 3.0;
    let eval = |p_small: f64, c_pos: f64, pos_on_small: bool| -> f64 {
        let (pa, pb) = if pos_on_small {
            (p_small, 1.0 - p_small)
        } else {
            (1.0 - p_small, p_small)
        };
        let ca = c_pos;
        let cb = -pa * ca / pb;
        pa * (ca - ca * ca / (4.0 * c4)).exp() + pb * (cb - cb * cb / (4.0 * c4)).exp() - 1.0
    };
    let scan = |p_lo: f64, p_hi: f64, c_lo: f64, c_hi: f64, np: usize, nc: usize| {
        let mut best = (f64::NEG_INFINITY, vec![0.0; 3]);
        for p_small in linspace(p_lo, p_hi, np) {
            for c in linspace(c_lo, c_hi, nc) {
                for pos_on_small in [false, true] {
                    let m = eval(p_small, c, pos_on_small);
                    if m > best.0 {
                        best = (m, vec![p_small, c, pos_on_small as usize as f64]);
                    }
                }
            }
        }
        best
    };
    let np = if alpha >= 0.5 { 1 } else { NP };
    let coarse = scan(alpha, 0.5, 0.0, C_MAX, np, nc);
    let dp = (0.5 - alpha) / (NP - 1) as f64;
    let dc = C_MAX / (nc - 1) as f64;
    let (p0, c0) = (coarse.1[0], coarse.1[1]);
    let fine = scan(
        (p0 - 2.0 * dp).max(alpha),
        (p0 + 2.0 * dp).min(0.5),
        (c0 - 2.0 * dc).max(0.0),
        (c0 + 2.0 * dc).min(C_MAX),
        if np == 1 { 1 } else { 33 },
        nc,
    );
    if fine.0 > coarse.0 {
        fine
    } else {
        coarse
    }
}

/// Largest C for which the two-point inequality with exponent c − c²/4C
/// still holds, located by bisection; inner grid resolution is `coarse`.
pub fn optimal_c_with_grid(alpha: f64, tol: f64, coarse: usize) -> Result<f64> {
    check_alpha(alpha)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    let holds = |c4: f64| two_point_inner_max(alpha, c4, coarse).0 <= 1e-12;
    if !holds(alpha) {
        let (m, at) = two_point_inner_max(alpha, alpha, coarse);
        return Err(Error::Resolution(format!(
            "two-point inequality failed at C = alpha = {alpha}: margin {m} at {at:?}"
        )));
    }
    let mut lo = alpha;
    let mut hi = 1.0;
    let mut guard = 0;
    while holds(hi) {
        lo = hi;
        hi *= 2.0;
        guard += 1;
        if guard > 8 {
            return Err(Error::Resolution(format!(
                "no violation found up to C = {hi} for alpha = {alpha}"
            )));
        }
    }
    guard = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        guard += 1;
        if guard > 200 {
            return Err(Error::Resolution("bisection failed to converge".into()));
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn optimal_c(alpha: f64, tol: f64) -> Result<f64> {
    optimal_c_with_grid(alpha, tol, 1000)
}

/// C = 1 + Σ_{n≥1} (n/2e)ⁿ/n!, summed until the term drops below eps.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeriesConstant {
    pub value: f64,
    pub terms: usize,
    pub last_term: f64,
    /// Ratio-test bound on the dropped tail (term ratio < 0.6 for n ≥ 2).
    pub tail_bound: f64,
}

pub fn superexp_constant(truncation_eps: f64) -> SeriesConstant {
    let mut sum = Kahan::default();
    sum.add(1.0);
    let mut term;
    let mut ln_factorial = 0.0;
    let mut n = 0usize;
    loop {
        n += 1;
        ln_factorial += (n as f64).ln();
        let nf = n as f64;
        term = (nf * (nf / (2.0 * std::f64::consts::E)).ln() - ln_factorial).exp();
        sum.add(term);
        if term < truncation_eps || n > 2000 {
            break;
        }
    }
    SeriesConstant {
        value: sum.value(),
        terms: n,
        last_term: term,
        tail_bound: term * 1.5,
    }
}

/// γ = (2e)^{−1} κ B^{−1/κ} ‖g‖∞^{−1/κ}.
pub fn gamma_constant(kappa: f64, b: f64, g_sup: f64) -> Result<f64> {
    if !(kappa > 0.0 && b > 0.0 && g_sup > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma_constant needs positive arguments, got ({kappa}, {b}, {g_sup})"
        )));
    }
    Ok(0.5 / std::f64::consts::E * kappa * b.powf(-1.0 / kappa) * g_sup.powf(-1.0 / kappa))
}

/// e^γ + N(N/2e)^N/N! + Σ_{n>N} (n/2e)ⁿ/n!, the constant when the Lᵖ
/// hypothesis only starts at n = N.
fn remark_constant(gamma: f64, n_start: usize) -> f64 {
    let mut sum = Kahan::default();
    sum.add(gamma.exp());
    let mut ln_factorial = 0.0;
    for n in 1.. {
        ln_factorial += (n as f64).ln();
        if n < n_start {
            continue;
        }
        let nf = n as f64;
        let term = (nf * (nf / (2.0 * std::f64::consts::E)).ln() - ln_factorial).exp();
        if n == n_start {
            sum.add(nf * term);
        } else {
            sum.add(term);
            if term < 1e-18 {
                break;
            }
        }
    }
    sum.value()
}

/// Verify ‖f‖_p ≤ B pᵏ g_sup on the grid p = n/κ, then check the resulting
/// integral bound ∫e^{γ|f|^{1/κ}} ≤ C and its Markov consequence on λ_grid.
pub fn verify_lp_to_superexp(
    f: &StepFunction,
    g_sup: f64,
    kappa: f64,
    b: f64,
    lambda_grid: &[f64],
) -> Result<Vec<InequalityReport>> {
    let gamma = gamma_constant(kappa, b, g_sup)?;
    if lambda_grid.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::InvalidParameter("lambda values must be positive".into()));
    }
    let f_sup = f.sup_norm();
    // beyond n_cover the hypothesis follows from ||f||_p <= ||f||_inf
    let mut n_cover = 1usize;
    while b * (n_cover as f64 / kappa).powf(kappa) * g_sup < f_sup && n_cover < 100_000 {
        n_cover += 1;
    }
    let hyp = |n: usize| {
        let p = n as f64 / kappa;
        f.lp_norm(p) <= b * p.powf(kappa) * g_sup * (1.0 + 1e-9)
    };
    let mut n_start = n_cover;
    while n_start > 1 && hyp(n_start - 1) {
        n_start -= 1;
    }
    if n_start == n_cover && !hyp(n_cover) {
        return Err(Error::Precondition(format!(
            "hypothesis ||f||_p <= B p^kappa g fails even at p = {}",
            n_cover as f64 / kappa
        )));
    }
    let constant = if n_start == 1 {
        superexp_constant(1e-15).value
    } else {
        remark_constant(gamma, n_start)
    };

    let measures = f.tree().leaf_measures();
    let exps: Vec<f64> = f
        .values()
        .iter()
        .map(|v| gamma * v.abs().powf(1.0 / kappa))
        .collect();
    let log_lhs = inequalities::log_weighted_exp_sum(&exps, &measures);
    let mut params = BTreeMap::new();
    params.insert("kappa".into(), kappa);
    params.insert("b".into(), b);
    params.insert("gamma".into(), gamma);
    params.insert("n_start".into(), n_start as f64);
    let mut out = vec![inequalities::strict_report(
        "superexp-integrability",
        log_lhs.exp(),
        constant,
        params.clone(),
    )];
    for &lambda in lambda_grid {
        let lhs = f.map(f64::abs).distribution(lambda);
        let rhs = constant * (-gamma * lambda.powf(1.0 / kappa)).exp();
        let mut p = params.clone();
        p.insert("lambda".into(), lambda);
        out.push(inequalities::strict_report("superexp-markov", lhs, rhs, p));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct RubioWeight {
    pub w: StepFunction,
    pub a1: f64,
    /// Pointwise bound on the dropped series tail.
    pub truncation_slack: f64,
}

/// w = φ + Σ_{n=1..K} (C_M p)^{−n} Mⁿφ with the leaf-aligned maximal
/// operator M; checks the contraction and the A₁ bound Mw ≤ C_M·p·w.
pub fn rubio_weight(phi: &StepFunction, p: f64, c_m: f64, k_terms: usize) -> Result<RubioWeight> {
    if phi.values().iter().any(|&v| v < 0.0) || phi.integral() <= 0.0 {
        return Err(Error::Precondition("phi must be nonnegative with positive integral".into()));
    }
    if !(p >= 2.0) {
        return Err(Error::InvalidParameter(format!("need p >= 2, got {p}")));
    }
    if k_terms < 1 {
        return Err(Error::InvalidParameter("need at least one series term".into()));
    }
    if !(c_m * p > 1.1) {
        return Err(Error::Resolution(format!(
            "C_M p = {} too small, series does not contract",
            c_m * p
        )));
    }
    let t = phi.tree().clone();
    let measures = t.leaf_measures();
    let ratio = 1.0 / (c_m * p);
    let mut w: Vec<f64> = phi.values().to_vec();
    let mut cur: Vec<f64> = phi.values().to_vec();
    let mut coef = 1.0;
    let mut prev_term_sup = phi.sup_norm();
    for n in 1..=k_terms {
        cur = interval_maximal(&cur, &measures);
        coef *= ratio;
        let term_sup = coef * cur.iter().cloned().fold(0.0, f64::max);
        if n >= 2 && term_sup > 0.9 * prev_term_sup {
            return Err(Error::Resolution(format!(
                "series term {n} not contracting: {term_sup} vs {prev_term_sup}"
            )));
        }
        prev_term_sup = term_sup;
        for (acc, v) in w.iter_mut().zip(&cur) {
            *acc += coef * v;
        }
    }
    cur = interval_maximal(&cur, &measures);
    let truncation_slack = coef * ratio * cur.iter().cloned().fold(0.0, f64::max);

    let w = StepFunction::new(t, w)?;
    let mw = interval_maximal(w.values(), &measures);
    for (i, &m) in mw.iter().enumerate() {
        let bound = c_m * p * (w.values()[i] + truncation_slack) + 1e-12;
        if m > bound {
            return Err(Error::Resolution(format!(
                "Mw exceeds C_M p w + slack at leaf {i}: {m} > {bound}"
            )));
        }
    }
    let a1 = weights::a1_characteristic(&w)?;
    Ok(RubioWeight {
        w,
        a1,
        truncation_slack,
    })
}

/// Same closed form as the good-λ verifier's right-hand side; evaluated
/// here independently so the two modules can be cross-checked.
pub fn good_lambda_bound(alpha: f64, eps: f64) -> f64 {
    let num = alpha.powi(3) * (1.0 - eps).powi(2);
    let den = (1.0 - 2.0 * alpha + 2.0 * alpha * alpha) * eps * eps;
    2.0 * (-num / den).exp()
}

/// The f₁/f₂/f₃ decomposition from the good-λ proof.
#[derive(Debug, Clone)]
pub struct GoodLambdaModified {
    pub f1: StepFunction,
    pub f2: StepFunction,
    pub f3: StepFunction,
    /// ℛ: maximal atoms strictly inside Q on which Sf₁ ≥ ελ everywhere.
    pub stopping: Vec<usize>,
    /// Closed-form bound on ‖Sf₃‖²∞: (ελ)²(1−2α+2α²)/α².
    pub s3_bound_sq: f64,
}

/// Build f₁ = (f − ⟨f⟩_Q)1_Q, f₂ (differences outside ∪ℛ), and f₃ (f₂ with
/// each Δ_{R̂} averaged over its ℛ-children). Q must be a maximal atom with
/// |⟨f⟩_Q| > λ.
pub fn good_lambda_modified(
    f: &StepFunction,
    lambda: f64,
    eps: f64,
    q: usize,
) -> Result<GoodLambdaModified> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be in (0,1), got {eps}")));
    }
    let t = f.tree().clone();
    if q >= t.node_count() {
        return Err(Error::ForeignAtom(q));
    }
    let avg = f.atom_averages();
    if avg[q].abs() <= lambda {
        return Err(Error::Precondition(format!(
            "atom {q} has |average| {} <= lambda {lambda}",
            avg[q].abs()
        )));
    }
    if t.ancestors(q).skip(1).any(|a| avg[a].abs() > lambda) {
        return Err(Error::Precondition(format!("atom {q} is not maximal at level lambda = {lambda}")));
    }
    let (qa, qb) = t.span(q);
    let f1 = StepFunction::new(
        t.clone(),
        f.values()
            .iter()
            .enumerate()
            .map(|(i, &v)| if i >= qa && i < qb { v - avg[q] } else { 0.0 })
            .collect(),
    )?;
    let s1 = f1.square_function();

    // maximal atoms strictly inside q where Sf1 >= eps*lambda on every leaf
    let threshold = eps * lambda;
    let mut stopping = Vec::new();
    let mut stack: Vec<usize> = t.children(q).collect();
    while let Some(r) = stack.pop() {
        let (a, b) = t.span(r);
        if s1.values()[a..b].iter().all(|&v| v >= threshold) {
            stopping.push(r);
        } else {
            stack.extend(t.children(r));
        }
    }
    stopping.sort_unstable();

    let mut blocked = vec![false; t.node_count()]; // inside some R (R itself included)
    let mut stack: Vec<usize> = stopping.clone();
    while let Some(id) = stack.pop() {
        blocked[id] = true;
        stack.extend(t.children(id));
    }
    let in_stopping = |id: usize| stopping.binary_search(&id).is_ok();

    let qlevel = t.node(q).level;
    let inside_q = |id: usize| {
        let (a, b) = t.span(id);
        t.node(id).level >= qlevel && a >= qa && b <= qb
    };

    let mut v2 = vec![0.0; t.leaf_count()];
    let mut v3 = vec![0.0; t.leaf_count()];
    for k in 0..t.node_count() {
        if t.child_count(k) < 2 || blocked[k] || !inside_q(k) {
            continue;
        }
        let kids: Vec<usize> = t.children(k).collect();
        let has_stopping = kids.iter().any(|&c| in_stopping(c));
        let bar = if has_stopping {
            let mut num = 0.0;
            let mut den = 0.0;
            for &c in &kids {
                if in_stopping(c) {
                    num += (avg[c] - avg[k]) * t.measure(c);
                    den += t.measure(c);
                }
            }
            num / den
        } else {
            0.0
        };
        for &c in &kids {
            let d = avg[c] - avg[k];
            let d3 = if in_stopping(c) { bar } else { d };
            let (a, b) = t.span(c);
            for i in a..b {
                v2[i] += d;
                v3[i] += d3;
            }
        }
    }
    let f2 = StepFunction::new(t.clone(), v2)?;
    let f3 = StepFunction::new(t.clone(), v3)?;
    let alpha = t.homogeneity().effective_alpha;
    let s3_bound_sq =
        threshold * threshold * (1.0 - 2.0 * alpha + 2.0 * alpha * alpha) / (alpha * alpha);
    Ok(GoodLambdaModified {
        f1,
        f2,
        f3,
        stopping,
        s3_bound_sq,
    })
}
