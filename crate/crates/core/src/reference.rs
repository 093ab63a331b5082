//! Brute-force reference implementations.
//!
//! Everything here is deliberately naive — direct enumeration over all atoms
//! or all O(L²) leaf-aligned intervals — and serves as the independent oracle
//! the production kernels are compared against on small trees.

use crate::operators::StepFunction;

/// O(n²)-per-position maximal weighted average over contiguous ranges.
pub fn interval_maximal_brute(values: &[f64], measures: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut ans = vec![f64::NEG_INFINITY; n];
    for x in 0..n {
        for i in 0..=x {
            let mut num = 0.0;
            let mut den = 0.0;
            for k in i..x {
                num += values[k] * measures[k];
                den += measures[k];
            }
            for j in x..n {
                num += values[j] * measures[j];
                den += measures[j];
                ans[x] = ans[x].max(num / den);
            }
        }
    }
    ans
}

/// Square function by direct per-leaf enumeration of all atoms.
pub fn square_function_brute(f: &StepFunction) -> Vec<f64> {
    let t = f.tree();
    let mut out = vec![0.0; t.leaf_count()];
    for q in 0..t.node_count() {
        if t.child_count(q) < 2 {
            continue;
        }
        let aq = f.average(q).unwrap();
        for c in t.children(q) {
            let d = f.average(c).unwrap() - aq;
            let (a, b) = t.span(c);
            for v in &mut out[a..b] {
                *v += d * d;
            }
        }
    }
    out.into_iter().map(f64::sqrt).collect()
}

/// Maximal function by direct per-leaf enumeration of ancestors.
pub fn maximal_function_brute(f: &StepFunction) -> Vec<f64> {
    let t = f.tree();
    let mut out = vec![0.0; t.leaf_count()];
    for (i, leaf) in t.leaf_nodes().enumerate() {
        let mut m: f64 = 0.0;
        for anc in t.ancestors(leaf) {
            m = m.max(f.average(anc).unwrap().abs());
        }
        out[i] = m;
    }
    out
}

/// Martingale A∞ characteristic by brute force over all pairs (Q, R⊆Q).
pub fn ainfty_martingale_brute(w: &StepFunction) -> f64 {
    let t = w.tree();
    let mut sup: f64 = 1.0;
    for q in 0..t.node_count() {
        let mq = t.measure(q);
        let wq = w.average(q).unwrap();
        if mq == 0.0 || wq <= 0.0 {
            continue;
        }
        // (1_Q w)* at leaf = max over atoms R with leaf ∈ R ⊆ Q of <w>_R
        let (a, b) = t.span(q);
        let mut acc = 0.0;
        for i in a..b {
            let leaf = t.leaf_node_id(i);
            let mut best: f64 = 0.0;
            for anc in t.ancestors(leaf) {
                best = best.max(w.average(anc).unwrap());
                if anc == q {
                    break;
                }
            }
            acc += best * t.measure(leaf);
        }
        sup = sup.max(acc / mq / wq);
    }
    sup
}

/// Semiclassical A∞ characteristic with the brute-force interval maximal.
pub fn ainfty_semiclassical_brute(w: &StepFunction) -> f64 {
    let t = w.tree();
    let mut sup: f64 = 1.0;
    for q in 0..t.node_count() {
        let mq = t.measure(q);
        let wq = w.average(q).unwrap();
        if mq == 0.0 || wq <= 0.0 {
            continue;
        }
        let (a, b) = t.span(q);
        let vals: Vec<f64> = w.values()[a..b].iter().map(|v| v.abs()).collect();
        let ms: Vec<f64> = (a..b).map(|i| t.measure(t.leaf_node_id(i))).collect();
        let mqw = interval_maximal_brute(&vals, &ms);
        let acc: f64 = mqw.iter().zip(&ms).map(|(v, m)| v * m).sum();
        sup = sup.max(acc / mq / wq);
    }
    sup
}

/// A₁ characteristic with the brute-force interval maximal over the whole
/// leaf grid.
pub fn a1_brute(w: &StepFunction) -> f64 {
    let t = w.tree();
    let vals: Vec<f64> = w.values().iter().map(|v| v.abs()).collect();
    let ms = t.leaf_measures();
    let mw = interval_maximal_brute(&vals, &ms);
    let mut sup: f64 = 0.0;
    for i in 0..vals.len() {
        if w.values()[i] <= 0.0 {
            return f64::INFINITY;
        }
        sup = sup.max(mw[i] / w.values()[i]);
    }
    sup
}
