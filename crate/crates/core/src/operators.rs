//! Conditional expectations, martingale differences, square functions,
//! maximal functions, distributions and stopped martingales for step
//! functions on a [`FiltrationTree`].
//!
//! All operations are pure functions of immutable inputs. Per-leaf sums of
//! squared differences use compensated (Kahan) summation so results do not
//! depend on evaluation order beyond 1e-12.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtration::{FiltrationTree, TreeJson};

/// A function constant on the leaves of a [`FiltrationTree`].
#[derive(Debug, Clone)]
pub struct StepFunction {
    tree: Arc<FiltrationTree>,
    values: Vec<f64>,
}

/// Per-atom martingale differences `Δ_Q f` for atoms with two or more
/// children, as the vector of constants on each child.
#[derive(Debug, Clone)]
pub struct MartingaleDecomposition {
    tree: Arc<FiltrationTree>,
    mean: f64,
    pub atoms: Vec<AtomDifference>,
}

#[derive(Debug, Clone)]
pub struct AtomDifference {
    /// Node id of `Q`.
    pub atom: usize,
    /// `Δ_Q f` restricted to each child, in child order.
    pub child_values: Vec<f64>,
}

/// Kahan accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

pub fn kahan_sum(it: impl IntoIterator<Item = f64>) -> f64 {
    let mut k = Kahan::default();
    for x in it {
        k.add(x);
    }
    k.value()
}

impl StepFunction {
    pub fn new(tree: Arc<FiltrationTree>, values: Vec<f64>) -> Result<Self> {
        if values.len() != tree.leaf_count() {
            return Err(Error::Mismatch(format!(
                "{} values for {} leaves",
                values.len(),
                tree.leaf_count()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite leaf value".into()));
        }
        Ok(StepFunction { tree, values })
    }

    pub fn constant(tree: Arc<FiltrationTree>, c: f64) -> Self {
        let n = tree.leaf_count();
        StepFunction {
            tree,
            values: vec![c; n],
        }
    }

    pub fn tree(&self) -> &Arc<FiltrationTree> {
        &self.tree
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> StepFunction {
        StepFunction {
            tree: self.tree.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// ∫ f dσ.
    pub fn integral(&self) -> f64 {
        let mut k = Kahan::default();
        for (i, id) in self.tree.leaf_nodes().enumerate() {
            k.add(self.values[i] * self.tree.measure(id));
        }
        k.value()
    }

    /// 𝔼 f = ⟨f⟩_𝒳 (the measure is a probability measure).
    pub fn mean(&self) -> f64 {
        self.integral()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// (∫ |f|^p dσ)^{1/p}, p > 0.
    pub fn lp_norm(&self, p: f64) -> f64 {
        crate::weights::weighted_lp_norm_values(
            &self.values,
            &self.tree.leaf_measures(),
            &vec![1.0; self.values.len()],
            p,
        )
    }

    /// Per-node averages ⟨f⟩_Q, indexed by node id, computed bottom-up.
    pub fn atom_averages(&self) -> Vec<f64> {
        let t = &self.tree;
        let mut avg = vec![0.0; t.node_count()];
        for (i, id) in t.leaf_nodes().enumerate() {
            avg[id] = self.values[i];
        }
        for k in (0..t.depth()).rev() {
            for id in t.level(k) {
                let m = t.measure(id);
                if m == 0.0 {
                    avg[id] = 0.0;
                    continue;
                }
                let mut k2 = Kahan::default();
                for c in t.children(id) {
                    k2.add(avg[c] * t.measure(c));
                }
                avg[id] = k2.value() / m;
            }
        }
        avg
    }

    /// ⟨f⟩_A for a node id; 0 on zero-measure atoms.
    pub fn average(&self, atom: usize) -> Result<f64> {
        if atom >= self.tree.node_count() {
            return Err(Error::ForeignAtom(atom));
        }
        let m = self.tree.measure(atom);
        if m == 0.0 {
            return Ok(0.0);
        }
        let (a, b) = self.tree.span(atom);
        let mut k = Kahan::default();
        for i in a..b {
            k.add(self.values[i] * self.tree.measure(self.tree.leaf_node_id(i)));
        }
        Ok(k.value() / m)
    }

    /// E_n f: constant ⟨f⟩_Q on every level-n atom Q.
    pub fn expectation(&self, n: usize) -> Result<StepFunction> {
        let t = &self.tree;
        if n > t.depth() {
            return Err(Error::LevelOutOfRange {
                level: n,
                depth: t.depth(),
            });
        }
        let avg = self.atom_averages();
        let mut out = vec![0.0; self.values.len()];
        for id in t.level(n) {
            let (a, b) = t.span(id);
            for v in &mut out[a..b] {
                *v = avg[id];
            }
        }
        Ok(StepFunction {
            tree: t.clone(),
            values: out,
        })
    }

    /// Martingale decomposition Δ_Q f for every atom with ≥ 2 children.
    pub fn decompose(&self) -> MartingaleDecomposition {
        let t = &self.tree;
        let avg = self.atom_averages();
        let mut atoms = Vec::new();
        for id in 0..t.node_count() {
            if t.child_count(id) < 2 {
                continue;
            }
            let child_values = t.children(id).map(|c| avg[c] - avg[id]).collect();
            atoms.push(AtomDifference {
                atom: id,
                child_values,
            });
        }
        MartingaleDecomposition {
            tree: t.clone(),
            mean: avg[0],
            atoms,
        }
    }

    /// The classical square function S f = (Σ_Q |Δ_Q f|²)^{1/2}.
    pub fn square_function(&self) -> StepFunction {
        self.square_sq().map(f64::sqrt)
    }

    /// S f squared, before the square root; compensated per leaf.
    pub fn square_sq(&self) -> StepFunction {
        let t = &self.tree;
        let avg = self.atom_averages();
        let mut acc = vec![Kahan::default(); t.leaf_count()];
        for id in 0..t.node_count() {
            if t.child_count(id) < 2 {
                continue;
            }
            for c in t.children(id) {
                let d = avg[c] - avg[id];
                let (a, b) = t.span(c);
                for k in &mut acc[a..b] {
                    k.add(d * d);
                }
            }
        }
        StepFunction {
            tree: t.clone(),
            values: acc.iter().map(Kahan::value).collect(),
        }
    }

    /// S_p f = (Σ_Q ⟨|Δ_Q f|^p⟩_Q^{2/p} 1_Q)^{1/2}; `p = f64::INFINITY`
    /// uses ‖Δ_Q f‖_∞ = max over children of |Δ_Q f| (exact on step
    /// functions). Requires p ≥ 1.
    pub fn square_function_p(&self, p: f64) -> Result<StepFunction> {
        if !(p >= 1.0) {
            return Err(Error::InvalidParameter(format!("S_p needs p >= 1, got {p}")));
        }
        let t = &self.tree;
        let avg = self.atom_averages();
        let mut acc = vec![Kahan::default(); t.leaf_count()];
        for id in 0..t.node_count() {
            if t.child_count(id) < 2 {
                continue;
            }
            let m = t.measure(id);
            let term = if p.is_infinite() {
                let mx = t
                    .children(id)
                    .map(|c| (avg[c] - avg[id]).abs())
                    .fold(0.0f64, f64::max);
                mx * mx
            } else {
                let mut s = Kahan::default();
                for c in t.children(id) {
                    let d = (avg[c] - avg[id]).abs();
                    s.add(d.powf(p) * t.measure(c));
                }
                (s.value() / m).powf(2.0 / p)
            };
            let (a, b) = t.span(id);
            for k in &mut acc[a..b] {
                k.add(term);
            }
        }
        Ok(StepFunction {
            tree: t.clone(),
            values: acc.iter().map(|k| k.value().sqrt()).collect(),
        })
    }

    /// The martingale maximal function f*(x) = sup_n |E_n f(x)|.
    pub fn maximal_function(&self) -> StepFunction {
        let t = &self.tree;
        let avg = self.atom_averages();
        let mut run = vec![0.0; t.node_count()];
        run[0] = avg[0].abs();
        for id in 1..t.node_count() {
            let p = t.parent(id).expect("non-root has parent");
            run[id] = run[p].max(avg[id].abs());
        }
        let values = t.leaf_nodes().map(|id| run[id]).collect();
        StepFunction {
            tree: t.clone(),
            values,
        }
    }

    /// |{x : f(x) > λ}| (strict inequality).
    pub fn distribution(&self, lambda: f64) -> f64 {
        let mut k = Kahan::default();
        for (i, id) in self.tree.leaf_nodes().enumerate() {
            if self.values[i] > lambda {
                k.add(self.tree.measure(id));
            }
        }
        k.value()
    }

    /// Stopped martingale at level λ > 0: replaces f by ⟨f⟩_R on the maximal
    /// atoms R with |⟨f⟩_R| > λ. Returns the stopped function and the node
    /// ids of the stopping atoms.
    pub fn stopped_function(&self, lambda: f64) -> Result<(StepFunction, Vec<usize>)> {
        if lambda <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "stopping level must be positive, got {lambda}"
            )));
        }
        let t = &self.tree;
        let avg = self.atom_averages();
        let mut out = self.values.clone();
        let mut stopping = Vec::new();
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            if avg[id].abs() > lambda {
                stopping.push(id);
                let (a, b) = t.span(id);
                for v in &mut out[a..b] {
                    *v = avg[id];
                }
            } else if !t.is_leaf(id) {
                stack.extend(t.children(id));
            }
        }
        stopping.sort_unstable();
        Ok((
            StepFunction {
                tree: t.clone(),
                values: out,
            },
            stopping,
        ))
    }

    /// Localized Hardy–Littlewood maximal function M_Q f, with intervals
    /// restricted to leaf-aligned contiguous ranges inside Q (on step
    /// functions the supremum over real intervals is attained on these).
    /// Returns a step function equal to M_Q f on Q and 0 outside.
    pub fn localized_hl_maximal(&self, q: usize) -> Result<StepFunction> {
        if q >= self.tree.node_count() {
            return Err(Error::ForeignAtom(q));
        }
        let (a, b) = self.tree.span(q);
        let abs_vals: Vec<f64> = self.values[a..b].iter().map(|v| v.abs()).collect();
        let measures: Vec<f64> = (a..b)
            .map(|i| self.tree.measure(self.tree.leaf_node_id(i)))
            .collect();
        let local = interval_maximal(&abs_vals, &measures);
        let mut out = vec![0.0; self.values.len()];
        out[a..b].copy_from_slice(&local);
        Ok(StepFunction {
            tree: self.tree.clone(),
            values: out,
        })
    }

    /// M f over the whole space (root-localized maximal function).
    pub fn hl_maximal(&self) -> StepFunction {
        self.localized_hl_maximal(0).expect("root exists")
    }

    pub fn to_json(&self) -> StepFunctionJson {
        StepFunctionJson {
            tree: serde_json::to_value(self.tree.to_json()).expect("tree serializes"),
            values: self.values.clone(),
        }
    }

    /// Parse from JSON with an inline tree. A string `tree` field is a file
    /// reference and must be resolved by the caller (see the CLI).
    pub fn from_json(j: &StepFunctionJson) -> Result<StepFunction> {
        let tj: TreeJson = serde_json::from_value(j.tree.clone())?;
        let tree = FiltrationTree::from_json(&tj)?;
        StepFunction::new(tree, j.values.clone())
    }
}

impl MartingaleDecomposition {
    pub fn tree(&self) -> &Arc<FiltrationTree> {
        &self.tree
    }

    /// ⟨f⟩_𝒳 of the decomposed function.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// ⟨f⟩_𝒳 + Σ_Q Δ_Q f, which must reproduce f.
    pub fn reconstruct(&self) -> StepFunction {
        let t = &self.tree;
        let mut acc = vec![Kahan::default(); t.leaf_count()];
        for k in &mut acc {
            k.add(self.mean);
        }
        for d in &self.atoms {
            for (j, c) in t.children(d.atom).enumerate() {
                let (a, b) = t.span(c);
                for k in &mut acc[a..b] {
                    k.add(d.child_values[j]);
                }
            }
        }
        StepFunction {
            tree: t.clone(),
            values: acc.iter().map(Kahan::value).collect(),
        }
    }
}

/// StepFunction JSON schema: `{"tree": <tree json or path string>, "values": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepFunctionJson {
    pub tree: serde_json::Value,
    pub values: Vec<f64>,
}

/// For every position x, the maximum over contiguous ranges `[i..=j] ∋ x` of
/// the weighted average `Σ v·m / Σ m`. Divide and conquer with convex hulls
/// on the prefix-sum points; O(n log² n) versus the O(n²)-per-point brute
/// force in [`crate::reference`].
pub fn interval_maximal(values: &[f64], measures: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let mut pm = Vec::with_capacity(n + 1);
    let mut ps = Vec::with_capacity(n + 1);
    pm.push(0.0);
    ps.push(0.0);
    let mut km = Kahan::default();
    let mut ks = Kahan::default();
    for i in 0..n {
        km.add(measures[i]);
        ks.add(values[i] * measures[i]);
        pm.push(km.value());
        ps.push(ks.value());
    }
    let mut ans = vec![f64::NEG_INFINITY; n];
    solve(&pm, &ps, values, 0, n, &mut ans);
    ans
}

fn slope(p: (f64, f64), q: (f64, f64)) -> f64 {
    (q.1 - p.1) / (q.0 - p.0)
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Max slope from an external point `p` (strictly left of the hull) to the
/// vertices of a convex hull, by ternary search; the slope sequence along a
/// hull is unimodal.
fn max_slope_to_hull(p: (f64, f64), hull: &[(f64, f64)]) -> f64 {
    let (mut lo, mut hi) = (0usize, hull.len() - 1);
    while hi - lo > 2 {
        let m1 = lo + (hi - lo) / 3;
        let m2 = hi - (hi - lo) / 3;
        if slope(p, hull[m1]) < slope(p, hull[m2]) {
            lo = m1 + 1;
        } else {
            hi = m2;
        }
    }
    (lo..=hi).map(|i| slope(p, hull[i])).fold(f64::NEG_INFINITY, f64::max)
}

fn solve(pm: &[f64], ps: &[f64], values: &[f64], lo: usize, hi: usize, ans: &mut [f64]) {
    if hi - lo == 1 {
        ans[lo] = ans[lo].max(values[lo]);
        return;
    }
    let mid = (lo + hi) / 2;
    solve(pm, ps, values, lo, mid, ans);
    solve(pm, ps, values, mid, hi, ans);

    // crossing intervals [i..=j], i < mid <= j
    // left half: for x in [lo, mid), left end i in [lo, x], right prefix k in [mid+1, hi]
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(hi - mid);
    for k in mid + 1..=hi {
        let pt = (pm[k], ps[k]);
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], pt) >= 0.0 {
            hull.pop();
        }
        hull.push(pt);
    }
    let mut run = f64::NEG_INFINITY;
    for x in lo..mid {
        run = run.max(max_slope_to_hull((pm[x], ps[x]), &hull));
        ans[x] = ans[x].max(run);
    }

    // right half: for x in [mid, hi), right prefix k = j+1 in [x+1, hi],
    // left end i in [lo, mid-1] -> left prefix in [lo, mid-1]
    let mut lower: Vec<(f64, f64)> = Vec::with_capacity(mid - lo);
    for k in lo..mid {
        let pt = (pm[k], ps[k]);
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], pt) <= 0.0 {
            lower.pop();
        }
        lower.push(pt);
    }
    // max slope from right point q to a lower-left hull: reflect by swapping roles
    let mut run = f64::NEG_INFINITY;
    for x in (mid..hi).rev() {
        let q = (pm[x + 1], ps[x + 1]);
        run = run.max(max_slope_from_right(q, &lower));
        ans[x] = ans[x].max(run);
    }
}

/// Max over hull points `a` of slope(a, q) where q lies strictly to the
/// right; the lower hull makes the sequence unimodal.
fn max_slope_from_right(q: (f64, f64), hull: &[(f64, f64)]) -> f64 {
    let (mut lo, mut hi) = (0usize, hull.len() - 1);
    while hi - lo > 2 {
        let m1 = lo + (hi - lo) / 3;
        let m2 = hi - (hi - lo) / 3;
        if slope(hull[m1], q) < slope(hull[m2], q) {
            lo = m1 + 1;
        } else {
            hi = m2;
        }
    }
    (lo..=hi).map(|i| slope(hull[i], q)).fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::{build_nadic, build_uniform_split};

    fn haar() -> StepFunction {
        let t = build_nadic(2, 1).unwrap();
        StepFunction::new(t, vec![-1.0, 1.0]).unwrap()
    }

    #[test]
    fn averages() {
        let t = build_nadic(2, 1).unwrap();
        let f = StepFunction::new(t, vec![0.0, 2.0]).unwrap();
        assert_eq!(f.average(0).unwrap(), 1.0);
        let c = StepFunction::constant(build_nadic(3, 2).unwrap(), 2.5);
        for id in 0..c.tree().node_count() {
            assert!((c.average(id).unwrap() - 2.5).abs() < 1e-15);
        }
    }

    #[test]
    fn expectation_levels() {
        let t = build_nadic(2, 2).unwrap();
        let f = StepFunction::new(t, vec![4.0, 0.0, 0.0, 0.0]).unwrap();
        let e0 = f.expectation(0).unwrap();
        assert!(e0.values().iter().all(|&v| (v - 1.0).abs() < 1e-15));
        let e1 = f.expectation(1).unwrap();
        assert_eq!(e1.values(), &[2.0, 2.0, 0.0, 0.0]);
        let e2 = f.expectation(2).unwrap();
        assert_eq!(e2.values(), f.values());
        assert!(f.expectation(3).is_err());
    }

    #[test]
    fn decompose_constant_is_zero() {
        let c = StepFunction::constant(build_nadic(2, 3).unwrap(), 7.0);
        let d = c.decompose();
        for a in &d.atoms {
            assert!(a.child_values.iter().all(|v| v.abs() < 1e-14));
        }
    }

    #[test]
    fn decompose_haar() {
        let d = haar().decompose();
        assert_eq!(d.atoms.len(), 1);
        assert_eq!(d.atoms[0].atom, 0);
        assert_eq!(d.atoms[0].child_values, vec![-1.0, 1.0]);
    }

    #[test]
    fn square_function_haar() {
        let s = haar().square_function();
        assert!(s.values().iter().all(|&v| (v - 1.0).abs() < 1e-15));
        let c = StepFunction::constant(build_nadic(3, 2).unwrap(), 3.0);
        assert!(c.square_function().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sp_equal_on_balanced_binary() {
        // equal-measure two-child atoms: Δ_Q takes values ±a, so S_p = S = S_∞
        let t = build_nadic(2, 4).unwrap();
        let vals: Vec<f64> = (0..16).map(|i| ((i * 37 % 11) as f64) - 5.0).collect();
        let f = StepFunction::new(t, vals).unwrap();
        let s = f.square_function();
        for p in [1.0, 2.0, 4.0, f64::INFINITY] {
            let sp = f.square_function_p(p).unwrap();
            for (a, b) in s.values().iter().zip(sp.values()) {
                assert!((a - b).abs() < 1e-12, "p={p}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn sp_rejects_small_p() {
        assert!(haar().square_function_p(0.5).is_err());
    }

    #[test]
    fn maximal_haar() {
        let m = haar().maximal_function();
        assert!(m.values().iter().all(|&v| (v - 1.0).abs() < 1e-15));
        let c = StepFunction::constant(build_nadic(2, 2).unwrap(), -3.0);
        assert!(c.maximal_function().values().iter().all(|&v| v == 3.0));
    }

    #[test]
    fn distribution_edges() {
        let z = StepFunction::constant(build_nadic(2, 2).unwrap(), 0.0);
        assert_eq!(z.distribution(1.0), 0.0);
        assert_eq!(z.distribution(-1.0), 1.0);
    }

    #[test]
    fn stopped_trivial_and_root() {
        let f = haar();
        let (g, r) = f.stopped_function(2.0).unwrap();
        assert!(r.is_empty());
        assert_eq!(g.values(), f.values());

        let t = build_nadic(2, 1).unwrap();
        let f = StepFunction::new(t, vec![3.0, 5.0]).unwrap();
        let (g, r) = f.stopped_function(1.0).unwrap();
        assert_eq!(r, vec![0]);
        assert!(g.values().iter().all(|&v| (v - 4.0).abs() < 1e-15));
        assert!(f.stopped_function(0.0).is_err());
    }

    #[test]
    fn stopped_identities_random() {
        let t = build_uniform_split(&[0.3, 0.3, 0.4], 4).unwrap();
        let vals: Vec<f64> = (0..t.leaf_count())
            .map(|i| ((i as f64 * 0.7183).sin() * 4.0) - 0.5)
            .collect();
        let f = StepFunction::new(t.clone(), vals).unwrap();
        for lambda in [0.25, 0.7, 1.3, 2.9] {
            let (g, stops) = f.stopped_function(lambda).unwrap();
            let fstar = f.maximal_function();
            // {f* > λ} = {|g| > λ} = union of stopping atoms, leafwise
            let mut in_stop = vec![false; t.leaf_count()];
            for &r in &stops {
                let (a, b) = t.span(r);
                for s in &mut in_stop[a..b] {
                    *s = true;
                }
            }
            for i in 0..t.leaf_count() {
                assert_eq!(fstar.values()[i] > lambda, in_stop[i], "λ={lambda} leaf {i}");
                assert_eq!(g.values()[i].abs() > lambda, in_stop[i]);
            }
            // S g <= S f pointwise
            let sg = g.square_function();
            let sf = f.square_function();
            for (a, b) in sg.values().iter().zip(sf.values()) {
                assert!(*a <= b + 1e-12);
            }
        }
    }

    #[test]
    fn interval_maximal_matches_brute() {
        let cases: Vec<(Vec<f64>, Vec<f64>)> = vec![
            (vec![1.0], vec![1.0]),
            (vec![0.0, 1.0, 0.0], vec![0.25, 0.5, 0.25]),
            (
                (0..40).map(|i| ((i * 13 % 7) as f64) * 0.3).collect(),
                (0..40).map(|i| 0.01 + ((i * 5 % 11) as f64) * 0.05).collect(),
            ),
        ];
        for (vals, ms) in cases {
            let fast = interval_maximal(&vals, &ms);
            let brute = crate::reference::interval_maximal_brute(&vals, &ms);
            for (a, b) in fast.iter().zip(&brute) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn localized_hl_bounds() {
        let t = build_nadic(2, 3).unwrap();
        let c = StepFunction::constant(t.clone(), -2.0);
        let m = c.localized_hl_maximal(0).unwrap();
        assert!(m.values().iter().all(|&v| (v - 2.0).abs() < 1e-14));

        // M_Q f >= (1_Q f)* on Q for nonnegative f: atoms are contiguous ranges
        let vals: Vec<f64> = (0..8).map(|i| (i as f64 * 1.3).cos().abs()).collect();
        let f = StepFunction::new(t.clone(), vals).unwrap();
        let m = f.hl_maximal();
        let fstar = f.maximal_function();
        for i in 0..8 {
            assert!(m.values()[i] >= fstar.values()[i] - 1e-12);
        }
    }
}
