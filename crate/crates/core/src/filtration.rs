//! Finite-depth atomic filtrations.
//!
//! A [`FiltrationTree`] stores the atoms of levels `0..=depth` in a flat
//! arena, level by level, left to right. Children of an atom are contiguous
//! in the next level, so an atom only needs the id of its first child and a
//! child count. Leaf ordering (depth-first, left-to-right) defines the
//! embedding of the probability space into `[0,1)` used by the localized
//! Hardy–Littlewood maximal function.

use std::sync::Arc;

use num::bigint::BigInt;
use num::rational::Ratio;
use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = Ratio<BigInt>;

const NO_PARENT: u32 = u32::MAX;

/// Hard cap on the number of leaves a single tree may have.
pub const MAX_LEAVES: u128 = 1 << 26;

/// Relative tolerance for "children measures sum to the parent measure".
pub const MEASURE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
pub struct Node {
    pub level: u32,
    pub parent: u32,
    child_start: u32,
    child_count: u32,
    /// Half-open range of leaf indices covered by this atom.
    pub span: (u32, u32),
    pub measure: f64,
}

#[derive(Debug, Clone)]
pub struct FiltrationTree {
    depth: usize,
    nodes: Vec<Node>,
    /// `level_start[k]` is the id of the first level-`k` node; has `depth + 2`
    /// entries so `level_start[k]..level_start[k+1]` is always valid.
    level_start: Vec<usize>,
    /// Exact atom measures, carried when the construction is rational.
    exact_measures: Option<Vec<Rational>>,
}

/// Homogeneity of a tree: the minimal child-to-parent measure ratio over
/// atoms with at least two children.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityParameter {
    pub alpha: f64,
    /// `min(alpha, 1/2)`; the Bellman-function machinery assumes α ∈ (0,1/2],
    /// so verifiers always use this clamped value.
    pub effective_alpha: f64,
    /// True when no atom has two or more children, in which case `alpha` is
    /// reported as 1 and carries no information.
    pub degenerate: bool,
}

impl FiltrationTree {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Ids of the atoms of level `k`.
    pub fn level(&self, k: usize) -> std::ops::Range<usize> {
        self.level_start[k]..self.level_start[k + 1]
    }

    /// Ids of the leaf atoms (level `depth`), in leaf order.
    pub fn leaf_nodes(&self) -> std::ops::Range<usize> {
        self.level(self.depth)
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_nodes().len()
    }

    /// Leaf index of a leaf node id.
    pub fn leaf_index(&self, id: usize) -> usize {
        id - self.level_start[self.depth]
    }

    /// Node id of leaf number `i`.
    pub fn leaf_node_id(&self, i: usize) -> usize {
        self.level_start[self.depth] + i
    }

    pub fn children(&self, id: usize) -> std::ops::Range<usize> {
        let n = &self.nodes[id];
        n.child_start as usize..(n.child_start + n.child_count) as usize
    }

    pub fn child_count(&self, id: usize) -> usize {
        self.nodes[id].child_count as usize
    }

    pub fn parent(&self, id: usize) -> Option<usize> {
        let p = self.nodes[id].parent;
        (p != NO_PARENT).then_some(p as usize)
    }

    pub fn is_leaf(&self, id: usize) -> bool {
        self.nodes[id].level as usize == self.depth
    }

    pub fn measure(&self, id: usize) -> f64 {
        self.nodes[id].measure
    }

    pub fn span(&self, id: usize) -> (usize, usize) {
        let (a, b) = self.nodes[id].span;
        (a as usize, b as usize)
    }

    pub fn leaf_measures(&self) -> Vec<f64> {
        self.leaf_nodes().map(|id| self.nodes[id].measure).collect()
    }

    pub fn exact_measures(&self) -> Option<&[Rational]> {
        self.exact_measures.as_deref()
    }

    /// Walk from a node up to the root.
    pub fn ancestors(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        let mut cur = Some(id);
        std::iter::from_fn(move || {
            let here = cur?;
            cur = self.parent(here);
            Some(here)
        })
    }

    /// Minimal child-to-parent measure ratio over multi-child atoms.
    ///
    /// Atoms with a single child are excluded: their martingale difference is
    /// identically zero, so they cannot affect any of the inequalities.
    pub fn homogeneity(&self) -> HomogeneityParameter {
        let mut alpha = f64::INFINITY;
        for id in 0..self.nodes.len() {
            if self.child_count(id) < 2 {
                continue;
            }
            let m = self.nodes[id].measure;
            for c in self.children(id) {
                let r = self.nodes[c].measure / m;
                if r < alpha {
                    alpha = r;
                }
            }
        }
        if alpha.is_finite() {
            HomogeneityParameter {
                alpha,
                effective_alpha: alpha.min(0.5),
                degenerate: false,
            }
        } else {
            HomogeneityParameter {
                alpha: 1.0,
                effective_alpha: 0.5,
                degenerate: true,
            }
        }
    }

    /// Validate the structural invariants; used after JSON import.
    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() || self.level(0).len() != 1 {
            return Err(Error::InvalidProfile("level 0 must hold exactly the root".into()));
        }
        if (self.nodes[0].measure - 1.0).abs() > MEASURE_TOL {
            return Err(Error::InvalidProfile("root measure must be 1".into()));
        }
        for id in 0..self.nodes.len() {
            let n = &self.nodes[id];
            if (n.level as usize) < self.depth && n.child_count == 0 {
                return Err(Error::InvalidProfile(format!(
                    "atom {id} at level {} has no children",
                    n.level
                )));
            }
            if n.child_count > 0 {
                let mut sum = 0.0;
                let mut span = (u32::MAX, 0u32);
                for c in self.children(id) {
                    let ch = &self.nodes[c];
                    if ch.measure <= 0.0 {
                        return Err(Error::InvalidProfile(format!("atom {c} has nonpositive measure")));
                    }
                    sum += ch.measure;
                    span.0 = span.0.min(ch.span.0);
                    span.1 = span.1.max(ch.span.1);
                }
                if (sum - n.measure).abs() > MEASURE_TOL * n.measure.max(1.0) {
                    return Err(Error::InvalidProfile(format!(
                        "children of atom {id} sum to {sum}, expected {}",
                        n.measure
                    )));
                }
                if span != n.span {
                    return Err(Error::InvalidProfile(format!("span of atom {id} inconsistent")));
                }
            }
        }
        let leaf_sum: f64 = self.leaf_nodes().map(|id| self.nodes[id].measure).sum();
        if (leaf_sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidProfile(format!("leaf measures sum to {leaf_sum}")));
        }
        Ok(())
    }

    pub fn to_json(&self) -> TreeJson {
        TreeJson {
            depth: self.depth,
            nodes: (0..self.nodes.len())
                .map(|id| NodeJson {
                    level: self.nodes[id].level as usize,
                    measure: self.nodes[id].measure,
                    children: self.children(id).collect(),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &TreeJson) -> Result<Arc<FiltrationTree>> {
        let mut nodes = Vec::with_capacity(j.nodes.len());
        let mut level_start = vec![0usize; j.depth + 2];
        let mut prev_level = 0usize;
        for (id, nj) in j.nodes.iter().enumerate() {
            if nj.level > j.depth {
                return Err(Error::InvalidProfile(format!("node {id} beyond depth")));
            }
            if nj.level < prev_level {
                return Err(Error::InvalidProfile("nodes must be listed level by level".into()));
            }
            while prev_level < nj.level {
                prev_level += 1;
                level_start[prev_level] = id;
            }
            let (child_start, child_count) = match nj.children.as_slice() {
                [] => (0, 0),
                ch => {
                    for w in ch.windows(2) {
                        if w[1] != w[0] + 1 {
                            return Err(Error::InvalidProfile(format!(
                                "children of node {id} must be contiguous ids"
                            )));
                        }
                    }
                    (ch[0] as u32, ch.len() as u32)
                }
            };
            nodes.push(Node {
                level: nj.level as u32,
                parent: NO_PARENT,
                child_start,
                child_count,
                span: (0, 0),
                measure: nj.measure,
            });
        }
        while prev_level <= j.depth {
            prev_level += 1;
            level_start[prev_level] = nodes.len();
        }
        // parents and spans
        for id in 0..nodes.len() {
            let (cs, cc) = (nodes[id].child_start as usize, nodes[id].child_count as usize);
            for c in cs..cs + cc {
                if c >= nodes.len() {
                    return Err(Error::InvalidProfile(format!("child id {c} out of range")));
                }
                nodes[c].parent = id as u32;
            }
        }
        let mut leaf_idx = 0u32;
        let first_leaf = level_start[j.depth];
        for id in first_leaf..level_start[j.depth + 1] {
            nodes[id].span = (leaf_idx, leaf_idx + 1);
            leaf_idx += 1;
        }
        for id in (0..first_leaf).rev() {
            let (cs, cc) = (nodes[id].child_start as usize, nodes[id].child_count as usize);
            if cc > 0 {
                nodes[id].span = (nodes[cs].span.0, nodes[cs + cc - 1].span.1);
            }
        }
        let tree = FiltrationTree {
            depth: j.depth,
            nodes,
            level_start,
            exact_measures: None,
        };
        tree.validate()?;
        Ok(Arc::new(tree))
    }
}

/// JSON schema: `{"depth": N, "nodes": [{"level": k, "measure": m, "children": [ids]}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeJson {
    pub depth: usize,
    pub nodes: Vec<NodeJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeJson {
    pub level: usize,
    pub measure: f64,
    pub children: Vec<usize>,
}

fn rational(n: i64, d: i64) -> Rational {
    Ratio::new(BigInt::from(n), BigInt::from(d))
}

/// `n`-adic tree: every atom has exactly `n` children of equal measure, so
/// the homogeneity parameter is `1/n`. Carries exact measures.
pub fn build_nadic(n: usize, depth: usize) -> Result<Arc<FiltrationTree>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n-adic branching needs n >= 2, got {n}")));
    }
    let leaves = (n as u128).checked_pow(depth as u32).unwrap_or(u128::MAX);
    if leaves > MAX_LEAVES {
        return Err(Error::SizeOverflow(leaves));
    }
    let frac: Vec<Rational> = vec![Ratio::new(BigInt::one(), BigInt::from(n as i64)); n];
    let profile: Vec<Vec<Vec<Rational>>> = (0..depth)
        .map(|k| vec![frac.clone(); n.pow(k as u32)])
        .collect();
    build_custom_exact(&profile)
}

/// General tree from a per-atom branching profile of f64 fractions:
/// `branching[k][i]` lists the child measure fractions of the `i`-th atom of
/// level `k`. Depth is `branching.len()`. Fractions must be positive and sum
/// to 1 within `1e-12`. A single-child atom is given with the list `[1.0]`.
pub fn build_custom(branching: &[Vec<Vec<f64>>]) -> Result<Arc<FiltrationTree>> {
    build_impl(branching, None)
}

/// Same as [`build_custom`] but with exact rational fractions; the resulting
/// tree carries exact measures alongside the f64 ones.
pub fn build_custom_exact(branching: &[Vec<Vec<Rational>>]) -> Result<Arc<FiltrationTree>> {
    let float: Vec<Vec<Vec<f64>>> = branching
        .iter()
        .map(|lvl| {
            lvl.iter()
                .map(|fr| fr.iter().map(ratio_to_f64).collect())
                .collect()
        })
        .collect();
    build_impl(&float, Some(branching))
}

/// Every atom splits with the same fraction list; e.g. `(α, 1−α)` splits.
pub fn build_uniform_split(fractions: &[f64], depth: usize) -> Result<Arc<FiltrationTree>> {
    let b = fractions.len();
    let leaves = (b as u128).checked_pow(depth as u32).unwrap_or(u128::MAX);
    if leaves > MAX_LEAVES {
        return Err(Error::SizeOverflow(leaves));
    }
    let profile: Vec<Vec<Vec<f64>>> = (0..depth)
        .map(|k| vec![fractions.to_vec(); b.pow(k as u32)])
        .collect();
    build_custom(&profile)
}

pub(crate) fn ratio_to_f64(r: &Rational) -> f64 {
    // Ratio::to_f64 handles numerators and denominators beyond f64 range
    use num::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

fn build_impl(
    branching: &[Vec<Vec<f64>>],
    exact: Option<&[Vec<Vec<Rational>>]>,
) -> Result<Arc<FiltrationTree>> {
    let depth = branching.len();
    let mut nodes = vec![Node {
        level: 0,
        parent: NO_PARENT,
        child_start: 0,
        child_count: 0,
        span: (0, 0),
        measure: 1.0,
    }];
    let mut exact_measures = exact.map(|_| vec![Rational::one()]);
    let mut level_start = vec![0usize, 1];
    for (k, lvl) in branching.iter().enumerate() {
        let parents = level_start[k]..level_start[k + 1];
        if lvl.len() != parents.len() {
            return Err(Error::InvalidProfile(format!(
                "level {k}: profile lists {} atoms, tree has {}",
                lvl.len(),
                parents.len()
            )));
        }
        let mut new_leaves = 0u128;
        for fr in lvl {
            if fr.is_empty() {
                return Err(Error::InvalidProfile(format!("level {k}: empty fraction list")));
            }
            new_leaves += fr.len() as u128;
        }
        if new_leaves > MAX_LEAVES {
            return Err(Error::SizeOverflow(new_leaves));
        }
        for (i, p) in parents.clone().enumerate() {
            let fr = &lvl[i];
            let sum: f64 = fr.iter().sum();
            if (sum - 1.0).abs() > MEASURE_TOL {
                return Err(Error::InvalidProfile(format!(
                    "level {k} atom {i}: fractions sum to {sum}"
                )));
            }
            if fr.iter().any(|&x| x <= 0.0) {
                return Err(Error::InvalidProfile(format!(
                    "level {k} atom {i}: nonpositive fraction"
                )));
            }
            if let Some(ex) = exact {
                let esum: Rational = ex[k][i].iter().cloned().sum();
                if !esum.is_one() {
                    return Err(Error::InvalidProfile(format!(
                        "level {k} atom {i}: exact fractions do not sum to 1"
                    )));
                }
            }
            nodes[p].child_start = nodes.len() as u32;
            nodes[p].child_count = fr.len() as u32;
            let pm = nodes[p].measure;
            for (j, &frac) in fr.iter().enumerate() {
                if let (Some(em), Some(ex)) = (exact_measures.as_mut(), exact) {
                    let exact_pm = em[p].clone();
                    em.push(exact_pm * &ex[k][i][j]);
                }
                nodes.push(Node {
                    level: (k + 1) as u32,
                    parent: p as u32,
                    child_start: 0,
                    child_count: 0,
                    span: (0, 0),
                    measure: pm * frac,
                });
            }
        }
        level_start.push(nodes.len());
    }
    // spans bottom-up
    let first_leaf = level_start[depth];
    for (i, id) in (first_leaf..level_start[depth + 1]).enumerate() {
        nodes[id].span = (i as u32, i as u32 + 1);
    }
    for id in (0..first_leaf).rev() {
        let (cs, cc) = (nodes[id].child_start as usize, nodes[id].child_count as usize);
        nodes[id].span = (nodes[cs].span.0, nodes[cs + cc - 1].span.1);
    }
    // use exact measures to refresh the floats when available
    if let Some(em) = &exact_measures {
        for (id, r) in em.iter().enumerate() {
            nodes[id].measure = ratio_to_f64(r);
        }
    }
    let tree = FiltrationTree {
        depth,
        nodes,
        level_start,
        exact_measures,
    };
    tree.validate()?;
    Ok(Arc::new(tree))
}

/// Exact rational helper: `p/q` as a [`Rational`].
pub fn ratio(p: i64, q: i64) -> Rational {
    rational(p, q)
}

/// Exact complement `1 - r`.
pub fn one_minus(r: &Rational) -> Rational {
    Rational::one() - r
}

pub fn rational_zero() -> Rational {
    Rational::zero()
}
