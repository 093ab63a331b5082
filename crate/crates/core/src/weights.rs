//! Weight characteristics: the martingale A∞ constant, the semiclassical A∞
//! constant (built on the localized Hardy–Littlewood maximal function), and
//! the grid A₁ constant, together with weighted measures and norms.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{interval_maximal, Kahan, StepFunction};

/// The three characteristics of one weight on one grid. On the same grid the
/// maximal operators dominate pairwise, so
/// `a_infty_martingale <= a_infty_semiclassical <= a1`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WeightCharacteristics {
    pub a_infty_martingale: f64,
    pub a_infty_semiclassical: f64,
    pub a1: f64,
}

fn check_weight(w: &StepFunction) -> Result<()> {
    if w.values().iter().any(|&v| v < 0.0) {
        return Err(Error::Precondition("weight has negative values".into()));
    }
    if w.integral() <= 0.0 {
        return Err(Error::Precondition("weight has zero integral".into()));
    }
    Ok(())
}

/// Martingale A∞ characteristic: sup over atoms Q of
/// ⟨(1_Q w)*⟩_Q / ⟨w⟩_Q, where * is the martingale maximal function.
///
/// For x ∈ Q the maximal average of 1_Q w over atoms containing x is
/// attained on atoms R with x ∈ R ⊆ Q (ancestors of Q only see the diluted
/// mass w(Q)/|R| ≤ ⟨w⟩_Q), so one upward sweep per leaf covers every Q.
pub fn ainfty_martingale(w: &StepFunction) -> Result<f64> {
    check_weight(w)?;
    let t = w.tree();
    let avg = w.atom_averages();
    let mut numer = vec![Kahan::default(); t.node_count()];
    for leaf in t.leaf_nodes() {
        let m = t.measure(leaf);
        let mut runmax = f64::NEG_INFINITY;
        for anc in t.ancestors(leaf) {
            runmax = runmax.max(avg[anc]);
            numer[anc].add(m * runmax);
        }
    }
    let mut sup: f64 = 1.0;
    for q in 0..t.node_count() {
        let mq = t.measure(q);
        if mq == 0.0 || avg[q] <= 0.0 {
            continue; // 0/0 atoms contribute nothing to the sup
        }
        sup = sup.max(numer[q].value() / mq / avg[q]);
    }
    Ok(sup)
}

/// Semiclassical A∞ characteristic: sup over atoms Q of ⟨M_Q w⟩_Q / ⟨w⟩_Q
/// with the leaf-aligned localized Hardy–Littlewood maximal function M_Q.
pub fn ainfty_semiclassical(w: &StepFunction) -> Result<f64> {
    check_weight(w)?;
    let t = w.tree();
    let avg = w.atom_averages();
    let measures = t.leaf_measures();
    let ratios: Vec<f64> = (0..t.node_count())
        .into_par_iter()
        .map(|q| {
            let mq = t.measure(q);
            if mq == 0.0 || avg[q] <= 0.0 {
                return 1.0;
            }
            let (a, b) = t.span(q);
            let vals: Vec<f64> = w.values()[a..b].iter().map(|v| v.abs()).collect();
            let mqw = interval_maximal(&vals, &measures[a..b]);
            let mut acc = Kahan::default();
            for (v, m) in mqw.iter().zip(&measures[a..b]) {
                acc.add(v * m);
            }
            acc.value() / mq / avg[q]
        })
        .collect();
    Ok(ratios.into_iter().fold(1.0f64, f64::max))
}

/// Grid A₁ characteristic: max over leaves of M w / w with the global
/// leaf-aligned maximal function. A zero-valued leaf yields an infinite
/// characteristic (not an error).
pub fn a1_characteristic(w: &StepFunction) -> Result<f64> {
    check_weight(w)?;
    let t = w.tree();
    let vals: Vec<f64> = w.values().iter().map(|v| v.abs()).collect();
    let mw = interval_maximal(&vals, &t.leaf_measures());
    let mut sup: f64 = 0.0;
    for i in 0..vals.len() {
        if w.values()[i] <= 0.0 {
            return Ok(f64::INFINITY);
        }
        sup = sup.max(mw[i] / w.values()[i]);
    }
    Ok(sup)
}

pub fn characteristics(w: &StepFunction) -> Result<WeightCharacteristics> {
    Ok(WeightCharacteristics {
        a_infty_martingale: ainfty_martingale(w)?,
        a_infty_semiclassical: ainfty_semiclassical(w)?,
        a1: a1_characteristic(w)?,
    })
}

/// w(E) = ∫_E w for a set E given as leaf indices.
pub fn weighted_measure(w: &StepFunction, leaves: &[usize]) -> f64 {
    let t = w.tree();
    let mut k = Kahan::default();
    for &i in leaves {
        k.add(w.values()[i] * t.measure(t.leaf_node_id(i)));
    }
    k.value()
}

/// ‖f‖_{L^p(w)} = (∫ |f|^p w)^{1/p}, p > 0.
pub fn weighted_lp_norm(f: &StepFunction, w: &StepFunction, p: f64) -> Result<f64> {
    if p <= 0.0 {
        return Err(Error::InvalidParameter(format!("p must be positive, got {p}")));
    }
    if !std::sync::Arc::ptr_eq(f.tree(), w.tree()) && f.values().len() != w.values().len() {
        return Err(Error::Mismatch("f and w live on different grids".into()));
    }
    Ok(weighted_lp_norm_values(
        f.values(),
        &f.tree().leaf_measures(),
        w.values(),
        p,
    ))
}

pub(crate) fn weighted_lp_norm_values(values: &[f64], measures: &[f64], weight: &[f64], p: f64) -> f64 {
    let mut k = Kahan::default();
    for i in 0..values.len() {
        k.add(values[i].abs().powf(p) * weight[i] * measures[i]);
    }
    k.value().powf(1.0 / p)
}
