//! Rational-arithmetic mirror of the basic operators, for trees built with
//! exact measures. Used where the constructions have closed-form values and
//! the acceptance checks demand exact equality rather than a tolerance.

use std::sync::Arc;

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::filtration::{FiltrationTree, Rational};
use crate::operators::StepFunction;

#[derive(Debug, Clone)]
pub struct ExactStepFunction {
    tree: Arc<FiltrationTree>,
    values: Vec<Rational>,
}

impl ExactStepFunction {
    pub fn new(tree: Arc<FiltrationTree>, values: Vec<Rational>) -> Result<Self> {
        if tree.exact_measures().is_none() {
            return Err(Error::Precondition(
                "tree does not carry exact measures".into(),
            ));
        }
        if values.len() != tree.leaf_count() {
            return Err(Error::Mismatch(format!(
                "{} values for {} leaves",
                values.len(),
                tree.leaf_count()
            )));
        }
        Ok(ExactStepFunction { tree, values })
    }

    pub fn tree(&self) -> &Arc<FiltrationTree> {
        &self.tree
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    fn measures(&self) -> &[Rational] {
        self.tree.exact_measures().expect("checked at construction")
    }

    pub fn integral(&self) -> Rational {
        let em = self.measures();
        let mut sum = Rational::zero();
        for (i, id) in self.tree.leaf_nodes().enumerate() {
            sum += &self.values[i] * &em[id];
        }
        sum
    }

    /// Per-node exact averages ⟨f⟩_Q.
    pub fn atom_averages(&self) -> Vec<Rational> {
        let t = &self.tree;
        let em = self.measures();
        let mut avg = vec![Rational::zero(); t.node_count()];
        for (i, id) in t.leaf_nodes().enumerate() {
            avg[id] = self.values[i].clone();
        }
        for k in (0..t.depth()).rev() {
            for id in t.level(k) {
                let mut s = Rational::zero();
                for c in t.children(id) {
                    s += &avg[c] * &em[c];
                }
                avg[id] = s / &em[id];
            }
        }
        avg
    }

    /// Exact S f squared per leaf.
    pub fn square_sq(&self) -> Vec<Rational> {
        let t = &self.tree;
        let avg = self.atom_averages();
        let mut acc = vec![Rational::zero(); t.leaf_count()];
        for id in 0..t.node_count() {
            if t.child_count(id) < 2 {
                continue;
            }
            for c in t.children(id) {
                let d = &avg[c] - &avg[id];
                let dd = &d * &d;
                let (a, b) = t.span(c);
                for v in &mut acc[a..b] {
                    *v += &dd;
                }
            }
        }
        acc
    }

    /// Exact |{x : f(x) > λ}|.
    pub fn distribution(&self, lambda: &Rational) -> Rational {
        let em = self.measures();
        let mut sum = Rational::zero();
        for (i, id) in self.tree.leaf_nodes().enumerate() {
            if &self.values[i] > lambda {
                sum += &em[id];
            }
        }
        sum
    }

    pub fn to_f64(&self) -> StepFunction {
        let values = self
            .values
            .iter()
            .map(crate::filtration::ratio_to_f64)
            .collect();
        StepFunction::new(self.tree.clone(), values).expect("same leaf count")
    }
}

/// (1-α)^n etc. — exact integer power.
pub fn pow(base: &Rational, n: usize) -> Rational {
    let mut out = Rational::one();
    for _ in 0..n {
        out *= base;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::{build_nadic, ratio};

    #[test]
    fn exact_haar() {
        let t = build_nadic(2, 1).unwrap();
        let f = ExactStepFunction::new(t, vec![ratio(-1, 1), ratio(1, 1)]).unwrap();
        assert!(f.integral().is_zero());
        let s2 = f.square_sq();
        assert_eq!(s2, vec![ratio(1, 1), ratio(1, 1)]);
        assert_eq!(f.distribution(&ratio(0, 1)), ratio(1, 2));
    }

    #[test]
    fn matches_float_path() {
        let t = build_nadic(3, 2).unwrap();
        let vals: Vec<Rational> = (0..9).map(|i| ratio(i as i64 * 2 - 7, 3)).collect();
        let f = ExactStepFunction::new(t.clone(), vals).unwrap();
        let g = f.to_f64();
        let s_exact = f.square_sq();
        let s_float = g.square_sq();
        for (e, fl) in s_exact.iter().zip(s_float.values()) {
            assert!((crate::filtration::ratio_to_f64(e) - fl).abs() < 1e-12);
        }
    }
}
