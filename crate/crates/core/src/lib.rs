//! Finite-depth atomic filtrations, martingale square and maximal functions,
//! A∞ weight characteristics, and numerical verifiers for the superexponential
//! concentration bounds they satisfy on α-homogeneous trees.
//!
//! The crate is organized bottom-up:
//!
//! * [`filtration`] — the tree of atoms with per-atom measures,
//! * [`operators`] — conditional expectations, martingale differences,
//!   the square functions `S`, `S_p`, `S_∞`, the maximal function `f*`,
//!   stopped martingales and the localized Hardy–Littlewood maximal function,
//! * [`weights`] — martingale/semiclassical A∞ and A₁ characteristics,
//! * [`inequalities`] — theorem-level verifiers producing [`inequalities::InequalityReport`]s,
//! * [`certificates`] — scalar (finite-dimensional) certificates for the
//!   Bellman-function machinery and the extrapolation pipeline,
//! * [`constructions`] — the extremal examples: the 2-d unbounded-`S_∞`
//!   function and the sharpness family `g_N`,
//! * [`exact`] — rational-arithmetic mirrors used where closed forms are exact,
//! * [`reference`] — brute-force oracles the fast kernels are tested against,
//! * [`random`] — seeded generators for trees and step functions.

pub mod certificates;
pub mod constructions;
pub mod error;
pub mod exact;
pub mod filtration;
pub mod inequalities;
pub mod operators;
pub mod random;
pub mod reference;
pub mod weights;

pub use error::{Error, Result};
pub use filtration::{FiltrationTree, HomogeneityParameter};
pub use inequalities::InequalityReport;
pub use operators::{MartingaleDecomposition, StepFunction};
