//! Desk-scale laboratory for the smallest singular value of shifted random
//! matrices.
//!
//! * [`linalg`]: row-to-span distances, singular values, Hilbert–Schmidt norm
//!   of the inverse.
//! * [`samplers`]: row distributions, shift matrices, and the Bernoulli
//!   counterexample witness.
//! * [`combinatorics`]: greedy edge-halving decompositions, vertex values,
//!   ρ-sets, distance-dominance graphs, Q-sets and the dyadic event
//!   classification.
//! * [`alphaeta`]: (α,η)-structures on finite product spaces with exact
//!   evaluation of the section-sum inequality.
//! * [`experiments`]: reproducible Monte Carlo tail estimation with Wilson
//!   intervals and CSV/JSON emission.
//! * [`verification`]: randomized suites that check each deterministic
//!   lemma on generated instances.

pub mod alphaeta;
pub mod combinatorics;
mod error;
pub mod experiments;
pub mod linalg;
pub mod samplers;
pub mod verification;

pub use error::{Error, Result};
pub use linalg::Matrix;
