//! Pivot vectors and the r-tuple sets `Q₁`, `Q₂`.

use std::collections::BTreeSet;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{complement_basis, dist_to_span, norm, Matrix};

/// Relative slack when checking distance hypotheses.
const HYPOTHESIS_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Pivot {
    /// Index `i₀ ≥ 1` (0-based) with `‖x_{i₀}‖ ≥ b/(2ar) ‖x₀‖`.
    Found(usize),
    /// The distance hypotheses do not hold; nothing is claimed.
    HypothesesFailed(String),
    /// Hypotheses hold but no index satisfies the bound.
    NoPivot,
}

/// Given `dist(x₀, span{x₁…}) ≤ a` and `dist(x_i, span{x_j : j ≠ i}) ≥ b` for
/// `i ≥ 1`, returns the smallest `i₀ ≥ 1` with `‖x_{i₀}‖ ≥ b/(2ar)·‖x₀‖`,
/// where `r` is the number of vectors.
pub fn pivot_index<V: AsRef<[f64]>>(xs: &[V], a: f64, b: f64) -> Result<Pivot> {
    let r = xs.len();
    if r < 2 {
        return Err(Error::invalid(format!("need at least two vectors, got {r}")));
    }
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::invalid(format!("a and b must be positive and finite, got a={a}, b={b}")));
    }
    let dim = xs[0].as_ref().len();
    if let Some(bad) = xs.iter().position(|x| x.as_ref().len() != dim) {
        return Err(Error::invalid(format!(
            "vector {bad} has length {}, expected {dim}",
            xs[bad].as_ref().len()
        )));
    }
    let others = |i: usize| -> Vec<&[f64]> {
        xs.iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, x)| x.as_ref())
            .collect()
    };

    let d0 = dist_to_span(xs[0].as_ref(), &others(0))?;
    if d0 > a * (1.0 + HYPOTHESIS_SLACK) {
        return Ok(Pivot::HypothesesFailed(format!(
            "dist(x_0, span of the rest) = {d0} exceeds a = {a}"
        )));
    }
    for i in 1..r {
        let di = dist_to_span(xs[i].as_ref(), &others(i))?;
        if di < b * (1.0 - HYPOTHESIS_SLACK) {
            return Ok(Pivot::HypothesesFailed(format!(
                "dist(x_{i}, span of the others) = {di} is below b = {b}"
            )));
        }
    }

    let threshold = b / (2.0 * a * r as f64) * norm(xs[0].as_ref());
    Ok((1..r)
        .find(|&i| norm(xs[i].as_ref()) >= threshold)
        .map_or(Pivot::NoPivot, Pivot::Found))
}

/// The two families of r-subsets, each sorted lexicographically.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QSets {
    pub q1: Vec<Vec<usize>>,
    pub q2: Vec<Vec<usize>>,
}

impl QSets {
    pub fn union_len(&self) -> usize {
        let a: BTreeSet<&Vec<usize>> = self.q1.iter().collect();
        a.len() + self.q2.iter().filter(|s| !a.contains(s)).count()
    }
}

/// Enumerates all r-subsets `S` of `[n]`:
///
/// * `S ∈ Q₁` iff some `j ∈ S ∩ I` has `dist(R_j(B), H^S(B)) ≤ τ`;
/// * `S ∈ Q₂` iff `S ∩ I ≠ ∅` and some `j ∈ S ∖ I` has
///   `dist(R_j(B), H^S(B)) ≥ τb/(2ar)`.
pub fn q_sets(
    m: &Matrix,
    small: &BTreeSet<usize>,
    tau: f64,
    a: f64,
    b: f64,
    r: usize,
) -> Result<QSets> {
    let n = m.n();
    if r == 0 || r > n {
        return Err(Error::invalid(format!("need 1 <= r <= n = {n}, got r = {r}")));
    }
    if let Some(&bad) = small.iter().find(|&&i| i >= n) {
        return Err(Error::invalid(format!("I contains {bad}, out of range for n={n}")));
    }
    if !(tau > 0.0 && a > 0.0 && b > 0.0) {
        return Err(Error::invalid("τ, a and b must be positive"));
    }
    let big = tau * b / (2.0 * a * r as f64);
    let mut out = QSets::default();
    if small.is_empty() {
        return Ok(out);
    }
    for s in (0..n).combinations(r) {
        if !s.iter().any(|j| small.contains(j)) {
            continue;
        }
        let set: BTreeSet<usize> = s.iter().copied().collect();
        let basis = complement_basis(m, &set);
        let dist = |j: usize| basis.distance(m.row(j));
        if s.iter().filter(|j| small.contains(j)).any(|&j| dist(j) <= tau) {
            out.q1.push(s.clone());
        }
        if s.iter().filter(|j| !small.contains(j)).any(|&j| dist(j) >= big) {
            out.q2.push(s);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pivot_two_dimensional_example() {
        let xs = [vec![1.0, 0.0], vec![10.0, 0.1]];
        assert_eq!(pivot_index(&xs, 0.01, 0.1).unwrap(), Pivot::Found(1));
    }

    #[test]
    fn pivot_small_first_vector_returns_first_candidate() {
        // ‖x₀‖ ≤ 2ar, so every candidate works.
        let xs = [vec![0.1, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 3.0]];
        assert_eq!(pivot_index(&xs, 0.5, 1.0).unwrap(), Pivot::Found(1));
    }

    #[test]
    fn pivot_reports_failed_hypotheses() {
        let xs = [vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(matches!(
            pivot_index(&xs, 0.5, 0.1).unwrap(),
            Pivot::HypothesesFailed(_)
        ));
        assert!(pivot_index(&[vec![1.0, 0.0], vec![1.0]], 1.0, 1.0).is_err());
        assert!(pivot_index(&[vec![1.0]], 1.0, 1.0).is_err());
    }

    #[test]
    fn q_sets_empty_i() {
        let q = q_sets(&Matrix::identity(4), &BTreeSet::new(), 1.0, 1.0, 1.0, 2).unwrap();
        assert!(q.q1.is_empty() && q.q2.is_empty());
    }

    #[test]
    fn q_sets_identity() {
        let small: BTreeSet<usize> = [0].into();
        let q = q_sets(&Matrix::identity(4), &small, 2.0, 1.0, 1.0, 2).unwrap();
        assert_eq!(q.q1, vec![vec![0, 1], vec![0, 2], vec![0, 3]]);
        // threshold τb/(2ar) = 0.5 ≤ 1, so Q₂ has the same pairs
        assert_eq!(q.q2, q.q1);
        assert_eq!(q.union_len(), 3);
    }

    #[test]
    fn q_sets_rejects_large_r() {
        assert!(q_sets(&Matrix::identity(3), &BTreeSet::new(), 1.0, 1.0, 1.0, 4).is_err());
    }
}
