//! Scale parameters and the dyadic classification of rows.

use serde::{Deserialize, Serialize};

use super::decomposition::{greedy_decomposition, rho_from, DecompositionMode};
use super::matrix_graphs::shifted_dominance_graph;
use crate::error::{Error, Result};
use crate::linalg::{row_distances, Matrix};

pub const EPSILON: f64 = 1.0 / 24.0;
/// Decay exponent of the three-dimensional projection densities.
pub const K2: f64 = 2000.0;

/// k-th largest element of `values`, counting multiplicities (`k` is 1-based).
pub fn kmax(values: &[f64], k: usize) -> Result<f64> {
    if k == 0 || k > values.len() {
        return Err(Error::invalid(format!(
            "k = {k} out of range for a multiset of size {}",
            values.len()
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    Ok(sorted[k - 1])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureParams {
    pub n: usize,
    pub u: u32,
    pub k1: f64,
    pub epsilon: f64,
    pub k2: f64,
    /// `8(⌊log₂ n⌋ + 1 − u) + 2 log₂(1 + K₁)`.
    pub l_u: f64,
    /// `2^{L_u/192}`.
    pub offset_u: f64,
    /// Distance threshold `t`.
    pub t: f64,
}

impl StructureParams {
    /// Parameters at scale `u ∈ [0, ⌊log₂ n⌋]` with threshold `t = 1`.
    pub fn new(n: usize, u: u32, k1: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n must be positive"));
        }
        let log_n = n.ilog2();
        if u > log_n {
            return Err(Error::invalid(format!("u = {u} exceeds floor(log2 n) = {log_n}")));
        }
        if !(k1 > 0.0 && k1.is_finite()) {
            return Err(Error::invalid(format!("K1 must be positive, got {k1}")));
        }
        let l_u = 8.0 * f64::from(log_n + 1 - u) + 2.0 * (1.0 + k1).log2();
        Ok(Self {
            n,
            u,
            k1,
            epsilon: EPSILON,
            k2: K2,
            l_u,
            offset_u: 2f64.powf(l_u / 192.0),
            t: 1.0,
        })
    }

    pub fn with_threshold(mut self, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::invalid(format!("t must be positive, got {t}")));
        }
        self.t = t;
        Ok(self)
    }

    /// Integer level used for decompositions: `⌈L_u⌉`.
    pub fn level(&self) -> usize {
        self.l_u.ceil() as usize
    }
}

/// A dyadic cell index `λ` with `value ∈ [2^λ t, 2^{λ+1} t)`, or an overflow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DyadicIndex {
    NegInf,
    Finite(i64),
    PosInf,
}

/// Cell of `value` relative to `t`: `−∞` below `2^{−L}t`, `+∞` at or above
/// `2^{L+1}t`, otherwise `⌊log₂(value/t)⌋` clamped to `[⌈−L⌉, ⌊L⌋]`.
pub fn dyadic_cell(value: f64, t: f64, l: f64) -> DyadicIndex {
    if value < 2f64.powf(-l) * t {
        return DyadicIndex::NegInf;
    }
    if value >= 2f64.powf(l + 1.0) * t {
        return DyadicIndex::PosInf;
    }
    let mut lambda = (value / t).log2().floor() as i64;
    // log2 can be off by one ulp near powers of two; settle it exactly.
    while value < pow2(lambda) * t {
        lambda -= 1;
    }
    while value >= pow2(lambda + 1) * t {
        lambda += 1;
    }
    DyadicIndex::Finite(lambda.clamp((-l).ceil() as i64, l.floor() as i64))
}

fn pow2(e: i64) -> f64 {
    2f64.powi(e as i32)
}

/// `(λ₁, λ₂)` for row `i` of `A + M`:
///
/// * `λ₁` is the cell of `dist(R_i(A+M), H^i(A+M))`;
/// * `λ₂` is the cell of the `⌈|ρ_i|/2⌉`-th largest `mindist` over the ρ-set
///   of the shifted dominance graph (offset `offset_u`, `4⌈L_u⌉` steps), or
///   `−∞` when that ρ-set is empty.
pub fn classify_lambda(
    a: &Matrix,
    m: &Matrix,
    i: usize,
    params: &StructureParams,
    mode: DecompositionMode,
) -> Result<(DyadicIndex, DyadicIndex)> {
    let b = a.add(m)?;
    if b.n() != params.n {
        return Err(Error::invalid(format!(
            "matrix is {0}x{0} but parameters are for n = {1}",
            b.n(),
            params.n
        )));
    }
    let dist = row_distances(&b);
    let lambda1 = dyadic_cell(dist[i], params.t, params.l_u);

    let g_tilde = shifted_dominance_graph(a, m, i, params.offset_u)?;
    let dec = greedy_decomposition(&g_tilde, i, 4 * params.level(), mode)?;
    let rho = rho_from(&dec);
    let lambda2 = if rho.is_empty() {
        DyadicIndex::NegInf
    } else {
        let mins: Vec<f64> = rho.iter().map(|&(j, k)| dist[j].min(dist[k])).collect();
        let median = kmax(&mins, rho.len().div_ceil(2))?;
        dyadic_cell(median, params.t, params.l_u)
    };
    Ok((lambda1, lambda2))
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    #[test]
    fn kmax_examples() {
        let t = [1.0, 1.0, 2.0, 2.0, 4.0];
        assert_eq!(kmax(&t, 3).unwrap(), 2.0);
        assert_eq!(kmax(&t, 4).unwrap(), 1.0);
        assert_eq!(kmax(&t, 1).unwrap(), 4.0);
        assert!(kmax(&t, 0).is_err());
        assert!(kmax(&t, 6).is_err());
    }

    #[test]
    fn params_examples() {
        let p = StructureParams::new(1024, 0, 1.0).unwrap();
        assert_relative_eq!(p.l_u, 90.0, max_relative = 1e-15);
        assert_relative_eq!(p.offset_u, 1.38370, max_relative = 2e-4);
        assert_relative_eq!(p.offset_u, 2f64.powf(90.0 / 192.0), max_relative = 1e-15);

        let p = StructureParams::new(1024, 10, 1.0).unwrap();
        assert_relative_eq!(p.l_u, 10.0, max_relative = 1e-15);
        assert_relative_eq!(p.offset_u, 1.03676, max_relative = 1e-5);
        assert_eq!(p.epsilon, 1.0 / 24.0);
        assert_eq!(p.k2, 2000.0);
        assert!(StructureParams::new(1024, 11, 1.0).is_err());
        assert!(StructureParams::new(8, 0, 0.0).is_err());
    }

    #[test]
    fn dyadic_boundaries() {
        assert_eq!(dyadic_cell(1.0, 1.0, 4.0), DyadicIndex::Finite(0));
        assert_eq!(dyadic_cell(0.3, 0.3, 4.0), DyadicIndex::Finite(0));
        assert_eq!(dyadic_cell(1.999, 1.0, 4.0), DyadicIndex::Finite(0));
        assert_eq!(dyadic_cell(2.0, 1.0, 4.0), DyadicIndex::Finite(1));
        assert_eq!(dyadic_cell(0.5, 1.0, 4.0), DyadicIndex::Finite(-1));
        assert_eq!(dyadic_cell(1.0 / 16.0, 1.0, 4.0), DyadicIndex::Finite(-4));
        assert_eq!(dyadic_cell(0.0624, 1.0, 4.0), DyadicIndex::NegInf);
        assert_eq!(dyadic_cell(0.0, 1.0, 4.0), DyadicIndex::NegInf);
        assert_eq!(dyadic_cell(31.9, 1.0, 4.0), DyadicIndex::Finite(4));
        assert_eq!(dyadic_cell(32.0, 1.0, 4.0), DyadicIndex::PosInf);
        // non-integer level clamps into [-4, 4]
        assert_eq!(dyadic_cell(2f64.powf(-4.3), 1.0, 4.5), DyadicIndex::Finite(-4));
        assert_eq!(dyadic_cell(2f64.powf(5.2), 1.0, 4.5), DyadicIndex::Finite(4));
    }

    #[test]
    fn empty_rho_gives_negative_infinity() {
        // With M = 0 and a tiny offset the shifted graph of an orthogonal
        // diagonal matrix is empty for the row with the smallest entry.
        let a = Matrix::diagonal(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let m = Matrix::zeros(4);
        let mut p = StructureParams::new(4, 2, 1e-9).unwrap();
        p.offset_u = 0.5;
        let (l1, l2) = classify_lambda(&a, &m, 0, &p, DecompositionMode::Exact).unwrap();
        assert_eq!(l1, DyadicIndex::Finite(0));
        assert_eq!(l2, DyadicIndex::NegInf);
    }
}
