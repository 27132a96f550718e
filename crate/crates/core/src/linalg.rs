//! Dense kernels built around one identity: for invertible `B`, the columns of
//! `B⁻¹` and the rows of `B` are biorthogonal, so
//! `‖col_i(B⁻¹)‖₂ · dist(R_i(B), H^i(B)) = 1` where `H^i(B)` is the span of the
//! remaining rows.
//!
//! Distances are computed by orthogonalizing the spanning rows, never by
//! inverting, so they stay well defined for singular matrices. The
//! Hilbert–Schmidt norm of the inverse is computed from the singular values,
//! which gives an independent route to `Σ_i dist_i⁻²`.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A vector whose residual after projection is at most
/// `RANK_TOLERANCE × (largest row norm)` is treated as lying inside the span.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Pivot threshold (relative to the largest row norm) under which
/// [`row_distances`] abandons the rotation-based fast path.
const FAST_PATH_PIVOT: f64 = 1e-8;

/// Dense square real matrix, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from its rows, rejecting ragged, empty, non-square or
    /// non-finite input.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::invalid("matrix must have at least one row"));
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid(format!(
                    "row {i} has length {}, expected {n} (square matrix)",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Self::from_row_major(n, data)
    }

    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("matrix dimension must be positive"));
        }
        if data.len() != n * n {
            return Err(Error::invalid(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "entry ({}, {}) is not finite",
                pos / n,
                pos % n
            )));
        }
        Ok(Self { n, data })
    }

    /// # Panics
    /// If `n == 0` or `f` produces a non-finite value.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(n > 0, "matrix dimension must be positive");
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let v = f(i, j);
                assert!(v.is_finite(), "entry ({i}, {j}) is not finite");
                data.push(v);
            }
        }
        Self { n, data }
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_fn(n, |_, _| 0.0)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("diagonal must be non-empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("diagonal entries must be finite"));
        }
        Ok(Self::from_fn(values.len(), |i, j| {
            if i == j {
                values[i]
            } else {
                0.0
            }
        }))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.n)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i))
    }

    pub fn add(&self, other: &Matrix) -> Result<Self> {
        self.check_same_size(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { n: self.n, data })
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::from_row_major(self.n, self.data.iter().map(|v| v * c).collect())
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Self> {
        self.check_same_size(other)?;
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let out = &mut data[i * n..(i + 1) * n];
                for (o, b) in out.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Self::from_row_major(n, data)
    }

    pub fn max_row_norm(&self) -> f64 {
        self.rows().map(norm).fold(0.0, f64::max)
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.data)
    }

    fn check_same_size(&self, other: &Matrix) -> Result<()> {
        if self.n != other.n {
            return Err(Error::invalid(format!(
                "dimension mismatch: {0}x{0} vs {1}x{1}",
                self.n, other.n
            )));
        }
        Ok(())
    }

    /// Absolute rank tolerance for this matrix.
    pub fn rank_tolerance(&self) -> f64 {
        RANK_TOLERANCE * self.max_row_norm()
    }
}

impl TryFrom<Vec<Vec<f64>>> for Matrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl From<Matrix> for Vec<Vec<f64>> {
    fn from(m: Matrix) -> Self {
        m.rows().map(<[f64]>::to_vec).collect()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Orthonormal basis of a span, built by modified Gram–Schmidt with one
/// reorthogonalization pass. Rows whose residual falls at or below the
/// tolerance are dropped as dependent.
#[derive(Clone, Debug)]
pub struct SpanBasis {
    dim: usize,
    tol: f64,
    vectors: Vec<Vec<f64>>,
}

impl SpanBasis {
    pub fn new<'a>(dim: usize, rows: impl IntoIterator<Item = &'a [f64]>, tol: f64) -> Self {
        let mut basis = Self {
            dim,
            tol,
            vectors: Vec::new(),
        };
        for row in rows {
            debug_assert_eq!(row.len(), dim);
            if basis.vectors.len() == dim {
                break;
            }
            let mut r = basis.residual(row);
            let len = norm(&r);
            if len > tol {
                r.iter_mut().for_each(|v| *v /= len);
                basis.vectors.push(r);
            }
        }
        basis
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    /// `x − Px` with `P` the orthogonal projector onto the span.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let mut r = x.to_vec();
        for _ in 0..2 {
            for q in &self.vectors {
                let c = dot(q, &r);
                r.iter_mut().zip(q).for_each(|(ri, qi)| *ri -= c * qi);
            }
        }
        r
    }

    /// Distance from `x` to the span, snapped to zero at the tolerance.
    pub fn distance(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let d = norm(&self.residual(x));
        if d <= self.tol {
            0.0
        } else {
            d
        }
    }
}

/// `‖x − Px‖₂` for `P` the orthogonal projector onto `span(rows)`.
///
/// The rank tolerance is `RANK_TOLERANCE` times the largest norm among `x`
/// and the rows.
pub fn dist_to_span<R: AsRef<[f64]>>(x: &[f64], rows: &[R]) -> Result<f64> {
    let dim = x.len();
    if let Some(bad) = rows.iter().position(|r| r.as_ref().len() != dim) {
        return Err(Error::invalid(format!(
            "dimension mismatch: x has length {dim}, row {bad} has length {}",
            rows[bad].as_ref().len()
        )));
    }
    let scale = rows
        .iter()
        .map(|r| norm(r.as_ref()))
        .fold(norm(x), f64::max);
    let basis = SpanBasis::new(dim, rows.iter().map(AsRef::as_ref), RANK_TOLERANCE * scale);
    Ok(basis.distance(x))
}

/// Basis of `H^S(B)`, the span of the rows of `b` with indices outside `s`.
pub(crate) fn complement_basis(b: &Matrix, s: &BTreeSet<usize>) -> SpanBasis {
    SpanBasis::new(
        b.n(),
        (0..b.n()).filter(|j| !s.contains(j)).map(|j| b.row(j)),
        b.rank_tolerance(),
    )
}

/// `dist(R_i(B), H^S(B))`. `s` must contain `i`.
pub fn dist_to_complement(b: &Matrix, i: usize, s: &BTreeSet<usize>) -> Result<f64> {
    if i >= b.n() {
        return Err(Error::invalid(format!("row {i} out of range for n={}", b.n())));
    }
    if !s.contains(&i) {
        return Err(Error::invalid(format!("index {i} is not in S")));
    }
    if let Some(&bad) = s.iter().find(|&&j| j >= b.n()) {
        return Err(Error::invalid(format!("S contains {bad}, out of range for n={}", b.n())));
    }
    Ok(complement_basis(b, s).distance(b.row(i)))
}

/// `dist(R_i(B), H^i(B))` for every row, one Gram–Schmidt per row. O(n⁴);
/// used for numerically rank-deficient input and as a cross-check.
pub fn row_distances_reference(b: &Matrix) -> Vec<f64> {
    let tol = b.rank_tolerance();
    (0..b.n())
        .map(|i| {
            SpanBasis::new(b.n(), (0..b.n()).filter(|&j| j != i).map(|j| b.row(j)), tol)
                .distance(b.row(i))
        })
        .collect()
}

/// `dist(R_i(B), H^i(B))` for every row `i`.
///
/// Factors `Bᵀ = QR` once; distances are invariant under `Q`, so each one is
/// the distance from column `i` of `R` to the other columns. Moving that
/// column last and restoring triangularity with Givens rotations leaves the
/// distance as the magnitude of the final diagonal entry, O(n²) per row.
/// When a pivot of `R` is tiny the other rows may themselves be dependent and
/// the per-row Gram–Schmidt path is used instead.
pub fn row_distances(b: &Matrix) -> Vec<f64> {
    let n = b.n();
    let tol = b.rank_tolerance();
    let r = b.transpose().to_dmatrix().qr().r();
    let min_pivot = (0..n).map(|j| r[(j, j)].abs()).fold(f64::INFINITY, f64::min);
    if n == 1 || min_pivot <= FAST_PATH_PIVOT * b.max_row_norm() {
        return row_distances_reference(b);
    }

    let cols: Vec<Vec<f64>> = (0..n).map(|j| r.column(j).iter().copied().collect()).collect();
    let mut work: Vec<Vec<f64>> = vec![Vec::new(); n];
    (0..n)
        .map(|i| {
            for (slot, src) in work
                .iter_mut()
                .zip((0..n).filter(|&j| j != i).chain(std::iter::once(i)))
            {
                slot.clone_from(&cols[src]);
            }
            // Columns i..n-2 are upper Hessenberg; rotate rows (c, c+1).
            for c in i..n - 1 {
                let (x, y) = (work[c][c], work[c][c + 1]);
                let h = x.hypot(y);
                if h == 0.0 {
                    continue;
                }
                let (cs, sn) = (x / h, y / h);
                for col in work.iter_mut().skip(c) {
                    let (u, v) = (col[c], col[c + 1]);
                    col[c] = cs * u + sn * v;
                    col[c + 1] = -sn * u + cs * v;
                }
            }
            let d = work[n - 1][n - 1].abs();
            if d <= tol {
                0.0
            } else {
                d
            }
        })
        .collect()
}

/// Singular values in nonincreasing order.
pub fn singular_values(b: &Matrix) -> Vec<f64> {
    let mut sv: Vec<f64> = b.to_dmatrix().singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Extreme singular values and the Hilbert–Schmidt norm of the inverse,
/// without row distances.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub s_min: f64,
    pub s_max: f64,
    /// `+∞` when the matrix is singular at the rank tolerance.
    pub hs_inverse: f64,
}

impl Spectrum {
    pub fn is_singular(&self) -> bool {
        self.hs_inverse.is_infinite()
    }

    /// `s_max / s_min`, infinite for singular matrices.
    pub fn condition_number(&self) -> f64 {
        if self.is_singular() {
            f64::INFINITY
        } else {
            self.s_max / self.s_min
        }
    }
}

pub fn spectrum(b: &Matrix) -> Spectrum {
    spectrum_from_values(&singular_values(b), b.rank_tolerance())
}

fn spectrum_from_values(sv: &[f64], tol: f64) -> Spectrum {
    let s_max = sv[0];
    let s_min = *sv.last().unwrap();
    if s_min <= tol {
        return Spectrum {
            s_min: 0.0,
            s_max,
            hs_inverse: f64::INFINITY,
        };
    }
    let hs_sq: f64 = sv.iter().map(|s| 1.0 / (s * s)).sum();
    Spectrum {
        s_min,
        s_max,
        hs_inverse: hs_sq.sqrt(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularData {
    pub s_min: f64,
    pub s_max: f64,
    /// Hilbert–Schmidt norm of the inverse; `+∞` for singular input.
    pub hs_inverse: f64,
    /// `dist(R_i, H^i)` per row.
    pub row_distances: Vec<f64>,
}

impl SingularData {
    pub fn is_singular(&self) -> bool {
        self.hs_inverse.is_infinite()
    }
}

/// Singular values and row distances of `b`. A matrix counts as singular
/// when its smallest singular value or any row distance is within the rank
/// tolerance; then `s_min = 0` and `hs_inverse = +∞`.
pub fn singular_data(b: &Matrix) -> SingularData {
    let spec = spectrum(b);
    let row_distances = row_distances(b);
    let singular = spec.is_singular() || row_distances.contains(&0.0);
    SingularData {
        s_min: if singular { 0.0 } else { spec.s_min },
        s_max: spec.s_max,
        hs_inverse: if singular {
            f64::INFINITY
        } else {
            spec.hs_inverse
        },
        row_distances,
    }
}
