//! Graphs read off a matrix by comparing row distances to `H^{i,j,k}`.
//!
//! In the graph of row `i`, the pair `{j, k}` is an edge when row `i` is at
//! least as far from the span of the other `n − 3` rows as rows `j` and `k`
//! are. Vertex `i` is isolated by construction. All comparisons are exact
//! floating-point `≥`, so ties count as edges.

use std::collections::{BTreeSet, HashMap};

use super::decomposition::{vertex_value, DecompositionMode};
use super::graph::Graph;
use crate::error::{Error, Result};
use crate::linalg::{complement_basis, row_distances, Matrix};

fn check_index(b: &Matrix, i: usize) -> Result<()> {
    if b.n() < 3 {
        return Err(Error::invalid(format!("need n >= 3, got {}", b.n())));
    }
    if i >= b.n() {
        return Err(Error::invalid(format!("row {i} out of range for n={}", b.n())));
    }
    Ok(())
}

/// `[dist(R_x(B), H^{a,b,c}(B)) for x in triple]`, with `triple` sorted.
fn triple_distances(b: &Matrix, triple: [usize; 3]) -> [f64; 3] {
    let s: BTreeSet<usize> = triple.into_iter().collect();
    let basis = complement_basis(b, &s);
    triple.map(|x| basis.distance(b.row(x)))
}

fn sorted_triple(i: usize, j: usize, k: usize) -> [usize; 3] {
    let mut t = [i, j, k];
    t.sort_unstable();
    t
}

fn position(triple: &[usize; 3], x: usize) -> usize {
    triple.iter().position(|&v| v == x).unwrap()
}

/// Distances of each row of every triple to the span of the rows outside it.
#[derive(Clone, Debug)]
pub struct TripleTable {
    n: usize,
    distances: HashMap<[usize; 3], [f64; 3]>,
}

impl TripleTable {
    pub fn new(b: &Matrix) -> Result<Self> {
        check_index(b, 0)?;
        let n = b.n();
        let mut distances = HashMap::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let t = [i, j, k];
                    distances.insert(t, triple_distances(b, t));
                }
            }
        }
        Ok(Self { n, distances })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `dist(R_x, H^{i,j,k})` for `x ∈ {i, j, k}`.
    pub fn distance(&self, x: usize, i: usize, j: usize, k: usize) -> f64 {
        let t = sorted_triple(i, j, k);
        self.distances[&t][position(&t, x)]
    }

    /// The dominance graph of row `i`.
    pub fn graph(&self, i: usize) -> Graph {
        let mut g = Graph::new(self.n);
        for j in (0..self.n).filter(|&j| j != i) {
            for k in (j + 1..self.n).filter(|&k| k != i) {
                let t = sorted_triple(i, j, k);
                let d = self.distances[&t];
                let (di, dj, dk) = (d[position(&t, i)], d[position(&t, j)], d[position(&t, k)]);
                if di >= dj.max(dk) {
                    g.add_edge(j, k).expect("distinct in-range vertices");
                }
            }
        }
        g
    }
}

/// Graph on `[n]` with edge `{j, k}` iff
/// `dist(R_i(B), H^{i,j,k}(B)) ≥ max(dist(R_j(B), ·), dist(R_k(B), ·))`.
pub fn dominance_graph(b: &Matrix, i: usize) -> Result<Graph> {
    check_index(b, i)?;
    let n = b.n();
    let mut g = Graph::new(n);
    for j in (0..n).filter(|&j| j != i) {
        for k in (j + 1..n).filter(|&k| k != i) {
            let t = sorted_triple(i, j, k);
            let d = triple_distances(b, t);
            if d[position(&t, i)] >= d[position(&t, j)].max(d[position(&t, k)]) {
                g.add_edge(j, k)?;
            }
        }
    }
    Ok(g)
}

/// Graph on `[n]` with edge `{j, k}` iff
/// `dist(R_i(M), H^{i,j,k}(A+M)) + offset ≥ max(dist(R_j(A+M), ·), dist(R_k(A+M), ·))`.
///
/// Row `i` of `A` does not enter.
pub fn shifted_dominance_graph(a: &Matrix, m: &Matrix, i: usize, offset: f64) -> Result<Graph> {
    let b = a.add(m)?;
    check_index(&b, i)?;
    if !offset.is_finite() || offset < 0.0 {
        return Err(Error::invalid(format!("offset must be finite and nonnegative, got {offset}")));
    }
    let n = b.n();
    let mut g = Graph::new(n);
    for j in (0..n).filter(|&j| j != i) {
        for k in (j + 1..n).filter(|&k| k != i) {
            let s: BTreeSet<usize> = [i, j, k].into_iter().collect();
            let basis = complement_basis(&b, &s);
            let lhs = basis.distance(m.row(i)) + offset;
            let rhs = basis.distance(b.row(j)).max(basis.distance(b.row(k)));
            if lhs >= rhs {
                g.add_edge(j, k)?;
            }
        }
    }
    Ok(g)
}

/// Vertex value of every row in its own dominance graph.
pub fn matrix_vertex_values(b: &Matrix, level: usize, mode: DecompositionMode) -> Result<Vec<f64>> {
    let table = TripleTable::new(b)?;
    (0..b.n())
        .map(|i| vertex_value(&table.graph(i), i, level, mode))
        .collect()
}

/// `|{i : vl_i ≤ N}|` with `vl_i` the value of row `i` in its dominance graph.
pub fn low_value_count(b: &Matrix, level: usize, bound: usize, mode: DecompositionMode) -> Result<usize> {
    if bound == 0 {
        return Err(Error::invalid("N must be a positive integer"));
    }
    let values = matrix_vertex_values(b, level, mode)?;
    Ok(values.iter().filter(|&&v| v <= bound as f64).count())
}

/// `min(dist(R_j, H^j), dist(R_k, H^k))`.
pub fn mindist(b: &Matrix, j: usize, k: usize) -> Result<f64> {
    if j == k {
        return Err(Error::invalid(format!("mindist needs distinct rows, got {j} twice")));
    }
    if j >= b.n() || k >= b.n() {
        return Err(Error::invalid(format!("rows ({j}, {k}) out of range for n={}", b.n())));
    }
    let d = row_distances(b);
    Ok(d[j].min(d[k]))
}

/// For every triple of distinct rows, at least one of `{j,k} ∈ E(G_i)`,
/// `{i,k} ∈ E(G_j)`, `{i,j} ∈ E(G_k)`.
pub fn triple_property_holds(b: &Matrix) -> Result<bool> {
    let table = TripleTable::new(b)?;
    let graphs: Vec<Graph> = (0..b.n()).map(|i| table.graph(i)).collect();
    let n = b.n();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if !(graphs[i].has_edge(j, k) || graphs[j].has_edge(i, k) || graphs[k].has_edge(i, j)) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
