//! Edge-halving decompositions of a graph around an isolated vertex.
//!
//! Starting from `S₀ = ∅`, `E₀ = E`, step `k` grows `S_{k−1}` to `S_k` so that
//! the edges avoiding `S_k`, written `E_k`, number at most `|E_{k−1}|/2`.
//! Exact mode takes a minimum-cardinality admissible `S_k`; among those it
//! takes the lexicographically smallest sorted vertex list. Once `E_k` is
//! empty the sequences stay constant.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::graph::{Edge, Graph};
use crate::error::{Error, Result};

/// Largest vertex count accepted by exhaustive searches.
pub const EXACT_MAX_VERTICES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecompositionMode {
    /// Minimum-cardinality increments, found by exhaustive search.
    Exact,
    /// Repeatedly adds a maximum residual-degree vertex. Admissible but not
    /// necessarily minimal.
    Greedy,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GreedyDecomposition {
    vertex: usize,
    mode: DecompositionMode,
    sets: Vec<Vec<usize>>,
    edge_sets: Vec<Vec<Edge>>,
}

impl GreedyDecomposition {
    pub fn vertex(&self) -> usize {
        self.vertex
    }

    pub fn mode(&self) -> DecompositionMode {
        self.mode
    }

    /// Number of computed steps; `S_0..=S_depth` are available.
    pub fn depth(&self) -> usize {
        self.sets.len() - 1
    }

    /// `S_k`, sorted.
    pub fn s(&self, k: usize) -> &[usize] {
        &self.sets[k]
    }

    /// `E_k`, sorted.
    pub fn e(&self, k: usize) -> &[Edge] {
        &self.edge_sets[k]
    }

    /// `|S_k ∖ S_{k−1}|` for `k ≥ 1`.
    pub fn increment(&self, k: usize) -> usize {
        self.sets[k].len() - self.sets[k - 1].len()
    }
}

fn validate(g: &Graph, i: usize, depth: usize, mode: DecompositionMode) -> Result<()> {
    if i >= g.n() {
        return Err(Error::invalid(format!("vertex {i} out of range for n={}", g.n())));
    }
    if !g.is_isolated(i) {
        return Err(Error::invalid(format!("vertex {i} is not isolated")));
    }
    if depth == 0 {
        return Err(Error::invalid("decomposition depth must be at least 1"));
    }
    if mode == DecompositionMode::Exact && g.n() > EXACT_MAX_VERTICES {
        return Err(Error::UnsupportedSize {
            what: "vertex count",
            got: g.n(),
            max: EXACT_MAX_VERTICES,
        });
    }
    Ok(())
}

pub fn greedy_decomposition(
    g: &Graph,
    i: usize,
    depth: usize,
    mode: DecompositionMode,
) -> Result<GreedyDecomposition> {
    validate(g, i, depth, mode)?;
    let mut in_s = vec![false; g.n()];
    let mut residual: Vec<Edge> = g.edges().collect();
    let mut sets = vec![Vec::new()];
    let mut edge_sets = vec![residual.clone()];
    for _ in 0..depth {
        let added = match mode {
            DecompositionMode::Exact => exact_increment(&residual),
            DecompositionMode::Greedy => greedy_increment(g.n(), &residual),
        };
        for v in added {
            in_s[v] = true;
        }
        residual.retain(|&(a, b)| !in_s[a] && !in_s[b]);
        sets.push((0..g.n()).filter(|&v| in_s[v]).collect());
        edge_sets.push(residual.clone());
    }
    Ok(GreedyDecomposition {
        vertex: i,
        mode,
        sets,
        edge_sets,
    })
}

/// Smallest vertex set, lexicographically first among those, leaving at
/// most half of `residual` uncovered.
///
/// Only vertices touching `residual` are candidates: a minimum set never
/// contains a vertex of residual degree zero. For equal-size sets disjoint
/// from `S_{k−1}`, lexicographic order of the added vertices agrees with
/// lexicographic order of the resulting `S_k`.
fn exact_increment(residual: &[Edge]) -> Vec<usize> {
    let target = residual.len() / 2;
    if residual.len() <= target {
        return Vec::new();
    }
    let candidates: Vec<usize> = residual
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .sorted_unstable()
        .dedup()
        .collect();
    let pos = |v: usize| candidates.binary_search(&v).unwrap();
    let masks: Vec<u32> = residual
        .iter()
        .map(|&(a, b)| (1u32 << pos(a)) | (1u32 << pos(b)))
        .collect();
    for size in 1..=candidates.len() {
        for combo in (0..candidates.len()).combinations(size) {
            let chosen = combo.iter().fold(0u32, |m, &p| m | (1 << p));
            let uncovered = masks.iter().filter(|&&e| e & chosen == 0).count();
            if uncovered <= target {
                return combo.into_iter().map(|p| candidates[p]).collect();
            }
        }
    }
    unreachable!("choosing every candidate covers all residual edges")
}

fn greedy_increment(n: usize, residual: &[Edge]) -> Vec<usize> {
    let target = residual.len() / 2;
    let mut remaining = residual.to_vec();
    let mut added = Vec::new();
    while remaining.len() > target {
        let mut degree = vec![0usize; n];
        for &(a, b) in &remaining {
            degree[a] += 1;
            degree[b] += 1;
        }
        // max_by_key keeps the last maximum; iterate in reverse to prefer the smallest index.
        let v = (0..n).rev().max_by_key(|&v| degree[v]).unwrap();
        added.push(v);
        remaining.retain(|&(a, b)| a != v && b != v);
    }
    added
}

/// `min(max(2^{−L/2}√|E|, |S_L|), √|E|)`.
pub fn vertex_value(g: &Graph, i: usize, level: usize, mode: DecompositionMode) -> Result<f64> {
    let dec = greedy_decomposition(g, i, level, mode)?;
    Ok(value_from(&dec, g.edge_count(), level))
}

pub(crate) fn value_from(dec: &GreedyDecomposition, edge_count: usize, level: usize) -> f64 {
    let root = (edge_count as f64).sqrt();
    let scaled = 2f64.powf(-(level as f64) / 2.0) * root;
    scaled.max(dec.s(level).len() as f64).min(root)
}

/// `E_{k₀−1}` where `k₀ ∈ [1, 4L]` is the first step with the largest
/// increment `|S_k ∖ S_{k−1}|`.
pub fn rho_set(g: &Graph, i: usize, level: usize, mode: DecompositionMode) -> Result<Vec<Edge>> {
    let dec = greedy_decomposition(g, i, 4 * level, mode)?;
    Ok(rho_from(&dec).to_vec())
}

pub(crate) fn rho_from(dec: &GreedyDecomposition) -> &[Edge] {
    let best = (1..=dec.depth()).map(|k| dec.increment(k)).max().unwrap_or(0);
    let k0 = (1..=dec.depth())
        .find(|&k| dec.increment(k) == best)
        .unwrap_or(1);
    dec.e(k0 - 1)
}

/// Evaluates `2^ℓ|E_k| ≤ |E_{k−ℓ}| ≤ 2^ℓ|E_k| + 2^{ℓ+1}n` on the exact
/// decomposition.
pub fn check_edge_interval(g: &Graph, i: usize, k: usize, l: usize) -> Result<bool> {
    if l == 0 || l > k {
        return Err(Error::invalid(format!("need 0 < ℓ <= k, got k={k}, ℓ={l}")));
    }
    let dec = greedy_decomposition(g, i, k, DecompositionMode::Exact)?;
    Ok(edge_interval_holds(&dec, g.n(), k, l))
}

pub(crate) fn edge_interval_holds(dec: &GreedyDecomposition, n: usize, k: usize, l: usize) -> bool {
    let scale = 2f64.powi(l as i32);
    let ek = dec.e(k).len() as f64;
    let earlier = dec.e(k - l).len() as f64;
    scale * ek <= earlier && earlier <= scale * ek + 2.0 * scale * n as f64
}

/// Minimum size of a vertex set incident to at least half of `edges`, by
/// exhaustive search over the touched vertices.
pub fn min_half_cover(edges: &[Edge]) -> Result<usize> {
    let vertices: Vec<usize> = edges
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .sorted_unstable()
        .dedup()
        .collect();
    if vertices.len() > 2 * EXACT_MAX_VERTICES {
        return Err(Error::UnsupportedSize {
            what: "touched vertex count",
            got: vertices.len(),
            max: 2 * EXACT_MAX_VERTICES,
        });
    }
    let idx = |v: usize| vertices.binary_search(&v).unwrap();
    let masks: Vec<u64> = edges
        .iter()
        .map(|&(a, b)| (1u64 << idx(a)) | (1u64 << idx(b)))
        .collect();
    for size in 0..=vertices.len() {
        for combo in (0..vertices.len()).combinations(size) {
            let chosen = combo.iter().fold(0u64, |m, &p| m | (1 << p));
            let covered = masks.iter().filter(|&&e| e & chosen != 0).count();
            if 2 * covered >= edges.len() {
                return Ok(size);
            }
        }
    }
    unreachable!("all touched vertices cover every edge")
}

/// Which of the two alternatives held for a pair of graphs `(G, G̃)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub vertex_value: f64,
    pub rho_len: usize,
    /// Smallest vertex set incident to half of the ρ-set.
    pub min_half_cover: usize,
    /// Every half-cover of ρ has at least `vl / (4L²)` vertices.
    pub assertion_one: bool,
    /// `vl ≤ 4 · 2^{−L/2} n`.
    pub assertion_two: bool,
}

impl DichotomyReport {
    pub fn holds(&self) -> bool {
        self.assertion_one || self.assertion_two
    }
}

/// Evaluates both alternatives on exact decompositions. Requires
/// `|E(G) ∖ E(G̃)| ≤ 16^{−L} n²`; otherwise a precondition error.
pub fn two_graphs_dichotomy(
    g: &Graph,
    g_tilde: &Graph,
    i: usize,
    level: usize,
) -> Result<DichotomyReport> {
    if g.n() != g_tilde.n() {
        return Err(Error::invalid(format!(
            "graphs have different vertex counts {} and {}",
            g.n(),
            g_tilde.n()
        )));
    }
    if level == 0 {
        return Err(Error::invalid("level L must be at least 1"));
    }
    let n = g.n() as f64;
    let missing = g.difference_count(g_tilde);
    let allowed = n * n / 16f64.powi(level as i32);
    if missing as f64 > allowed {
        return Err(Error::Precondition(format!(
            "|E ∖ Ẽ| = {missing} exceeds 16^-L n^2 = {allowed}"
        )));
    }
    let vl = vertex_value(g, i, level, DecompositionMode::Exact)?;
    let rho = rho_set(g_tilde, i, level, DecompositionMode::Exact)?;
    let cover = min_half_cover(&rho)?;
    let l = level as f64;
    Ok(DichotomyReport {
        vertex_value: vl,
        rho_len: rho.len(),
        min_half_cover: cover,
        assertion_one: cover as f64 >= vl / (4.0 * l * l),
        assertion_two: vl <= 4.0 * 2f64.powf(-l / 2.0) * n,
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;
    use DecompositionMode::*;

    /// Star with center 2 and leaves 3,4,5 (1-based), vertex 1 isolated.
    fn star() -> Graph {
        Graph::with_edges(5, [(1, 2), (1, 3), (1, 4)]).unwrap()
    }

    /// Every subset whose removal leaves at most half of `edges`.
    fn admissible_subsets(n: usize, edges: &[Edge]) -> Vec<Vec<usize>> {
        (0u32..1 << n)
            .filter(|mask| {
                let left = edges
                    .iter()
                    .filter(|&&(a, b)| mask & (1 << a) == 0 && mask & (1 << b) == 0)
                    .count();
                2 * left <= edges.len()
            })
            .map(|mask| (0..n).filter(|v| mask & (1 << v) != 0).collect())
            .collect()
    }

    #[test]
    fn star_first_step_is_center() {
        let g = star();
        let dec = greedy_decomposition(&g, 0, 1, Exact).unwrap();
        assert_eq!(dec.s(1), &[1]);
        assert!(dec.e(1).is_empty());

        let all = admissible_subsets(5, &g.edges().collect::<Vec<_>>());
        let min = all.iter().map(Vec::len).min().unwrap();
        let minimal: Vec<_> = all.iter().filter(|s| s.len() == min).collect();
        assert_eq!(minimal, vec![&vec![1]]);
    }

    #[test]
    fn empty_graph_stays_empty() {
        let g = Graph::new(4);
        for mode in [Exact, Greedy] {
            let dec = greedy_decomposition(&g, 2, 5, mode).unwrap();
            for k in 0..=5 {
                assert!(dec.s(k).is_empty());
                assert!(dec.e(k).is_empty());
            }
        }
    }

    #[test]
    fn single_edge_tie_breaks_to_smaller_vertex() {
        let g = Graph::with_edges(3, [(1, 2)]).unwrap();
        let dec = greedy_decomposition(&g, 0, 1, Exact).unwrap();
        assert_eq!(dec.s(1), &[1]);
        assert!(dec.e(1).is_empty());
    }

    #[test]
    fn preconditions() {
        let g = star();
        assert!(matches!(
            greedy_decomposition(&g, 1, 1, Exact),
            Err(Error::InvalidInput(_))
        ));
        assert!(greedy_decomposition(&g, 0, 0, Exact).is_err());
        let big = Graph::new(17);
        assert!(matches!(
            greedy_decomposition(&big, 0, 1, Exact),
            Err(Error::UnsupportedSize { .. })
        ));
        assert!(greedy_decomposition(&big, 0, 1, Greedy).is_ok());
    }

    #[test]
    fn vertex_values() {
        assert_eq!(vertex_value(&Graph::new(4), 0, 3, Exact).unwrap(), 0.0);
        let v = vertex_value(&star(), 0, 1, Exact).unwrap();
        assert_relative_eq!(v, 3f64.sqrt() / 2f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(v, 1.22474, max_relative = 1e-5);

        let k5 = Graph::complete_on(6, &[1, 2, 3, 4, 5]).unwrap();
        let dec = greedy_decomposition(&k5, 0, 1, Exact).unwrap();
        assert_eq!(dec.s(1).len(), 2);
        assert_relative_eq!(
            vertex_value(&k5, 0, 1, Exact).unwrap(),
            5f64.sqrt(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn rho_sets() {
        assert!(rho_set(&Graph::new(3), 0, 1, Exact).unwrap().is_empty());
        let g = star();
        let rho = rho_set(&g, 0, 1, Exact).unwrap();
        assert_eq!(rho, g.edges().collect::<Vec<_>>());
    }

    #[test]
    fn edge_interval_examples() {
        assert!(check_edge_interval(&Graph::new(5), 0, 3, 2).unwrap());
        assert!(check_edge_interval(&star(), 0, 1, 1).unwrap());
        assert!(check_edge_interval(&star(), 0, 1, 2).is_err());
        assert!(check_edge_interval(&star(), 0, 1, 0).is_err());
    }

    #[test]
    fn half_cover() {
        assert_eq!(min_half_cover(&[]).unwrap(), 0);
        assert_eq!(min_half_cover(&[(0, 1)]).unwrap(), 1);
        // two disjoint edges: one vertex covers half
        assert_eq!(min_half_cover(&[(0, 1), (2, 3)]).unwrap(), 1);
        // perfect matching of 4 edges needs two vertices
        assert_eq!(min_half_cover(&[(0, 1), (2, 3), (4, 5), (6, 7)]).unwrap(), 2);
    }

    #[test]
    fn dichotomy_examples() {
        let empty = Graph::new(5);
        let r = two_graphs_dichotomy(&empty, &empty, 0, 1).unwrap();
        assert!(r.assertion_two && r.holds());

        let s = star();
        let r = two_graphs_dichotomy(&s, &s, 0, 1).unwrap();
        assert!(r.assertion_two);
        assert_relative_eq!(r.vertex_value, 1.22474, max_relative = 1e-5);
    }

    #[test]
    fn dichotomy_rejects_violated_hypothesis() {
        // n = 4, L = 1: at most one edge of G may be missing from G̃.
        let g = Graph::with_edges(4, [(1, 2), (1, 3), (2, 3)]).unwrap();
        let err = two_graphs_dichotomy(&g, &Graph::new(4), 0, 1).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn greedy_mode_is_admissible() {
        let g = Graph::complete_on(20, &(1..20).collect::<Vec<_>>()).unwrap();
        let dec = greedy_decomposition(&g, 0, 4, Greedy).unwrap();
        for k in 1..=4 {
            assert!(2 * dec.e(k).len() <= dec.e(k - 1).len());
        }
    }
}
