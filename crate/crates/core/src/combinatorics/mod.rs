//! Deterministic graph and tuple machinery behind the shifted-matrix bound.
//!
//! Vertices and matrix rows are 0-based throughout the API; the edge-list
//! text format is 1-based.

mod decomposition;
mod graph;
mod matrix_graphs;
mod structure;
mod tuples;

pub use decomposition::{
    check_edge_interval, greedy_decomposition, min_half_cover, rho_set, two_graphs_dichotomy,
    vertex_value, DecompositionMode, DichotomyReport, GreedyDecomposition, EXACT_MAX_VERTICES,
};
pub use graph::{Edge, Graph};
pub use matrix_graphs::{
    dominance_graph, low_value_count, matrix_vertex_values, mindist, shifted_dominance_graph, triple_property_holds,
    TripleTable,
};
pub use structure::{classify_lambda, dyadic_cell, kmax, DyadicIndex, StructureParams, EPSILON, K2};
pub use tuples::{pivot_index, q_sets, Pivot, QSets};
