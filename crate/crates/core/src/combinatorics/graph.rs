use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Unordered pair stored with the smaller vertex first.
pub type Edge = (usize, usize);

/// Simple undirected graph on `0..n`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<Edge>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            edges: BTreeSet::new(),
        }
    }

    pub fn with_edges(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut g = Self::new(n);
        for (j, k) in edges {
            g.add_edge(j, k)?;
        }
        Ok(g)
    }

    /// Complete graph on `vertices`, as a graph on `0..n`.
    pub fn complete_on(n: usize, vertices: &[usize]) -> Result<Self> {
        let mut g = Self::new(n);
        for (a, &j) in vertices.iter().enumerate() {
            for &k in &vertices[a + 1..] {
                g.add_edge(j, k)?;
            }
        }
        Ok(g)
    }

    /// Adds `{j, k}`. Returns whether the edge is new.
    pub fn add_edge(&mut self, j: usize, k: usize) -> Result<bool> {
        if j == k {
            return Err(Error::invalid(format!("self-loop at vertex {j}")));
        }
        if j >= self.n || k >= self.n {
            return Err(Error::invalid(format!(
                "edge ({j}, {k}) out of range for n={}",
                self.n
            )));
        }
        Ok(self.edges.insert((j.min(k), j.max(k))))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, j: usize, k: usize) -> bool {
        self.edges.contains(&(j.min(k), j.max(k)))
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_set(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    pub fn is_isolated(&self, v: usize) -> bool {
        self.edges.iter().all(|&(a, b)| a != v && b != v)
    }

    /// Edges of `self` that are not edges of `other`.
    pub fn difference_count(&self, other: &Graph) -> usize {
        self.edges.difference(&other.edges).count()
    }

    /// One `j k` pair per line, 1-indexed.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for &(j, k) in &self.edges {
            let _ = writeln!(out, "{} {}", j + 1, k + 1);
        }
        out
    }

    /// Parses the 1-indexed edge-list format. Blank lines and lines starting
    /// with `#` are skipped; duplicate edges are rejected.
    pub fn from_edge_list(n: usize, text: &str) -> Result<Self> {
        let mut g = Self::new(n);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse = |tok: Option<&str>| -> Result<usize> {
                let tok = tok.ok_or_else(|| {
                    Error::invalid(format!("line {}: expected two vertices", lineno + 1))
                })?;
                let v: usize = tok.parse().map_err(|_| {
                    Error::invalid(format!("line {}: bad vertex '{tok}'", lineno + 1))
                })?;
                if v == 0 {
                    return Err(Error::invalid(format!(
                        "line {}: vertices are 1-indexed",
                        lineno + 1
                    )));
                }
                Ok(v - 1)
            };
            let mut toks = line.split_whitespace();
            let (j, k) = (parse(toks.next())?, parse(toks.next())?);
            if toks.next().is_some() {
                return Err(Error::invalid(format!(
                    "line {}: trailing tokens",
                    lineno + 1
                )));
            }
            if !g.add_edge(j, k)? {
                return Err(Error::invalid(format!(
                    "line {}: duplicate edge {} {}",
                    lineno + 1,
                    j + 1,
                    k + 1
                )));
            }
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_loops_and_out_of_range() {
        let mut g = Graph::new(3);
        assert!(g.add_edge(1, 1).is_err());
        assert!(g.add_edge(0, 3).is_err());
        assert!(g.add_edge(2, 0).unwrap());
        assert!(!g.add_edge(0, 2).unwrap());
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn edge_list_text() {
        let g = Graph::with_edges(5, [(1, 2), (1, 3), (1, 4)]).unwrap();
        let text = g.to_edge_list();
        assert_eq!(text, "2 3\n2 4\n2 5\n");
        assert_eq!(Graph::from_edge_list(5, &text).unwrap(), g);
        let commented = "# star\n\n2 3\n 2 4 \n2 5\n";
        assert_eq!(Graph::from_edge_list(5, commented).unwrap(), g);
    }

    #[test]
    fn edge_list_errors() {
        assert!(Graph::from_edge_list(3, "0 1\n").is_err());
        assert!(Graph::from_edge_list(3, "1 2\n2 1\n").is_err());
        assert!(Graph::from_edge_list(3, "1\n").is_err());
        assert!(Graph::from_edge_list(3, "1 2 3\n").is_err());
        assert!(Graph::from_edge_list(3, "1 4\n").is_err());
    }
}
