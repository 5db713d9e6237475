//! Graph, hypergraph, CNF and bipartite-choice instances with local access.
//!
//! Instances are materialized in memory, but the algorithms only touch them
//! through neighbor and incidence lookups, which is what the probe counters
//! measure.

mod bipartite;
pub mod format;
mod generate;
mod hyper;

pub use bipartite::{gen_bipartite_choices, BipartiteChoices, ChoiceScheme};
pub(crate) use generate::rng_for;
pub use generate::{gen_binomial, gen_bounded_degree, gen_cnf, gen_hypergraph};
pub use hyper::{CnfFormula, Hypergraph, Incidence, Literal, PrimalGraph};

use serde::{Deserialize, Serialize};

use crate::error::{LcaError, Result};

/// Neighbor-oracle access to an undirected graph.
pub trait NeighborOracle {
    fn node_count(&self) -> usize;

    /// Replaces the contents of `out` with the neighbors of `v`, ascending.
    /// `v` must be below `node_count()`.
    fn neighbors_into(&self, v: usize, out: &mut Vec<usize>);
}

/// Simple undirected graph in compressed adjacency form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalGraph {
    n: usize,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    max_degree: usize,
    /// Number of canonical edges `(a, b)`, `a < b`, with `a < u`.
    upper_offsets: Vec<usize>,
}

impl LocalGraph {
    /// Builds a graph from an edge list; self-loops, duplicates and
    /// out-of-range endpoints are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(LcaError::invalid(format!(
                    "edge ({u}, {v}) outside vertex range {n}"
                )));
            }
            if u == v {
                return Err(LcaError::invalid(format!("self-loop at {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(LcaError::invalid(format!("duplicate edge ({u}, {})", w[0])));
            }
        }
        Ok(Self::from_sorted_adjacency(adj))
    }

    pub(crate) fn from_sorted_adjacency(adj: Vec<Vec<usize>>) -> Self {
        let n = adj.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut upper_offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut max_degree = 0;
        let mut upper = 0;
        offsets.push(0);
        upper_offsets.push(0);
        for (u, list) in adj.into_iter().enumerate() {
            max_degree = max_degree.max(list.len());
            upper += list.iter().filter(|&&w| w > u).count();
            targets.extend(list);
            offsets.push(targets.len());
            upper_offsets.push(upper);
        }
        LocalGraph {
            n,
            offsets,
            targets,
            max_degree,
            upper_offsets,
        }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_sorted_adjacency(vec![Vec::new(); n])
    }

    /// `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        Self::from_edges(n, &edges).expect("path edges are valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn neighbors(&self, v: usize) -> Result<&[usize]> {
        if v >= self.n {
            return Err(LcaError::OutOfUniverse {
                id: v as u64,
                universe: self.n as u64,
            });
        }
        Ok(self.adj(v))
    }

    pub(crate) fn adj(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.adj(u).binary_search(&v).is_ok()
    }

    /// Canonical edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.adj(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Position of `(min, max)` in [`LocalGraph::edges`], computed locally.
    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        if b >= self.n || a == b {
            return None;
        }
        let list = self.adj(a);
        let pos = list.binary_search(&b).ok()?;
        let first_upper = list.partition_point(|&w| w <= a);
        Some(self.upper_offsets[a] + pos - first_upper)
    }

    /// Inverse of [`LocalGraph::edge_index`].
    pub fn edge_endpoints(&self, index: usize) -> Option<(usize, usize)> {
        if index >= self.edge_count() {
            return None;
        }
        let a = self.upper_offsets.partition_point(|&off| off <= index) - 1;
        let list = self.adj(a);
        let first_upper = list.partition_point(|&w| w <= a);
        Some((a, list[first_upper + index - self.upper_offsets[a]]))
    }

    pub fn mean_degree(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.targets.len() as f64 / self.n as f64
        }
    }
}

impl NeighborOracle for LocalGraph {
    fn node_count(&self) -> usize {
        self.n
    }

    fn neighbors_into(&self, v: usize, out: &mut Vec<usize>) {
        out.clear();
        out.extend_from_slice(self.adj(v));
    }
}

/// The line graph: nodes are edge indices, adjacent when they share an endpoint.
#[derive(Clone, Copy, Debug)]
pub struct LineGraph<'g> {
    graph: &'g LocalGraph,
}

impl<'g> LineGraph<'g> {
    pub fn new(graph: &'g LocalGraph) -> Self {
        LineGraph { graph }
    }

    pub fn graph(&self) -> &'g LocalGraph {
        self.graph
    }
}

impl NeighborOracle for LineGraph<'_> {
    fn node_count(&self) -> usize {
        self.graph.edge_count()
    }

    fn neighbors_into(&self, e: usize, out: &mut Vec<usize>) {
        out.clear();
        let (u, v) = self.graph.edge_endpoints(e).expect("edge index in range");
        for (x, other) in [(u, v), (v, u)] {
            for &w in self.graph.adj(x) {
                if w != other {
                    out.push(self.graph.edge_index(x, w).expect("adjacent pair is an edge"));
                }
            }
        }
        out.sort_unstable();
        out.dedup();
    }
}
