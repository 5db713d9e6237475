//! Maximal matching on bounded-degree graphs, one edge at a time.
//!
//! Edges arrive in the order of a rank keyed by the canonical pair
//! `u * n + v`. An edge is matched iff no adjacent lower-ranked edge is
//! matched, which is the greedy online algorithm replayed over the edge's
//! relevant set in the line graph.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{LcaError, Result};
use crate::graph::{LineGraph, LocalGraph};
use crate::online::{eval_global, eval_local, GreedyMatching};
use crate::rank::{OrderingKind, Rank, RankOracle, Seed};

/// Undirected edge stored as `(min, max)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId {
    pub u: usize,
    pub v: usize,
}

impl EdgeId {
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a == b {
            return Err(LcaError::invalid(format!("edge ({a}, {b}) is a self-loop")));
        }
        Ok(EdgeId {
            u: a.min(b),
            v: a.max(b),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchVerdict {
    pub matched: bool,
    pub probes: u64,
    pub edges_evaluated: usize,
}

/// A matching LCA instance: graph, edge ordering and exploration cap.
#[derive(Clone, Debug)]
pub struct MatchingLca<'g> {
    graph: &'g LocalGraph,
    ranks: RankOracle,
    cap: usize,
}

impl<'g> MatchingLca<'g> {
    pub fn new(graph: &'g LocalGraph, seed: &Seed, kind: OrderingKind, cap: usize) -> Result<Self> {
        let n = graph.n() as u64;
        let ranks = RankOracle::new(seed, kind, n.checked_mul(n).ok_or_else(|| {
            LcaError::invalid("graph too large for pair-keyed edge ranks")
        })?)?;
        Ok(MatchingLca { graph, ranks, cap })
    }

    pub fn edge_rank(&self, index: usize) -> Rank {
        let (u, v) = self.graph.edge_endpoints(index).expect("edge index in range");
        self.ranks
            .rank_unchecked(u as u64 * self.graph.n() as u64 + v as u64)
    }

    pub fn is_matched(&self, e: EdgeId) -> Result<MatchVerdict> {
        let index = self
            .graph
            .edge_index(e.u, e.v)
            .ok_or_else(|| LcaError::invalid(format!("({}, {}) is not an edge", e.u, e.v)))?;
        let (matched, trace) = eval_local(
            &LineGraph::new(self.graph),
            index,
            GreedyMatching,
            |i| self.edge_rank(i),
            self.cap,
        )?;
        Ok(MatchVerdict {
            matched,
            probes: trace.probes,
            edges_evaluated: trace.evaluation_order.len(),
        })
    }

    /// Queries every edge; the first failure aborts.
    pub fn full_matching(&self) -> Result<BTreeSet<EdgeId>> {
        let mut out = BTreeSet::new();
        for (u, v) in self.graph.edges() {
            let e = EdgeId { u, v };
            if self.is_matched(e)?.matched {
                out.insert(e);
            }
        }
        Ok(out)
    }

    /// Greedy over the whole edge order: the oracle for [`Self::is_matched`].
    pub fn global_matching(&self) -> BTreeSet<EdgeId> {
        let trace = eval_global(&LineGraph::new(self.graph), GreedyMatching, |i| self.edge_rank(i));
        trace
            .outputs
            .into_iter()
            .filter(|&(_, m)| m)
            .map(|(i, _)| {
                let (u, v) = self.graph.edge_endpoints(i).expect("edge index in range");
                EdgeId { u, v }
            })
            .collect()
    }
}

pub fn is_matched(
    g: &LocalGraph,
    e: EdgeId,
    seed: &Seed,
    kind: OrderingKind,
    cap: usize,
) -> Result<MatchVerdict> {
    MatchingLca::new(g, seed, kind, cap)?.is_matched(e)
}

pub fn full_matching(
    g: &LocalGraph,
    seed: &Seed,
    kind: OrderingKind,
    cap: usize,
) -> Result<BTreeSet<EdgeId>> {
    MatchingLca::new(g, seed, kind, cap)?.full_matching()
}

/// True iff `m` is a set of vertex-disjoint edges of `g` covering at least
/// one endpoint of every edge of `g`.
pub fn verify_maximal(g: &LocalGraph, m: &BTreeSet<EdgeId>) -> bool {
    let mut covered = HashSet::new();
    for e in m {
        if !g.has_edge(e.u, e.v) || !covered.insert(e.u) || !covered.insert(e.v) {
            return false;
        }
    }
    g.edges()
        .all(|(u, v)| covered.contains(&u) || covered.contains(&v))
}
