//! Online algorithms evaluated locally.
//!
//! An [`OnlineRule`] computes an item's output from the item itself and the
//! outputs of its lower-ranked neighbors. [`eval_local`] answers one item by
//! exploring its relevant set and replaying the rule over it in rank order;
//! [`eval_global`] runs the rule over the whole arrival order and serves as
//! the oracle.

use std::collections::{BTreeMap, HashMap};

use crate::error::{LcaError, Result};
use crate::graph::{LocalGraph, NeighborOracle};
use crate::rank::{OrderingKind, Rank, RankOracle, Seed};
use crate::relevant::explore_with;

pub trait OnlineRule {
    type Output: Clone;

    /// `earlier` lists every neighbor of `v` that arrived before it, with its
    /// output, in ascending rank order.
    fn evaluate(&self, v: usize, earlier: &[(usize, Self::Output)]) -> Self::Output;
}

impl<T: OnlineRule + ?Sized> OnlineRule for &T {
    type Output = T::Output;

    fn evaluate(&self, v: usize, earlier: &[(usize, Self::Output)]) -> Self::Output {
        (**self).evaluate(v, earlier)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalTrace<O> {
    pub outputs: BTreeMap<usize, O>,
    /// Items in the order they were evaluated (ascending rank).
    pub evaluation_order: Vec<usize>,
    pub probes: u64,
}

/// Per-query memoizing evaluator. Memoized items are not re-explored, so a
/// sequence of [`LocalEvaluator::eval`] calls shares work; the memo lives
/// only as long as the evaluator.
pub struct LocalEvaluator<'a, G: ?Sized, R: OnlineRule, F> {
    graph: &'a G,
    rule: R,
    rank: F,
    cap: usize,
    memo: HashMap<usize, (Rank, R::Output)>,
    order: Vec<usize>,
    probes: u64,
    buf: Vec<usize>,
}

impl<'a, G, R, F> LocalEvaluator<'a, G, R, F>
where
    G: NeighborOracle + ?Sized,
    R: OnlineRule,
    F: Fn(usize) -> Rank,
{
    pub fn new(graph: &'a G, rule: R, rank: F, cap: usize) -> Self {
        LocalEvaluator {
            graph,
            rule,
            rank,
            cap,
            memo: HashMap::new(),
            order: Vec::new(),
            probes: 0,
            buf: Vec::new(),
        }
    }

    pub fn probes(&self) -> u64 {
        self.probes
    }

    pub fn evaluated(&self) -> usize {
        self.order.len()
    }

    pub fn rule(&self) -> &R {
        &self.rule
    }

    /// Memoized output of `v`, if some earlier query evaluated it.
    pub fn get(&self, v: usize) -> Option<&R::Output> {
        self.memo.get(&v).map(|(_, out)| out)
    }

    pub fn eval(&mut self, v: usize) -> Result<R::Output> {
        if let Some((_, out)) = self.memo.get(&v) {
            return Ok(out.clone());
        }
        let memo = &self.memo;
        let set = explore_with(self.graph, v, &self.rank, self.cap, |w| !memo.contains_key(&w));
        self.probes += set.probes;
        if set.truncated {
            return Err(LcaError::Truncated {
                root: v,
                cap: self.cap,
                probes: self.probes,
                members: set.len(),
            });
        }
        let mut earlier: Vec<(Rank, usize, R::Output)> = Vec::new();
        for &(z, rz) in &set.members {
            if self.memo.contains_key(&z) {
                continue;
            }
            self.probes += 1;
            self.graph.neighbors_into(z, &mut self.buf);
            earlier.clear();
            for &w in &self.buf {
                if let Some((rw, out)) = self.memo.get(&w) {
                    if *rw < rz {
                        earlier.push((*rw, w, out.clone()));
                    }
                }
            }
            debug_assert!(
                self.buf.iter().all(|&w| (self.rank)(w) > rz || self.memo.contains_key(&w)),
                "lower-ranked neighbor of {z} missing from its closure"
            );
            earlier.sort_unstable_by_key(|e| e.0);
            let args: Vec<(usize, R::Output)> =
                earlier.iter().map(|(_, w, o)| (*w, o.clone())).collect();
            let out = self.rule.evaluate(z, &args);
            self.memo.insert(z, (rz, out));
            self.order.push(z);
        }
        Ok(self.memo[&v].1.clone())
    }

    pub fn into_trace(self) -> EvalTrace<R::Output> {
        let outputs = self
            .order
            .iter()
            .map(|v| (*v, self.memo[v].1.clone()))
            .collect();
        EvalTrace {
            outputs,
            evaluation_order: self.order,
            probes: self.probes,
        }
    }
}

/// Output of `v0` and the trace of everything evaluated to get it.
pub fn eval_local<G, R, F>(
    g: &G,
    v0: usize,
    rule: R,
    rank: F,
    cap: usize,
) -> Result<(R::Output, EvalTrace<R::Output>)>
where
    G: NeighborOracle + ?Sized,
    R: OnlineRule,
    F: Fn(usize) -> Rank,
{
    if v0 >= g.node_count() {
        return Err(LcaError::OutOfUniverse {
            id: v0 as u64,
            universe: g.node_count() as u64,
        });
    }
    let mut ev = LocalEvaluator::new(g, rule, rank, cap);
    let out = ev.eval(v0)?;
    Ok((out, ev.into_trace()))
}

/// Runs the rule over every item in ascending rank order.
pub fn eval_global<G, R, F>(g: &G, rule: R, rank: F) -> EvalTrace<R::Output>
where
    G: NeighborOracle + ?Sized,
    R: OnlineRule,
    F: Fn(usize) -> Rank,
{
    let n = g.node_count();
    let ranks: Vec<Rank> = (0..n).map(&rank).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by_key(|&v| ranks[v]);
    let mut outputs: Vec<Option<R::Output>> = vec![None; n];
    let mut buf = Vec::new();
    let mut probes = 0;
    for &v in &order {
        probes += 1;
        g.neighbors_into(v, &mut buf);
        let mut earlier: Vec<usize> = buf.iter().copied().filter(|&w| ranks[w] < ranks[v]).collect();
        earlier.sort_unstable_by_key(|&w| ranks[w]);
        let args: Vec<(usize, R::Output)> = earlier
            .into_iter()
            .map(|w| (w, outputs[w].clone().expect("earlier item evaluated")))
            .collect();
        outputs[v] = Some(rule.evaluate(v, &args));
    }
    EvalTrace {
        outputs: outputs
            .into_iter()
            .enumerate()
            .map(|(v, o)| (v, o.expect("all evaluated")))
            .collect(),
        evaluation_order: order,
        probes,
    }
}

/// [`eval_local`] on a vertex graph with ranks from `(seed, kind)`.
pub fn eval_local_seeded<R: OnlineRule>(
    g: &LocalGraph,
    v0: usize,
    rule: R,
    seed: &Seed,
    kind: OrderingKind,
    cap: usize,
) -> Result<(R::Output, EvalTrace<R::Output>)> {
    let ranks = RankOracle::new(seed, kind, g.n() as u64)?;
    eval_local(g, v0, rule, |v| ranks.rank_unchecked(v as u64), cap)
}

/// [`eval_global`] on a vertex graph with ranks from `(seed, kind)`.
pub fn eval_global_seeded<R: OnlineRule>(
    g: &LocalGraph,
    rule: R,
    seed: &Seed,
    kind: OrderingKind,
) -> Result<EvalTrace<R::Output>> {
    let ranks = RankOracle::new(seed, kind, g.n() as u64)?;
    Ok(eval_global(g, rule, |v| ranks.rank_unchecked(v as u64)))
}

/// Greedy matching over the line graph: an edge joins unless an earlier
/// adjacent edge already did.
#[derive(Clone, Copy, Debug, Default)]
pub struct GreedyMatching;

impl OnlineRule for GreedyMatching {
    type Output = bool;

    fn evaluate(&self, _v: usize, earlier: &[(usize, bool)]) -> bool {
        !earlier.iter().any(|&(_, matched)| matched)
    }
}

/// Greedy maximal independent set: a vertex joins unless an earlier
/// neighbor did.
#[derive(Clone, Copy, Debug, Default)]
pub struct GreedyIndependentSet;

impl OnlineRule for GreedyIndependentSet {
    type Output = bool;

    fn evaluate(&self, _v: usize, earlier: &[(usize, bool)]) -> bool {
        !earlier.iter().any(|&(_, inside)| inside)
    }
}

/// Length of the longest decreasing-rank chain ending at the item.
#[derive(Clone, Copy, Debug, Default)]
pub struct MaxChain;

impl OnlineRule for MaxChain {
    type Output = u32;

    fn evaluate(&self, _v: usize, earlier: &[(usize, u32)]) -> u32 {
        earlier.iter().map(|&(_, c)| c + 1).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixed(values: &'static [u64]) -> impl Fn(usize) -> Rank {
        move |v| Rank {
            value: values[v],
            owner: v as u64,
        }
    }

    struct OwnParity<'a>(&'a RankOracle);

    impl OnlineRule for OwnParity<'_> {
        type Output = u64;
        fn evaluate(&self, v: usize, _earlier: &[(usize, u64)]) -> u64 {
            self.0.rank_unchecked(v as u64).value & 1
        }
    }

    #[test]
    fn rule_without_dependencies() {
        let g = LocalGraph::empty(4);
        let ranks = RankOracle::new(&Seed::from_u64(1), OrderingKind::FullPseudorandom, 4).unwrap();
        let (out, trace) = eval_local(&g, 2, OwnParity(&ranks), |v| ranks.rank_unchecked(v as u64), 10).unwrap();
        assert_eq!(out, ranks.rank_of(2).unwrap().value & 1);
        assert_eq!(trace.evaluation_order, vec![2]);
    }

    #[test]
    fn max_chain_on_two_vertices() {
        let g = LocalGraph::path(2);
        let rank = fixed(&[20, 10]);
        assert_eq!(eval_local(&g, 0, MaxChain, &rank, 10).unwrap().0, 1);
        assert_eq!(eval_local(&g, 1, MaxChain, &rank, 10).unwrap().0, 0);
    }

    #[test]
    fn isolated_vertices_evaluate_independently() {
        let g = LocalGraph::empty(3);
        let trace = eval_global(&g, MaxChain, fixed(&[3, 1, 2]));
        assert_eq!(trace.evaluation_order, vec![1, 2, 0]);
        assert!(trace.outputs.values().all(|&c| c == 0));
    }

    #[test]
    fn truncation_is_an_error_with_statistics() {
        let g = LocalGraph::path(5);
        let err = eval_local(&g, 0, MaxChain, fixed(&[5, 4, 3, 2, 1]), 2).unwrap_err();
        assert!(matches!(err, LcaError::Truncated { root: 0, cap: 2, members: 3, .. }));
    }

    #[test]
    fn evaluator_memo_is_reused() {
        let g = LocalGraph::path(4);
        let rank = fixed(&[40, 30, 20, 10]);
        let mut ev = LocalEvaluator::new(&g, MaxChain, &rank, 100);
        assert_eq!(ev.eval(1).unwrap(), 2);
        let before = ev.evaluated();
        assert_eq!(ev.eval(0).unwrap(), 3);
        assert_eq!(ev.evaluated(), before + 1);
    }

    #[test]
    fn local_matches_global_on_random_graph() {
        let g = crate::graph::gen_bounded_degree(&Seed::from_u64(7), 200, 4).unwrap();
        let seed = Seed::from_u64(8);
        let global = eval_global_seeded(&g, MaxChain, &seed, OrderingKind::FullPseudorandom).unwrap();
        for v in 0..g.n() {
            let (out, _) = eval_local_seeded(&g, v, MaxChain, &seed, OrderingKind::FullPseudorandom, 10_000).unwrap();
            assert_eq!(out, global.outputs[&v]);
        }
    }
}
