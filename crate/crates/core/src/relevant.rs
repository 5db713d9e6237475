//! Rank-dependency closures ("query trees") and their idealized models.
//!
//! [`explore`] walks the real graph: starting at the root, a neighbor `w` of a
//! member `p` joins when `rank(w) < rank(p)`. A vertex joins at most once, so
//! the result is the set of vertices reachable along strictly decreasing rank
//! chains. [`sample_gw_tree`] and [`sample_dary_query_tree`] simulate the
//! tree-shaped processes that upper-bound that closure.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LcaError, Result};
use crate::graph::{gen_binomial, gen_bounded_degree, BipartiteChoices, LocalGraph, NeighborOracle};
use crate::rank::{OrderingKind, Rank, RankOracle, Seed};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelevantSet {
    pub root: usize,
    /// Ascending by rank; the root is the last element.
    pub members: Vec<(usize, Rank)>,
    /// Neighbor-oracle calls made.
    pub probes: u64,
    pub truncated: bool,
}

impl RelevantSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.iter().any(|&(w, _)| w == v)
    }

    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().map(|&(v, _)| v)
    }
}

/// Closure of `root` under decreasing-rank adjacency over any neighbor oracle.
///
/// Members for which `expand` returns false are kept but not explored further.
/// Truncation happens as soon as the member count exceeds `cap`.
pub fn explore_with<G, R, E>(g: &G, root: usize, rank: R, cap: usize, expand: E) -> RelevantSet
where
    G: NeighborOracle + ?Sized,
    R: Fn(usize) -> Rank,
    E: Fn(usize) -> bool,
{
    let root_rank = rank(root);
    let mut members: HashMap<usize, Rank> = HashMap::new();
    members.insert(root, root_rank);
    let mut queue = VecDeque::from([(root, root_rank)]);
    let mut probes = 0u64;
    let mut truncated = members.len() > cap;
    let mut buf = Vec::new();
    'bfs: while let Some((p, rp)) = queue.pop_front() {
        if truncated {
            break;
        }
        if !expand(p) {
            continue;
        }
        probes += 1;
        g.neighbors_into(p, &mut buf);
        for &w in &buf {
            if members.contains_key(&w) {
                continue;
            }
            let rw = rank(w);
            if rw < rp {
                members.insert(w, rw);
                if members.len() > cap {
                    truncated = true;
                    break 'bfs;
                }
                queue.push_back((w, rw));
            }
        }
    }
    let mut members: Vec<(usize, Rank)> = members.into_iter().collect();
    members.sort_unstable_by_key(|&(_, r)| r);
    RelevantSet {
        root,
        members,
        probes,
        truncated,
    }
}

/// Relevant set of `root` in `g` under the ordering given by `(seed, kind)`.
pub fn explore(
    g: &LocalGraph,
    root: usize,
    seed: &Seed,
    kind: OrderingKind,
    cap: usize,
) -> Result<RelevantSet> {
    if root >= g.n() {
        return Err(LcaError::OutOfUniverse {
            id: root as u64,
            universe: g.n() as u64,
        });
    }
    let ranks = RankOracle::new(seed, kind, g.n() as u64)?;
    Ok(explore_with(g, root, |v| ranks.rank_unchecked(v as u64), cap, |_| true))
}

/// Ball-side closure in a choice graph: from a member ball, every other ball
/// sharing one of its bins and ranked below it joins. Bins are only carriers.
pub fn explore_bipartite_with<R>(bc: &BipartiteChoices, root_ball: usize, rank: R, cap: usize) -> RelevantSet
where
    R: Fn(usize) -> Rank,
{
    let root_rank = rank(root_ball);
    let mut members: HashMap<usize, Rank> = HashMap::new();
    members.insert(root_ball, root_rank);
    let mut queue = VecDeque::from([(root_ball, root_rank)]);
    let mut probes = 0u64;
    let mut truncated = members.len() > cap;
    let mut bins_seen: Vec<usize> = Vec::with_capacity(bc.d());
    'bfs: while let Some((ball, r_ball)) = queue.pop_front() {
        if truncated {
            break;
        }
        probes += 1;
        bins_seen.clear();
        for &bin in bc.choices(ball) {
            if bins_seen.contains(&bin) {
                continue;
            }
            bins_seen.push(bin);
            probes += 1;
            for &other in bc.balls_of(bin) {
                if members.contains_key(&other) {
                    continue;
                }
                let r = rank(other);
                if r < r_ball {
                    members.insert(other, r);
                    if members.len() > cap {
                        truncated = true;
                        break 'bfs;
                    }
                    queue.push_back((other, r));
                }
            }
        }
    }
    let mut members: Vec<(usize, Rank)> = members.into_iter().collect();
    members.sort_unstable_by_key(|&(_, r)| r);
    RelevantSet {
        root: root_ball,
        members,
        probes,
        truncated,
    }
}

pub fn explore_bipartite(
    bc: &BipartiteChoices,
    root_ball: usize,
    seed: &Seed,
    kind: OrderingKind,
    cap: usize,
) -> Result<RelevantSet> {
    if root_ball >= bc.n_balls() {
        return Err(LcaError::OutOfUniverse {
            id: root_ball as u64,
            universe: bc.n_balls() as u64,
        });
    }
    let ranks = RankOracle::new(seed, kind, bc.n_balls() as u64)?;
    Ok(explore_bipartite_with(bc, root_ball, |b| ranks.rank_unchecked(b as u64), cap))
}

/// Offspring law of a Galton-Watson process.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum Offspring {
    /// `d` child slots, each surviving with probability `1/l`.
    Regular { d: u64, l: f64 },
    /// `Binomial(n, q)` children.
    Binomial { n: u64, q: f64 },
}

impl Offspring {
    pub fn mean(&self) -> f64 {
        match *self {
            Offspring::Regular { d, l } => d as f64 / l,
            Offspring::Binomial { n, q } => n as f64 * q,
        }
    }

    fn slots_and_prob(&self) -> Result<(u64, f64)> {
        let (slots, p) = match *self {
            Offspring::Regular { d, l } => (d, if l > 0.0 { 1.0 / l } else { f64::NAN }),
            Offspring::Binomial { n, q } => (n, q),
        };
        if !(0.0..=1.0).contains(&p) {
            return Err(LcaError::invalid(format!("offspring probability {p} outside [0, 1]")));
        }
        Ok((slots, p))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GwTreeSample {
    pub size: usize,
    pub depth: usize,
    /// Died out before exceeding the cap.
    pub extinct: bool,
}

/// One Galton-Watson tree, generation by generation. The children of a whole
/// generation of `g` nodes are drawn as one `Binomial(g * slots, p)`.
pub fn sample_gw_tree(seed: &Seed, offspring: Offspring, cap: usize) -> Result<GwTreeSample> {
    let (slots, p) = offspring.slots_and_prob()?;
    let mut rng = crate::graph::rng_for(seed, b"gw-tree");
    let (mut size, mut generation, mut depth) = (1usize, 1u64, 0usize);
    while generation > 0 {
        if size > cap {
            return Ok(GwTreeSample {
                size,
                depth,
                extinct: false,
            });
        }
        let next = Binomial::new(generation * slots, p)
            .expect("validated probability")
            .sample(&mut rng);
        if next > 0 {
            depth += 1;
        }
        size += next as usize;
        generation = next;
    }
    Ok(GwTreeSample {
        size,
        depth,
        extinct: size <= cap,
    })
}

/// The query tree on an infinite d-ary tree with i.i.d. uniform ranks: a
/// child joins when its rank is below its parent's.
pub fn sample_dary_query_tree(seed: &Seed, d: u64, cap: usize) -> GwTreeSample {
    let mut rng = crate::graph::rng_for(seed, b"dary-query-tree");
    let mut stack: Vec<(f64, usize)> = vec![(rng.random::<f64>(), 0)];
    let (mut size, mut depth) = (1usize, 0usize);
    while let Some((r, level)) = stack.pop() {
        for _ in 0..d {
            let child: f64 = rng.random();
            if child < r {
                size += 1;
                depth = depth.max(level + 1);
                if size > cap {
                    return GwTreeSample {
                        size,
                        depth,
                        extinct: false,
                    };
                }
                stack.push((child, level + 1));
            }
        }
    }
    GwTreeSample {
        size,
        depth,
        extinct: true,
    }
}

/// Size distribution summary. `tail` holds `(s, Pr[size >= s])`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeStats {
    pub trials: u64,
    pub mean: f64,
    pub max: usize,
    #[serde(with = "pairs")]
    pub histogram: BTreeMap<usize, u64>,
    pub tail: Vec<(usize, f64)>,
    pub truncated: u64,
}

mod pairs {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<usize, u64>, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<(usize, u64)> = m.iter().map(|(&k, &c)| (k, c)).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<usize, u64>, D::Error> {
        Ok(Vec::<(usize, u64)>::deserialize(d)?.into_iter().collect())
    }
}

impl TreeStats {
    pub fn from_histogram(histogram: BTreeMap<usize, u64>, truncated: u64, thresholds: &[usize]) -> Self {
        let trials: u64 = histogram.values().sum();
        let total: f64 = histogram.iter().map(|(&s, &c)| s as f64 * c as f64).sum();
        let mean = if trials == 0 { 0.0 } else { total / trials as f64 };
        let max = histogram.keys().next_back().copied().unwrap_or(0);
        let tail = thresholds
            .iter()
            .map(|&t| {
                let hits: u64 = histogram.range(t..).map(|(_, &c)| c).sum();
                (t, if trials == 0 { 0.0 } else { hits as f64 / trials as f64 })
            })
            .collect();
        TreeStats {
            trials,
            mean,
            max,
            histogram,
            tail,
            truncated,
        }
    }

    pub fn from_sizes(sizes: impl IntoIterator<Item = usize>, thresholds: &[usize]) -> Self {
        let mut histogram = BTreeMap::new();
        for s in sizes {
            *histogram.entry(s).or_insert(0) += 1;
        }
        Self::from_histogram(histogram, 0, thresholds)
    }

    /// `Pr[size >= s]` from the histogram.
    pub fn exceedance(&self, s: usize) -> f64 {
        let hits: u64 = self.histogram.range(s..).map(|(_, &c)| c).sum();
        hits as f64 / self.trials.max(1) as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum GraphModel {
    BoundedDegree { n: usize, d: usize },
    Binomial { n: usize, d: f64 },
    Path { n: usize },
}

impl GraphModel {
    pub fn n(&self) -> usize {
        match *self {
            GraphModel::BoundedDegree { n, .. } | GraphModel::Binomial { n, .. } | GraphModel::Path { n } => n,
        }
    }

    pub fn generate(&self, seed: &Seed) -> Result<LocalGraph> {
        match *self {
            GraphModel::BoundedDegree { n, d } => gen_bounded_degree(seed, n, d),
            GraphModel::Binomial { n, d } => gen_binomial(seed, n, d),
            GraphModel::Path { n } => {
                if n == 0 {
                    Err(LcaError::invalid("path needs n >= 1"))
                } else {
                    Ok(LocalGraph::path(n))
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeExperiment {
    pub model: GraphModel,
    pub instances: usize,
    pub queries_per_instance: usize,
    pub cap: usize,
    pub kind: OrderingKind,
    pub thresholds: Vec<usize>,
}

/// Explores `instances * queries_per_instance` relevant sets, each on a fresh
/// rank seed and a uniform root, and summarizes their sizes.
pub fn tree_stats(seed: &Seed, exp: &TreeExperiment) -> Result<TreeStats> {
    if exp.instances == 0 || exp.queries_per_instance == 0 {
        return Err(LcaError::invalid("tree_stats needs at least one trial"));
    }
    let per_instance: Vec<(BTreeMap<usize, u64>, u64)> = (0..exp.instances as u64)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let inst = seed.derive_indexed(b"tree-stats/instance", i);
            let g = exp.model.generate(&inst)?;
            let mut hist = BTreeMap::new();
            let mut truncated = 0;
            for q in 0..exp.queries_per_instance as u64 {
                let query = inst.derive_indexed(b"query", q);
                let root = query.random_in_range(b"root", g.n() as u64)? as usize;
                let set = explore(&g, root, &query, exp.kind, exp.cap)?;
                truncated += set.truncated as u64;
                *hist.entry(set.len()).or_insert(0) += 1;
            }
            Ok((hist, truncated))
        })
        .collect::<Result<_>>()?;
    let mut histogram = BTreeMap::new();
    let mut truncated = 0;
    for (hist, t) in per_instance {
        truncated += t;
        for (s, c) in hist {
            *histogram.entry(s).or_insert(0) += c;
        }
    }
    Ok(TreeStats::from_histogram(histogram, truncated, &exp.thresholds))
}

/// Checks the closure invariant: every non-root member has a member
/// neighbor of strictly greater rank.
pub fn is_sound_closure<G: NeighborOracle + ?Sized>(g: &G, set: &RelevantSet) -> bool {
    let ranks: HashMap<usize, Rank> = set.members.iter().copied().collect();
    let mut buf = Vec::new();
    set.members.iter().all(|&(v, r)| {
        if v == set.root {
            return true;
        }
        g.neighbors_into(v, &mut buf);
        buf.iter().any(|w| ranks.get(w).is_some_and(|rw| *rw > r))
    })
}

/// Every member reached from `set`'s members along decreasing ranks, with
/// the cap ignored; used to check non-truncated sets are complete.
pub fn is_complete_closure<G: NeighborOracle + ?Sized, R: Fn(usize) -> Rank>(
    g: &G,
    set: &RelevantSet,
    rank: R,
) -> bool {
    let ids: HashSet<usize> = set.ids().collect();
    let mut buf = Vec::new();
    set.members.iter().all(|&(v, r)| {
        g.neighbors_into(v, &mut buf);
        buf.iter().all(|&w| rank(w) > r || ids.contains(&w))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixed_ranks(values: &[u64]) -> impl Fn(usize) -> Rank + '_ {
        move |v| Rank {
            value: values[v],
            owner: v as u64,
        }
    }

    #[test]
    fn isolated_root() {
        let g = LocalGraph::empty(3);
        let set = explore(&g, 1, &Seed::from_u64(0), OrderingKind::FullPseudorandom, 10).unwrap();
        assert_eq!(set.ids().collect::<Vec<_>>(), vec![1]);
        assert!(!set.truncated);
    }

    #[test]
    fn single_edge_rule() {
        let g = LocalGraph::from_edges(2, &[(0, 1)]).unwrap();
        let ranks = [9, 4];
        let from_a = explore_with(&g, 0, fixed_ranks(&ranks), 10, |_| true);
        assert_eq!(from_a.ids().collect::<Vec<_>>(), vec![1, 0]);
        let from_b = explore_with(&g, 1, fixed_ranks(&ranks), 10, |_| true);
        assert_eq!(from_b.ids().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn decreasing_path_is_fully_explored() {
        let g = LocalGraph::path(3);
        let set = explore_with(&g, 0, fixed_ranks(&[30, 20, 10]), 10, |_| true);
        assert_eq!(set.len(), 3);
        let set = explore_with(&g, 0, fixed_ranks(&[30, 20, 25]), 10, |_| true);
        assert_eq!(set.len(), 2);
    }

    #[test]
    fn rejected_vertex_can_join_through_another_parent() {
        // 0 - 1, 0 - 2, 2 - 1: from 0 (rank 50), 1 (rank 40) joins;
        // 2 (rank 60) never joins.
        let g = LocalGraph::from_edges(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let set = explore_with(&g, 0, fixed_ranks(&[50, 40, 60]), 10, |_| true);
        assert_eq!(set.ids().collect::<Vec<_>>(), vec![1, 0]);
        // Square 0-1-2-3-0 with 3 < 0 but 3 rejected from 2: still joins via 0.
        let g = LocalGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let set = explore_with(&g, 0, fixed_ranks(&[50, 40, 30, 45]), 10, |_| true);
        assert_eq!(set.len(), 4);
    }

    #[test]
    fn cap_truncates() {
        let g = LocalGraph::path(5);
        let set = explore_with(&g, 0, fixed_ranks(&[5, 4, 3, 2, 1]), 2, |_| true);
        assert!(set.truncated);
        assert_eq!(set.len(), 3);
        let set = explore_with(&g, 0, fixed_ranks(&[5, 4, 3, 2, 1]), 0, |_| true);
        assert!(set.truncated);
        assert_eq!(set.len(), 1);
    }

    #[test]
    fn bipartite_examples() {
        // Ball 0 -> bins {0, 1}, ball 1 -> bins {1, 2}.
        let bc = BipartiteChoices::new(3, 2, vec![vec![0, 1], vec![1, 2]]).unwrap();
        let set = explore_bipartite_with(&bc, 0, fixed_ranks(&[10, 20]), 10);
        assert_eq!(set.ids().collect::<Vec<_>>(), vec![0]);
        let set = explore_bipartite_with(&bc, 0, fixed_ranks(&[20, 10]), 10);
        assert_eq!(set.ids().collect::<Vec<_>>(), vec![1, 0]);
        assert!(explore_bipartite(&bc, 2, &Seed::from_u64(0), OrderingKind::FullPseudorandom, 5).is_err());
    }

    #[test]
    fn gw_zero_probability_is_a_single_node() {
        let s = sample_gw_tree(&Seed::from_u64(1), Offspring::Binomial { n: 10, q: 0.0 }, 100).unwrap();
        assert_eq!(s, GwTreeSample { size: 1, depth: 0, extinct: true });
        assert!(sample_gw_tree(&Seed::from_u64(1), Offspring::Binomial { n: 10, q: 1.5 }, 100).is_err());
    }

    #[test]
    fn gw_supercritical_hits_cap() {
        let s = sample_gw_tree(&Seed::from_u64(2), Offspring::Regular { d: 4, l: 1.0 }, 50).unwrap();
        assert!(!s.extinct);
        assert!(s.size > 50);
    }

    #[test]
    fn regular_gw_mean_progeny() {
        // Subcritical mean total progeny is 1 / (1 - mu) with mu = 3/9.
        let samples = 100_000u64;
        let total: usize = (0..samples)
            .map(|i| {
                sample_gw_tree(&Seed::from_u64(i), Offspring::Regular { d: 3, l: 9.0 }, 10_000)
                    .unwrap()
                    .size
            })
            .sum();
        let mean = total as f64 / samples as f64;
        assert!((mean - 1.5).abs() <= 0.05 * 1.5, "mean {mean}");
    }

    #[test]
    fn dary_query_tree_mean() {
        // E|T| = (e^d - 1) / d: f(r) = 1 + d * int_0^r f gives f = e^{dr}.
        let d = 3u64;
        let samples = 100_000u64;
        let total: usize = (0..samples)
            .map(|i| sample_dary_query_tree(&Seed::from_u64(i), d, 1_000_000).size)
            .sum();
        let mean = total as f64 / samples as f64;
        let expected = ((d as f64).exp() - 1.0) / d as f64;
        assert!((mean - expected).abs() <= 0.03 * expected, "mean {mean} vs {expected}");
    }

    #[test]
    fn stats_of_isolated_vertex() {
        let exp = TreeExperiment {
            model: GraphModel::BoundedDegree { n: 1, d: 3 },
            instances: 1,
            queries_per_instance: 1,
            cap: 10,
            kind: OrderingKind::FullPseudorandom,
            thresholds: vec![1, 2],
        };
        let stats = tree_stats(&Seed::from_u64(0), &exp).unwrap();
        assert_eq!(stats.histogram, BTreeMap::from([(1, 1)]));
        assert_eq!(stats.tail, vec![(1, 1.0), (2, 0.0)]);
        let json = serde_json::to_value(&stats).unwrap();
        assert_eq!(json["histogram"], serde_json::json!([[1, 1]]));
    }
}
