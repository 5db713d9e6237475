use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::hyper::{CnfFormula, Hypergraph, Literal};
use super::LocalGraph;
use crate::error::{LcaError, Result};
use crate::rank::Seed;

const HYPERGRAPH_ATTEMPTS: u64 = 16;

pub(crate) fn rng_for(seed: &Seed, label: &[u8]) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(seed.stream_seed(label))
}

fn adjacency_from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> LocalGraph {
    let mut adj = vec![Vec::new(); n];
    for (u, v) in pairs {
        adj[u].push(v);
        adj[v].push(u);
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    LocalGraph::from_sorted_adjacency(adj)
}

/// Random graph with maximum degree at most `d`: every vertex gets `d`
/// stubs, the stubs are shuffled and paired, and self-loops or repeated
/// pairs are dropped.
pub fn gen_bounded_degree(seed: &Seed, n: usize, d: usize) -> Result<LocalGraph> {
    if n == 0 || d == 0 {
        return Err(LcaError::invalid("bounded-degree generator needs n >= 1 and d >= 1"));
    }
    let mut rng = rng_for(seed, b"gen/bounded-degree");
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
    stubs.shuffle(&mut rng);
    let mut seen = HashSet::with_capacity(stubs.len() / 2);
    let pairs: Vec<(usize, usize)> = stubs
        .chunks_exact(2)
        .filter_map(|p| {
            let (u, v) = (p[0].min(p[1]), p[0].max(p[1]));
            (u != v && seen.insert((u, v))).then_some((u, v))
        })
        .collect();
    Ok(adjacency_from_pairs(n, pairs))
}

/// `G(n, d/n)`: each pair present independently with probability `d/n`.
/// Uses geometric skipping, so the cost is linear in the edge count.
pub fn gen_binomial(seed: &Seed, n: usize, d: f64) -> Result<LocalGraph> {
    if n < 2 {
        return Err(LcaError::invalid("binomial generator needs n >= 2"));
    }
    if !(d > 0.0 && d < n as f64) {
        return Err(LcaError::invalid(format!(
            "binomial generator needs 0 < d < n (d = {d}, n = {n})"
        )));
    }
    let p = d / n as f64;
    let mut rng = rng_for(seed, b"gen/binomial");
    let log_q = (1.0 - p).ln();
    let mut pairs = Vec::new();
    let (mut v, mut w): (usize, i64) = (1, -1);
    while v < n {
        let r: f64 = rng.random();
        w += 1 + ((1.0 - r).ln() / log_q).floor() as i64;
        while w >= v as i64 && v < n {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            pairs.push((w as usize, v));
        }
    }
    Ok(adjacency_from_pairs(n, pairs))
}

/// Dependency skeleton on `n` nodes with maximum degree `d`: random cycles
/// of length 3..=12 when `d >= 2` (a perfect-ish matching when `d == 1`),
/// plus random extra pairs on the remaining degree budget.
fn dependency_skeleton(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut pairs = Vec::new();
    if d == 1 {
        pairs.extend(order.chunks_exact(2).map(|p| (p[0], p[1])));
    } else if d >= 2 {
        let mut rest = &order[..];
        while !rest.is_empty() {
            let r = rest.len();
            let mut len = if r < 3 { r } else { rng.random_range(3..=12.min(r)) };
            if r - len < 3 {
                len = r;
            }
            let (cycle, tail) = rest.split_at(len);
            match len {
                1 => {}
                2 => pairs.push((cycle[0], cycle[1])),
                _ => {
                    for i in 0..len {
                        pairs.push((cycle[i], cycle[(i + 1) % len]));
                    }
                }
            }
            rest = tail;
        }
    }
    let mut seen: HashSet<(usize, usize)> =
        pairs.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    if d > 2 {
        let mut degree = vec![0usize; n];
        for &(a, b) in &pairs {
            degree[a] += 1;
            degree[b] += 1;
        }
        let mut stubs: Vec<usize> = (0..n)
            .flat_map(|v| std::iter::repeat(v).take(d - degree[v]))
            .collect();
        stubs.shuffle(rng);
        for p in stubs.chunks_exact(2) {
            let (a, b) = (p[0].min(p[1]), p[0].max(p[1]));
            if a != b && seen.insert((a, b)) {
                pairs.push((a, b));
            }
        }
    }
    pairs
}

/// Random k-uniform hypergraph on `m` vertices with `n` edges in which every
/// edge intersects at most `d` others.
///
/// Edges are laid out along a random dependency skeleton of maximum degree
/// `d`. Each skeleton pair shares a block of `t` vertices; the rest of every
/// edge is private. `t` is the smallest overlap that fits all incidences
/// into `m` vertices; leftover vertices stay isolated. Vertex ids are
/// shuffled at the end.
pub fn gen_hypergraph(seed: &Seed, m: usize, n: usize, k: usize, d: usize) -> Result<Hypergraph> {
    let (_, edges) = hypergraph_layout(seed, m, n, k, d)?;
    Hypergraph::new(m, edges)
}

/// Same layout as [`gen_hypergraph`] with uniformly random literal signs.
pub fn gen_cnf(seed: &Seed, m: usize, n: usize, k: usize, d: usize) -> Result<CnfFormula> {
    let (mut rng, edges) = hypergraph_layout(seed, m, n, k, d)?;
    let clauses = edges
        .into_iter()
        .map(|vars| {
            vars.into_iter()
                .map(|var| Literal {
                    var,
                    positive: rng.random(),
                })
                .collect()
        })
        .collect();
    CnfFormula::new(m, clauses)
}

fn hypergraph_layout(
    seed: &Seed,
    m: usize,
    n: usize,
    k: usize,
    d: usize,
) -> Result<(ChaCha8Rng, Vec<Vec<usize>>)> {
    if k < 2 {
        return Err(LcaError::invalid("hypergraph generator needs k >= 2"));
    }
    let mut last = String::new();
    for attempt in 0..HYPERGRAPH_ATTEMPTS {
        let mut rng = rng_for(&seed.derive_indexed(b"gen/hypergraph", attempt), b"layout");
        match try_layout(&mut rng, m, n, k, d) {
            Ok(edges) => return Ok((rng, edges)),
            Err(msg) => last = msg,
        }
    }
    Err(LcaError::Generation(format!(
        "no layout for m={m} n={n} k={k} d={d} after {HYPERGRAPH_ATTEMPTS} attempts: {last}"
    )))
}

fn try_layout(
    rng: &mut ChaCha8Rng,
    m: usize,
    n: usize,
    k: usize,
    d: usize,
) -> std::result::Result<Vec<Vec<usize>>, String> {
    let skeleton = dependency_skeleton(rng, n, d);
    let mut degree = vec![0usize; n];
    for &(a, b) in &skeleton {
        degree[a] += 1;
        degree[b] += 1;
    }
    let incidences = n * k;
    let shortfall = incidences.saturating_sub(m);
    let overlap = if skeleton.is_empty() {
        0
    } else {
        shortfall.div_ceil(skeleton.len()).max(1)
    };
    let max_degree = degree.iter().copied().max().unwrap_or(0);
    if max_degree > 0 && overlap * max_degree > k {
        return Err(format!(
            "need overlap {overlap} per dependency but only {} fits",
            k / max_degree
        ));
    }
    let used = incidences - overlap * skeleton.len();
    if used > m {
        return Err(format!("{used} vertices needed, only {m} available"));
    }

    let mut edges: Vec<Vec<usize>> = vec![Vec::with_capacity(k); n];
    let mut next = 0usize;
    for &(a, b) in &skeleton {
        for _ in 0..overlap {
            edges[a].push(next);
            edges[b].push(next);
            next += 1;
        }
    }
    for e in &mut edges {
        while e.len() < k {
            e.push(next);
            next += 1;
        }
    }
    debug_assert_eq!(next, used);
    let mut relabel: Vec<usize> = (0..m).collect();
    relabel.shuffle(rng);
    for e in &mut edges {
        for v in e.iter_mut() {
            *v = relabel[*v];
        }
        e.sort_unstable();
    }
    Ok(edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::hyper::Incidence;

    #[test]
    fn bounded_degree_basics() {
        let g = gen_bounded_degree(&Seed::from_u64(1), 1, 3).unwrap();
        assert_eq!(g.n(), 1);
        assert_eq!(g.edge_count(), 0);
        assert!(gen_bounded_degree(&Seed::from_u64(1), 0, 3).is_err());
        let g = gen_bounded_degree(&Seed::from_u64(2), 500, 4).unwrap();
        assert!(g.max_degree() <= 4);
    }

    #[test]
    fn bounded_degree_mean_degree() {
        let g = gen_bounded_degree(&Seed::from_u64(3), 10_000, 5).unwrap();
        let mean = g.mean_degree();
        assert!((2.5..=5.0).contains(&mean), "mean degree {mean}");
    }

    #[test]
    fn binomial_rejects_bad_density() {
        assert!(gen_binomial(&Seed::from_u64(0), 10, 10.0).is_err());
        assert!(gen_binomial(&Seed::from_u64(0), 10, 0.0).is_err());
        assert!(gen_binomial(&Seed::from_u64(0), 1, 0.5).is_err());
    }

    #[test]
    fn binomial_degree_moments() {
        let n = 10_000;
        let d = 3.0;
        let g = gen_binomial(&Seed::from_u64(4), n, d).unwrap();
        let degrees: Vec<f64> = (0..n).map(|v| g.degree(v) as f64).collect();
        let mean = degrees.iter().sum::<f64>() / n as f64;
        let var = degrees.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - d).abs() <= 0.05 * d, "mean {mean}");
        let expected_var = d * (1.0 - d / n as f64);
        assert!((var - expected_var).abs() <= 0.10 * expected_var, "var {var}");
    }

    #[test]
    fn hypergraph_single_edge() {
        let h = gen_hypergraph(&Seed::from_u64(5), 10, 1, 4, 2).unwrap();
        assert_eq!(h.n(), 1);
        assert_eq!(h.max_dependency_degree(), 0);
    }

    #[test]
    fn hypergraph_respects_dependency_bound() {
        for (m, n, k, d) in [(2000, 200, 20, 2), (800, 40, 40, 2), (300, 50, 10, 3), (100, 20, 6, 1)] {
            let h = gen_hypergraph(&Seed::from_u64(6), m, n, k, d).unwrap();
            assert_eq!(h.n(), n);
            assert_eq!(h.k(), k);
            assert!(h.max_dependency_degree() <= d, "({m},{n},{k},{d})");
        }
    }

    #[test]
    fn hypergraph_infeasible_reports_diagnostic() {
        let err = gen_hypergraph(&Seed::from_u64(7), 10, 40, 40, 2).unwrap_err();
        assert!(matches!(err, LcaError::Generation(_)), "{err:?}");
        assert!(gen_hypergraph(&Seed::from_u64(7), 10, 4, 1, 2).is_err());
    }

    #[test]
    fn cnf_shares_hypergraph_layout() {
        let f = gen_cnf(&Seed::from_u64(8), 800, 40, 40, 2).unwrap();
        let h = gen_hypergraph(&Seed::from_u64(8), 800, 40, 40, 2).unwrap();
        assert_eq!(f.n(), 40);
        assert!(f.max_dependency_degree() <= 2);
        for c in 0..f.n() {
            assert_eq!(f.constraint_vars(c), h.constraint_vars(c));
        }
    }
}
