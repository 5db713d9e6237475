//! Measures the quantities the default caps and acceptance thresholds are
//! frozen from. Run with `cargo run --release -p lca-core --example calibrate`.

use std::collections::BTreeMap;

use lca_core::balls_bins::{scheme_for, DecisionRule};
use lca_core::coloring::{LllLca, LllParams};
use lca_core::graph::{gen_bipartite_choices, gen_bounded_degree, gen_hypergraph, LineGraph};
use lca_core::relevant::{explore_bipartite_with, explore_with, tree_stats, GraphModel, TreeExperiment};
use lca_core::{OrderingKind, RankOracle, Seed};

fn quantiles(mut xs: Vec<usize>) -> String {
    xs.sort_unstable();
    let q = |p: f64| xs[((xs.len() - 1) as f64 * p) as usize];
    format!(
        "n={} mean={:.2} p99={} p999={} max={}",
        xs.len(),
        xs.iter().sum::<usize>() as f64 / xs.len() as f64,
        q(0.99),
        q(0.999),
        xs[xs.len() - 1]
    )
}

fn main() {
    let root = Seed::from_u64(0xca11b);

    // Matching: relevant edge sets at n = 1000, d = 5.
    let mut sizes = Vec::new();
    for t in 0..20u64 {
        let g = gen_bounded_degree(&root.derive_indexed(b"m/g", t), 1000, 5).unwrap();
        let n = g.n() as u64;
        let ranks = RankOracle::new(&root.derive_indexed(b"m/r", t), OrderingKind::FullPseudorandom, n * n).unwrap();
        let lg = LineGraph::new(&g);
        for i in 0..g.edge_count() {
            let set = explore_with(&lg, i, |e| {
                let (a, b) = g.edge_endpoints(e).unwrap();
                ranks.rank_unchecked(a as u64 * n + b as u64)
            }, usize::MAX, |_| true);
            
            sizes.push(set.len());
        }
    }
    println!("matching edges/query: {} (log2 n = {:.2})", quantiles(sizes), 1000f64.log2());

    // Balls into bins: relevant ball sets at n = m = 10^4, d = 2.
    for rule in [DecisionRule::LeastLoaded, DecisionRule::AlwaysGoLeft, DecisionRule::CapacityWeighted] {
        let mut sizes = Vec::new();
        for t in 0..5u64 {
            let bc = gen_bipartite_choices(&root.derive_indexed(b"b/g", t), 10_000, 10_000, 2, &scheme_for(rule, None, 10_000, 10_000)).unwrap();
            let ranks = RankOracle::new(&root.derive_indexed(b"b/r", t), OrderingKind::FullPseudorandom, 10_000).unwrap();
            for b in 0..10_000 {
                sizes.push(explore_bipartite_with(&bc, b, |x| ranks.rank_unchecked(x as u64), usize::MAX).len());
            }
        }
        println!("{} balls/query: {} (log2 m = {:.2})", rule.name(), quantiles(sizes), 10_000f64.log2());
    }

    // Tree stats sweep.
    for model in ["bounded", "binomial"] {
        for e in [10u32, 12, 14, 16] {
            let n = 1usize << e;
            let m = if model == "bounded" {
                GraphModel::BoundedDegree { n, d: 5 }
            } else {
                GraphModel::Binomial { n, d: 5.0 }
            };
            let s = tree_stats(
                &root.derive_indexed(b"t", e as u64),
                &TreeExperiment {
                    model: m,
                    instances: 10,
                    queries_per_instance: 1000,
                    cap: usize::MAX,
                    kind: OrderingKind::FullPseudorandom,
                    thresholds: vec![],
                },
            )
            .unwrap();
            println!("tree {model} n=2^{e}: mean={:.2} max={} max/log2n={:.2}", s.mean, s.max, s.max as f64 / e as f64);
        }
    }

    // Coloring probes per query over a small sweep.
    for n in [40usize, 80, 160] {
        let mut probes = Vec::new();
        let mut failures = 0;
        let mut phases = BTreeMap::new();
        for t in 0..20u64 {
            let h = gen_hypergraph(&root.derive_indexed(b"c/g", t), 20 * n, n, 40, 2).unwrap();
            let lca = LllLca::new(&h, &root.derive_indexed(b"c/r", t), &LllParams::default()).unwrap();
            match lca.solve_all() {
                Ok(sol) => {
                    for p in sol.phases {
                        *phases.entry(p).or_insert(0) += 1;
                    }
                }
                Err(_) => failures += 1,
            }
            for x in (0..20 * n).step_by(n / 4) {
                if let Ok(a) = lca.query(x) {
                    probes.push(a.probes as usize);
                }
            }
        }
        let l4 = (n as f64).log2().powi(4);
        let max = *probes.iter().max().unwrap();
        println!(
            "coloring n={n}: failures={failures}/20 phases={phases:?} probes {} max/log4n={:.3}",
            quantiles(probes),
            max as f64 / l4
        );
    }
}
