use std::collections::{BTreeSet, HashMap};

use lca_core::balls_bins::{scheme_for, BallsBinsLca, DecisionRule};
use lca_core::coloring::{color_all, verify_coloring, LllLca, LllParams};
use lca_core::graph::{gen_bipartite_choices, gen_hypergraph, LocalGraph};
use lca_core::matching::{full_matching, verify_maximal};
use lca_core::online::{eval_global, eval_local, GreedyIndependentSet, LocalEvaluator, MaxChain};
use lca_core::relevant::{explore_with, is_complete_closure, is_sound_closure};
use lca_core::{OrderingKind, Rank, RankOracle, Seed};
use proptest::prelude::*;

fn graph() -> impl Strategy<Value = LocalGraph> {
    (1usize..24).prop_flat_map(|n| {
        proptest::collection::vec((0..n, 0..n), 0..3 * n).prop_map(move |pairs| {
            let edges: BTreeSet<(usize, usize)> = pairs
                .into_iter()
                .filter(|(u, v)| u != v)
                .map(|(u, v)| (u.min(v), u.max(v)))
                .collect();
            LocalGraph::from_edges(n, &edges.into_iter().collect::<Vec<_>>()).unwrap()
        })
    })
}

fn oracle(seed: u64, n: usize) -> RankOracle {
    RankOracle::new(&Seed::from_u64(seed), OrderingKind::FullPseudorandom, n as u64).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn rank_order_is_total(a in any::<u64>(), b in any::<u64>(), oa in any::<u64>(), ob in any::<u64>()) {
        let x = Rank { value: a, owner: oa };
        let y = Rank { value: b, owner: ob };
        let outcomes = [x < y, x == y, x > y];
        prop_assert_eq!(outcomes.iter().filter(|&&o| o).count(), 1);
        prop_assert_eq!(x == y, a == b && oa == ob);
    }

    #[test]
    fn distinct_ids_get_distinct_ranks(seed in any::<u64>(), ids in proptest::collection::btree_set(0u64..1 << 40, 2..40)) {
        let r = RankOracle::new(&Seed::from_u64(seed), OrderingKind::FullPseudorandom, 1 << 40).unwrap();
        let ranks: BTreeSet<Rank> = ids.iter().map(|&i| r.rank_of(i).unwrap()).collect();
        prop_assert_eq!(ranks.len(), ids.len());
    }

    #[test]
    fn relevant_sets_are_sound_and_complete(g in graph(), seed in any::<u64>(), root_pick in any::<usize>()) {
        let r = oracle(seed, g.n());
        let rank = |v: usize| r.rank_unchecked(v as u64);
        let set = explore_with(&g, root_pick % g.n(), rank, usize::MAX, |_| true);
        prop_assert!(!set.truncated);
        prop_assert!(is_sound_closure(&g, &set));
        prop_assert!(is_complete_closure(&g, &set, rank));
    }

    #[test]
    fn larger_caps_never_truncate_more(g in graph(), seed in any::<u64>(), root_pick in any::<usize>(), c1 in 0usize..30, extra in 0usize..30) {
        let r = oracle(seed, g.n());
        let rank = |v: usize| r.rank_unchecked(v as u64);
        let root = root_pick % g.n();
        let small = explore_with(&g, root, rank, c1, |_| true);
        let large = explore_with(&g, root, rank, c1 + extra, |_| true);
        prop_assert!(!small.truncated || small.len() > c1);
        if large.truncated {
            prop_assert!(small.truncated);
        }
        if !small.truncated {
            prop_assert_eq!(small.members, large.members);
        }
    }

    #[test]
    fn local_rules_match_global(g in graph(), seed in any::<u64>()) {
        let r = oracle(seed, g.n());
        let rank = |v: usize| r.rank_unchecked(v as u64);
        let chain = eval_global(&g, MaxChain, rank);
        let mis = eval_global(&g, GreedyIndependentSet, rank);
        for v in 0..g.n() {
            prop_assert_eq!(eval_local(&g, v, MaxChain, rank, usize::MAX).unwrap().0, chain.outputs[&v]);
            prop_assert_eq!(eval_local(&g, v, GreedyIndependentSet, rank, usize::MAX).unwrap().0, mis.outputs[&v]);
        }
    }

    #[test]
    fn shared_evaluator_is_order_independent(g in graph(), seed in any::<u64>(), order in any::<u64>()) {
        let r = oracle(seed, g.n());
        let rank = |v: usize| r.rank_unchecked(v as u64);
        let mut ids: Vec<usize> = (0..g.n()).collect();
        // Rotate by a random offset and reverse half the time.
        ids.rotate_left(order as usize % g.n());
        if order & 1 == 1 {
            ids.reverse();
        }
        let mut shared = LocalEvaluator::new(&g, MaxChain, rank, usize::MAX);
        let got: HashMap<usize, u32> = ids.iter().map(|&v| (v, shared.eval(v).unwrap())).collect();
        for v in 0..g.n() {
            prop_assert_eq!(got[&v], eval_local(&g, v, MaxChain, rank, usize::MAX).unwrap().0);
        }
    }

    #[test]
    fn local_matching_is_maximal(g in graph(), seed in any::<u64>()) {
        let m = full_matching(&g, &Seed::from_u64(seed), OrderingKind::FullPseudorandom, usize::MAX).unwrap();
        prop_assert!(verify_maximal(&g, &m));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn balls_local_matches_global(seed in any::<u64>(), n in 1usize..400, m in 1usize..100, d in 1usize..4) {
        let d = d.min(m);
        let s = Seed::from_u64(seed);
        for rule in [DecisionRule::LeastLoaded, DecisionRule::CapacityWeighted] {
            let bc = gen_bipartite_choices(&s, n, m, d, &scheme_for(rule, None, n, m)).unwrap();
            let lca = BallsBinsLca::new(&bc, rule, &s.derive(b"r"), OrderingKind::FullPseudorandom, usize::MAX).unwrap();
            let (local, lp) = lca.assign_all().unwrap();
            let (global, gp) = lca.run_global();
            prop_assert_eq!(local.iter().map(|a| a.bin).collect::<Vec<_>>(), global.iter().map(|a| a.bin).collect::<Vec<_>>());
            prop_assert_eq!(lp.total(), n as u64);
            prop_assert_eq!(lp, gp);
        }
    }

    #[test]
    fn lenient_coloring_is_valid_and_consistent(seed in any::<u64>()) {
        let s = Seed::from_u64(seed);
        let h = gen_hypergraph(&s, 360, 40, 12, 1).unwrap();
        let params = LllParams::lenient();
        match color_all(&h, &s.derive(b"c"), &params) {
            Ok(sol) => {
                prop_assert!(verify_coloring(&h, &sol.colors()));
                let lca = LllLca::new(&h, &s.derive(b"c"), &params).unwrap();
                for x in (0..h.m()).step_by(37) {
                    prop_assert_eq!(lca.query(x).unwrap().value, sol.values[x]);
                }
            }
            Err(e) => prop_assert!(e.is_algorithm_failure()),
        }
    }
}
