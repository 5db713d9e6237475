use lca_core::graph::format::{
    parse_bipartite, parse_capacities, parse_dimacs, parse_graph, parse_hypergraph, write_bipartite, write_dimacs,
    write_graph, write_hypergraph,
};
use lca_core::graph::{gen_bipartite_choices, gen_bounded_degree, gen_cnf, gen_hypergraph, ChoiceScheme};
use lca_core::harness::{run, Experiment, ExperimentSpec, RunReport};
use lca_core::Seed;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn graph_text_roundtrip(seed in any::<u64>(), n in 1usize..200, d in 1usize..6) {
        let g = gen_bounded_degree(&Seed::from_u64(seed), n, d).unwrap();
        let back = parse_graph(&write_graph(&g)).unwrap();
        prop_assert_eq!(back.n(), g.n());
        prop_assert_eq!(back.edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());
    }

    #[test]
    fn hypergraph_and_dimacs_roundtrip(seed in any::<u64>()) {
        let s = Seed::from_u64(seed);
        let h = gen_hypergraph(&s, 200, 12, 10, 2).unwrap();
        prop_assert_eq!(parse_hypergraph(&write_hypergraph(&h)).unwrap(), h);
        let f = gen_cnf(&s, 200, 12, 10, 2).unwrap();
        prop_assert_eq!(parse_dimacs(&write_dimacs(&f)).unwrap(), f);
    }

    #[test]
    fn bipartite_roundtrip(seed in any::<u64>(), n in 1usize..300, m in 1usize..60, d in 1usize..4) {
        let bc = gen_bipartite_choices(&Seed::from_u64(seed), n, m, d.min(m), &ChoiceScheme::Uniform).unwrap();
        let back = parse_bipartite(&write_bipartite(&bc)).unwrap();
        prop_assert_eq!(back.n_balls(), bc.n_balls());
        for b in 0..n {
            prop_assert_eq!(back.choices(b), bc.choices(b));
        }
    }

    #[test]
    fn capacities_parse(caps in proptest::collection::vec(0u64..1000, 1..50)) {
        let text: String = caps.iter().map(|c| format!("{c}\n")).collect();
        prop_assert_eq!(parse_capacities(&text).unwrap(), caps);
    }
}

#[test]
fn malformed_inputs_are_rejected() {
    assert!(parse_graph("graph n=3\n0 7\n").is_err());
    assert!(parse_graph("graph n=3\n0 1\n").is_ok());
    assert!(parse_dimacs("p cnf 2 1\n1 3 0\n").is_err());
    assert!(parse_capacities("4\n-1\n").is_err());
}

#[test]
fn report_json_roundtrips() {
    let spec = ExperimentSpec::new(Seed::from_u64(9), 2, Experiment::LowerBound { path_len: 3 });
    let report = run(&spec).unwrap();
    let text = serde_json::to_string(&report).unwrap();
    let back: RunReport = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string(&back).unwrap(), text);
}
