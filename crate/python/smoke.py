"""Smoke test for the `lca` extension module.

Build and install first, e.g.
    maturin build -m crates/py/Cargo.toml -o dist && pip install dist/lca-*.whl
"""

import json

import lca


def main():
    seed = lca.Seed.from_int(7)
    assert lca.Seed(seed.hex) == seed
    assert seed.derive("a") != seed.derive("b")

    r = [lca.rank(seed, v, 100) for v in range(100)]
    assert len(set(r)) == 100

    g = lca.Graph.bounded_degree(seed, 500, 5)
    m = g.matching(seed)
    assert g.is_maximal_matching(m)
    u, v = m[0]
    assert g.is_matched(u, v, seed)[0]
    members, truncated = g.relevant_set(0, seed)
    assert members[-1] == 0 and not truncated

    h = lca.Hypergraph.generate(seed, 800, 40, 40, 2)
    colors, phases = h.color_all(seed)
    assert h.is_proper(colors)
    assert h.color_query(3, seed)[0] == colors[3]
    assert set(phases) <= {1, 2, 3, 4}

    bb = lca.balls_bins(seed, 2000, 2000)
    assert sum(bb["loads"]) == 2000 and bb["failures"] == 0

    spec = {
        "seed": seed.hex,
        "trials": 2,
        "experiment": {"kind": "lower-bound", "path_len": 3},
    }
    report = json.loads(lca.run_experiment(json.dumps(spec)))
    assert report["summary"]["trials"] == 2

    passed, detail = lca.acceptance_criterion(9, seed)
    assert passed, detail

    try:
        lca.Graph(3, [(0, 0)])
    except ValueError:
        pass
    else:
        raise AssertionError("self-loop accepted")

    print(f"lca {lca.__version__}: smoke ok ({len(m)} matched edges, max load {bb['max_load']})")


if __name__ == "__main__":
    main()
