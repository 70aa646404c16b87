import itertools

import numpy as np
import pytest

from network.graph import (
    DirectedTopology,
    TopologyError,
    bidirectional_path,
    complete,
    diameter_bound,
    directed_cycle,
    from_arcs,
    in_neighbors,
    is_strongly_connected,
    random_strongly_connected,
)


def _closure_oracle(n, arcs):
    reach = np.eye(n, dtype=bool)
    for j, i in arcs:
        reach[j, i] = True
    for k in range(n):
        reach |= reach[:, [k]] & reach[[k], :]
    return bool(reach.all())


def test_in_neighbors_examples():
    assert in_neighbors(from_arcs(2, [(0, 1), (1, 0)]), 1) == {0}
    assert in_neighbors(complete(3), 0) == {1, 2}
    assert in_neighbors(directed_cycle(4), 2) == {1}


@pytest.mark.parametrize("bad", [-1, 4, 1.5, "a"])
def test_in_neighbors_rejects_invalid_node(bad):
    with pytest.raises(TopologyError):
        in_neighbors(directed_cycle(4), bad)


def test_construction_rejects_self_loops_and_single_node():
    with pytest.raises(TopologyError):
        from_arcs(3, [(1, 1)])
    with pytest.raises(TopologyError):
        DirectedTopology(1, frozenset())
    with pytest.raises(TopologyError):
        from_arcs(3, [(0, 3)])


def test_strong_connectivity_examples():
    assert is_strongly_connected(directed_cycle(4))
    assert not is_strongly_connected(from_arcs(2, [(0, 1)]))
    assert is_strongly_connected(complete(5))


def test_strong_connectivity_matches_closure_oracle():
    rng = np.random.default_rng(3)
    for n in range(2, 6):
        pairs = [(j, i) for j in range(n) for i in range(n) if j != i]
        for _ in range(60):
            arcs = [p for p in pairs if rng.random() < 0.4]
            assert is_strongly_connected(from_arcs(n, arcs)) == _closure_oracle(n, arcs)


def test_strong_connectivity_exhaustive_on_three_nodes():
    pairs = [(j, i) for j in range(3) for i in range(3) if j != i]
    for mask in itertools.product([False, True], repeat=len(pairs)):
        arcs = [p for p, keep in zip(pairs, mask) if keep]
        assert is_strongly_connected(from_arcs(3, arcs)) == _closure_oracle(3, arcs)


def test_diameter_bound_examples():
    assert diameter_bound(complete(6)) == 1
    assert diameter_bound(directed_cycle(4)) == 3
    assert diameter_bound(bidirectional_path(4)) == 3


def test_diameter_bound_requires_strong_connectivity():
    with pytest.raises(TopologyError):
        diameter_bound(from_arcs(3, [(0, 1), (1, 2)]))


def test_random_two_nodes_is_forced():
    for seed in range(5):
        g = random_strongly_connected(2, 0.5, np.random.default_rng(seed))
        assert g.arcs == frozenset({(0, 1), (1, 0)})


def test_random_is_deterministic_and_connected():
    a = random_strongly_connected(10, 0.3, np.random.default_rng(42))
    b = random_strongly_connected(10, 0.3, np.random.default_rng(42))
    assert a.arcs == b.arcs
    assert a.fingerprint() == b.fingerprint()
    assert is_strongly_connected(a)


def test_random_graphs_pass_connectivity_and_diameter_range():
    for seed in range(100):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 30))
        g = random_strongly_connected(n, float(rng.uniform(0.01, 1.0)), rng)
        assert is_strongly_connected(g)
        assert 1 <= diameter_bound(g) <= n - 1


def test_random_rejects_bad_arguments():
    with pytest.raises(TopologyError):
        random_strongly_connected(1, 0.5, np.random.default_rng(0))
    with pytest.raises(TopologyError):
        random_strongly_connected(5, 0.0, np.random.default_rng(0))


def test_density_one_gives_complete_graph():
    g = random_strongly_connected(6, 1.0, np.random.default_rng(0))
    assert g.arcs == complete(6).arcs


def test_json_shape_round_trips():
    g = directed_cycle(4)
    payload = g.to_dict()
    assert payload == {"n": 4, "arcs": [[0, 1], [1, 2], [2, 3], [3, 0]]}
    assert DirectedTopology.from_dict(payload) == g


def test_from_dict_reports_malformed_payload():
    with pytest.raises(TopologyError):
        DirectedTopology.from_dict({"arcs": [[0, 1]]})
