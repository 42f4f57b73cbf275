import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from surfsim.matcher import (
    MatchingGraph,
    all_perfect_matchings,
    brute_force_matching,
    dump_graph,
    min_weight_perfect_matching,
)


def complete(n, weights):
    g = MatchingGraph(n)
    for (i, j), w in zip(itertools.combinations(range(n), 2), weights):
        g.add_edge(i, j, w)
    return g


def test_single_edge():
    g = MatchingGraph(2, [(0, 1, 3.7)])
    m = min_weight_perfect_matching(g)
    assert m.pairs == [(0, 1)] and m.weight == 3.7


def test_greedy_trap():
    # 1-indexed in the usual statement; shifted to 0..3 here
    g = MatchingGraph(4)
    for i, j, w in [(0, 1, 1), (2, 3, 10), (0, 2, 2), (1, 3, 2), (0, 3, 6), (1, 2, 6)]:
        g.add_edge(i, j, w)
    for solver in (min_weight_perfect_matching, brute_force_matching):
        m = solver(g)
        assert m.pairs == [(0, 2), (1, 3)] and m.weight == 4


def test_perfect_matching_count():
    assert sum(1 for _ in all_perfect_matchings(8)) == 105
    assert sum(1 for _ in all_perfect_matchings(10)) == 945


def test_random_8_node_against_oracle():
    rng = random.Random(8)
    for _ in range(50):
        g = complete(8, [rng.uniform(0, 10) for _ in range(28)])
        a, b = min_weight_perfect_matching(g), brute_force_matching(g)
        assert a.pairs == b.pairs and a.weight == b.weight
        # oracle of the oracle: plain enumeration of all 105 matchings
        best = min(sum(w for (i, j, w) in g.edges if (i, j) in pm) for pm in
                   (set(p) for p in all_perfect_matchings(8)))
        assert a.weight == pytest.approx(best, abs=1e-12)


def test_ties_break_lexicographically():
    g = complete(4, [1.0] * 6)
    assert min_weight_perfect_matching(g).pairs == [(0, 1), (2, 3)]
    g = complete(6, [2.0] * 15)
    assert min_weight_perfect_matching(g).pairs == [(0, 1), (2, 3), (4, 5)]


def test_sparse_random_graphs():
    rng = random.Random(3)
    for _ in range(200):
        n = rng.choice([4, 6, 8, 10])
        g = MatchingGraph(n)
        for i, j in itertools.combinations(range(n), 2):
            if rng.random() < 0.5:
                g.add_edge(i, j, rng.randint(0, 4))
        try:
            want = brute_force_matching(g)
        except ValueError:
            with pytest.raises(ValueError):
                min_weight_perfect_matching(g)
            continue
        assert min_weight_perfect_matching(g).pairs == want.pairs


def test_rejections():
    with pytest.raises(ValueError):
        min_weight_perfect_matching(MatchingGraph(3, [(0, 1, 1.0), (1, 2, 1.0)]))
    with pytest.raises(ValueError):  # path 0-1-2-3 minus the middle: no perfect matching
        min_weight_perfect_matching(MatchingGraph(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]))
    with pytest.raises(ValueError):
        min_weight_perfect_matching(MatchingGraph(2, [(0, 1, -1.0)]))
    with pytest.raises(ValueError):
        brute_force_matching(MatchingGraph(14))


def test_boundary_construction():
    # two events, each next to the boundary, far apart from each other
    g = MatchingGraph.with_boundary(2, [(0, 1, 5.0)], [2.0, 2.0])
    assert g.n_nodes == 4
    m = min_weight_perfect_matching(g)
    assert m.pairs == [(0, 2), (1, 3)] and m.weight == 4.0


def test_additive_shift_is_not_invariant():
    """Boundary routes use two weighted edges and a direct pair one, so shifting all weights matters."""
    g = MatchingGraph.with_boundary(2, [(0, 1, 5.0)], [2.0, 2.0])
    h = MatchingGraph.with_boundary(2, [(0, 1, 7.0)], [4.0, 4.0])
    assert min_weight_perfect_matching(g).pairs == [(0, 2), (1, 3)]
    assert min_weight_perfect_matching(h).pairs == [(0, 1), (2, 3)]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0, 10, allow_nan=False), min_size=15, max_size=15),
       st.floats(0.01, 100, allow_nan=False))
def test_scale_invariance(weights, k):
    g = complete(6, weights)
    h = complete(6, [w * k for w in weights])
    assert min_weight_perfect_matching(g).pairs == min_weight_perfect_matching(h).pairs


def test_dump_graph():
    g = MatchingGraph(2, [(0, 1, 0.5)])
    assert dump_graph(g) == "p edge 2 1\ne 0 1 0.5\n"
