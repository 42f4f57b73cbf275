import math
from collections import defaultdict

import numpy as np
import pytest
from scipy.sparse.csgraph import dijkstra

from surfsim.decoder import GraphDecoder
from surfsim.lattice import build_code
from surfsim.noise import FaultEvent, NoiseModel, choice_probability, fault_choices
from surfsim.pauli_sim import detection_events, simulate_faults
from surfsim.schedule import CNOT, build_schedule
from surfsim.weights import (
    BOUNDARY,
    boundary_distance,
    circuit_structure,
    derive_weights,
    rectilinear_distance,
    rectilinear_weights,
    weights_csv,
)


def edges_by_key(graph):
    return {(e.u, e.v): e for e in graph.edges}


def test_pheno_closed_form():
    lay = build_code(5)
    p = 0.02
    tab = derive_weights(lay, None, NoiseModel("pheno", p), rounds=5)
    g = tab["X"]
    m = g.n_stab
    ek = edges_by_key(g)
    # same check, consecutive rounds: one misreport
    assert ek[(g.node(2, 3), g.node(3, 3))].p == pytest.approx(p, abs=1e-15)
    # neighbouring checks sharing one data qubit: one data flip
    s, t = 0, 1
    assert lay.z_stabilizers[t].coord[1] - lay.z_stabilizers[s].coord[1] == 2
    assert ek[(g.node(2, s), g.node(2, t))].p == pytest.approx(p, abs=1e-15)
    assert g.n_nodes == 6 * m
    assert all(e.weight == pytest.approx(math.log((1 - p) / p)) for e in g.edges)


def test_capacity_has_no_time_edges():
    lay = build_code(5)
    tab = derive_weights(lay, None, NoiseModel("capacity", 0.05))
    for g in tab.graphs.values():
        assert g.rounds == 0
        for e in g.edges:
            assert e.v == BOUNDARY or g.split(e.u)[0] == g.split(e.v)[0] == 0


def _reference_table(lay, sched, model, rounds, error):
    """Edge probabilities from one reference simulation per single fault."""
    hist_kind = "Z" if error == "X" else "X"
    m = len(lay.z_stabilizers if error == "X" else lay.x_stabilizers)
    per_key = defaultdict(lambda: defaultdict(float))
    locs = [(r, g) for r in range(rounds) for g in sched.gates] + [(-1, g) for g in sched.preamble]
    for r, g in locs:
        for ch, label in fault_choices(g):
            pr = float(choice_probability(model, g, ch))
            if pr == 0:
                continue
            hist, _ = simulate_faults(lay, sched, [FaultEvent(g, label, r, ch)], rounds)
            ev = [(t, s) for t, k, s in detection_events(hist).events() if k == hist_kind]
            if not ev:
                continue
            assert len(ev) <= 2
            key = tuple(sorted(t * m + s for t, s in ev))
            per_key[key][(r, g)] += pr
    out = {}
    for key, locs in per_key.items():
        acc = 1.0
        for q in locs.values():
            acc *= 1 - 2 * q
        out[key if len(key) == 2 else (key[0], BOUNDARY)] = (1 - acc) / 2
    return out


@pytest.mark.parametrize("variant", ["depth8", "depth6", "depth5"])
@pytest.mark.parametrize("kind", ["standard", "balanced"])
def test_enumeration_matches_reference(variant, kind):
    lay = build_code(2)
    sched = build_schedule(lay, variant)
    model = NoiseModel(kind, 0.01)
    rounds = 3
    tab = derive_weights(lay, sched, model, rounds)
    for error in "XZ":
        want = _reference_table(lay, sched, model, rounds, error)
        got = {k: e.p for k, e in edges_by_key(tab[error]).items()}
        assert set(got) == set(want)
        for k in want:
            assert got[k] == pytest.approx(want[k], abs=1e-12)


def test_completeness_of_mechanisms():
    """Every Pauli at every location lands in the structure or is undetectable, once."""
    lay = build_code(3)
    sched = build_schedule(lay, "depth6")
    rounds = 3
    st = circuit_structure(lay, sched, rounds)
    seen = defaultdict(lambda: defaultdict(int))
    for error in "XZ":
        for contribs in st.keys[error].values():
            for c in contribs:
                seen[c.location][c.channel] += 1
    for r in range(rounds):
        for i, g in enumerate(sched.gates):
            n_choices = len(fault_choices(g))
            # a choice may show up in both graphs (Y-type) or neither (harmless)
            total = sum(seen[(0, r, i)].values())
            assert total <= 2 * n_choices


def test_diagonal_edge_from_mid_round_cnot():
    """X on a bulk data qubit between its two Z-check CNOTs shows up in two rounds."""
    lay = build_code(5)
    sched = build_schedule(lay, "depth6")
    q = lay.qubit_at((4, 4))
    west = next(i for i, s in enumerate(lay.z_stabilizers) if s.coord == (4, 3))
    east = next(i for i, s in enumerate(lay.z_stabilizers) if s.coord == (4, 5))
    # q is the W neighbour of the east check (step 1) and the E neighbour of the west check (step 2)
    cnot = next(g for g in sched.gates if g.kind == CNOT and g.qubits == (q, lay.z_stabilizers[east].ancilla))
    hist, _ = simulate_faults(lay, sched, [FaultEvent(cnot, "XI", 1, "cnot")], 4)
    ev = [(t, s) for t, k, s in detection_events(hist).events() if k == "Z"]
    assert ev == [(1, west), (2, east)]
    tab = derive_weights(lay, sched, NoiseModel("standard", 0.001), 4)
    g = tab["X"]
    assert (g.node(1, west), g.node(2, east)) in edges_by_key(g)


@pytest.mark.parametrize("variant", ["depth6", "depth5", "depth8"])
def test_diagonals_exist(variant):
    lay = build_code(3)
    tab = derive_weights(lay, build_schedule(lay, variant), NoiseModel("standard", 0.001))
    g = tab["X"]
    diag = [e for e in g.edges if e.v != BOUNDARY and g.split(e.u)[0] != g.split(e.v)[0]
            and g.split(e.u)[1] != g.split(e.v)[1]]
    assert diag


def test_probabilities_in_range():
    lay = build_code(3)
    for kind in ("standard", "balanced", "perfect1q"):
        for p in (1e-4, 0.01, 0.1):
            tab = derive_weights(lay, build_schedule(lay, "depth8"), NoiseModel(kind, p))
            for g in tab.graphs.values():
                for e in g.edges:
                    assert 0 < e.p < 0.5 and e.weight > 0


def test_time_translation_symmetry():
    lay = build_code(5)
    tab = derive_weights(lay, build_schedule(lay, "depth5"), NoiseModel("standard", 0.003), rounds=5)
    g = tab["X"]
    m = g.n_stab
    ek = {(e.u, e.v): e.p for e in g.edges}
    inner = {k: v for k, v in ek.items() if 1 * m <= k[0] < 2 * m and (k[1] == BOUNDARY or k[1] < 3 * m)}
    assert inner
    for (u, v), p in inner.items():
        shifted = (u + m, v if v == BOUNDARY else v + m)
        assert ek[shifted] == pytest.approx(p, rel=1e-12)


def test_space_translation_symmetry():
    """Bulk edges look the same from checks one unit cell apart."""
    lay = build_code(7)
    tab = derive_weights(lay, build_schedule(lay, "depth6"), NoiseModel("standard", 0.003), rounds=3)
    g = tab["X"]
    by_coord = {c: i for i, c in enumerate(g.coords)}

    def local(s):
        out = {}
        for e in g.edges:
            if e.v == BOUNDARY:
                continue
            (t1, s1), (t2, s2) = g.split(e.u), g.split(e.v)
            if t1 == 1 and s1 == s:
                r1, c1 = g.coords[s1]
                r2, c2 = g.coords[s2]
                out[(t2 - t1, r2 - r1, c2 - c1)] = e.p
        return out

    a = local(by_coord[(6, 5)])
    b = local(by_coord[(6, 7)])
    c = local(by_coord[(4, 5)])
    assert a and a.keys() == b.keys() == c.keys()
    for k in a:
        assert a[k] == pytest.approx(b[k]) == pytest.approx(c[k])


def test_perfect_1q_edges_need_a_cnot_mechanism():
    lay = build_code(3)
    sched = build_schedule(lay, "depth6")
    st = circuit_structure(lay, sched, 3)
    tab = derive_weights(lay, sched, NoiseModel("perfect1q", 0.01))
    for error in "XZ":
        keys = {(k[0], k[1] if len(k) == 2 else BOUNDARY) for k, cs in st.keys[error].items()
                if any(c.channel == "cnot" for c in cs)}
        assert set(edges_by_key(tab[error])) == keys


def test_rectilinear_examples():
    assert rectilinear_distance((0, (0, 1)), (1, (0, 1))) == 1
    assert rectilinear_distance((3, (2, 1)), (3, (2, 3))) == 1
    assert rectilinear_distance((0, (0, 1)), (2, (2, 5))) == 5


def test_rectilinear_graph_metric():
    """Shortest paths in the unit graph reproduce the rectilinear metric."""
    lay = build_code(5)
    tab = rectilinear_weights(lay, 5)
    for error in "XZ":
        g = tab[error]
        gd = GraphDecoder(g)
        src = [g.node(2, s) for s in range(g.n_stab)]
        dist = dijkstra(gd.csr, directed=False, indices=src)
        for i, s in enumerate(range(g.n_stab)):
            a = g.coords[s]
            b_a = boundary_distance(lay, error, a)
            assert dist[i, gd.boundary] == b_a
            for t in range(g.rounds):
                for s2 in range(g.n_stab):
                    b = g.coords[s2]
                    direct = rectilinear_distance((2, a), (t, b))
                    via = b_a + boundary_distance(lay, error, b)
                    assert dist[i, g.node(t, s2)] == min(direct, via)
            # the closing round is noiseless: its nodes only hang off the last noisy round
            last = g.rounds
            for s2 in range(g.n_stab):
                assert dist[i, g.node(last, s2)] == dist[i, g.node(last - 1, s2)] + 1
        assert all(e.weight == 1.0 for e in g.edges)


def test_weights_csv():
    lay = build_code(3)
    text = weights_csv(derive_weights(lay, build_schedule(lay, "depth6"), NoiseModel("standard", 0.001)))
    lines = text.splitlines()
    assert lines[0] == "graph,type,t,row,col,dt,ds_row,ds_col,p_e,w_e"
    assert {l.split(",")[1] for l in lines[1:]} == {"edge", "boundary"}
    assert text == weights_csv(derive_weights(lay, build_schedule(lay, "depth6"), NoiseModel("standard", 0.001)))
