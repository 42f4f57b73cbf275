"""Matching decoder: detection events -> correction -> logical verdict.

Each decoding graph gets a :class:`GraphDecoder`. Shortest paths between
detection events (through the weighted mechanism graph, with the boundary as
one extra node) give both the matching weights and the correction: the
residual data flips of every edge on a path are XOR-ed together.

Two backends share one graph. ``blossom`` runs the exact solver in
:mod:`surfsim.matcher` and checks syndrome neutrality on every trial.
``pymatching`` hands the same edges to the PyMatching library and only
reports the logical parity; it is what large sweeps use.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .lattice import CodeLayout
from .matcher import Matching, MatchingGraph, min_weight_perfect_matching
from .noise import NoiseModel
from .pauli_sim import BatchOutcome, FrameSimulator, PauliFrame, RandomInjector, simulate_data_noise
from .schedule import CircuitSchedule
from .weights import BOUNDARY, DecodingGraph, EdgeWeightTable

_MIN_WEIGHT = 1e-9  # csgraph drops explicit zeros
BACKENDS = ("blossom", "pymatching")


@dataclass(frozen=True)
class Correction:
    x: frozenset = frozenset()
    z: frozenset = frozenset()


@dataclass(frozen=True)
class TrialOutcome:
    failure_x: bool
    failure_z: bool
    rounds_simulated: int


@dataclass
class EventMatching:
    """A matching over the detection events of one graph.

    Node ``i < len(events)`` is event ``events[i]``; node ``i + len(events)``
    is its virtual boundary partner.
    """

    error: str
    events: list[int]
    matching: Matching


class GraphDecoder:
    def __init__(self, graph: DecodingGraph, cache_size: int = 50_000):
        self.graph = graph
        n = graph.n_nodes
        self.boundary = n
        rows, cols, vals = [], [], []
        self._edge: dict[tuple[int, int], int] = {}
        for e in graph.edges:
            v = self.boundary if e.v == BOUNDARY else e.v
            key = (min(e.u, v), max(e.u, v))
            w = max(float(e.weight), _MIN_WEIGHT)
            if key in self._edge:
                raise ValueError(f"duplicate edge {key}")
            self._edge[key] = e.residual
            rows += [e.u, v]
            cols += [v, e.u]
            vals += [w, w]
        self.csr = coo_matrix((vals, (rows, cols)), shape=(n + 1, n + 1)).tocsr()
        self._cache: OrderedDict = OrderedDict()
        self._cache_size = cache_size
        self._pm = None

    # -- exact path ------------------------------------------------------------

    def match(self, events: list[int], canonical: bool = True, prune: bool = True):
        """Matching over ``events`` plus shortest-path predecessors.

        With ``prune`` a real pair is only offered when it is cheaper than
        sending both events to the boundary; dropping the others cannot
        change the optimal weight.
        """
        k = len(events)
        if k == 0:
            return EventMatching(self.graph.error, [], Matching([], 0.0)), None
        dist, pred = dijkstra(self.csr, directed=False, indices=events, return_predecessors=True)
        bdist = dist[:, self.boundary]
        if not np.all(np.isfinite(bdist)):
            bad = [events[i] for i in np.nonzero(~np.isfinite(bdist))[0]]
            raise ValueError(f"detection events {bad} cannot reach the boundary")
        real = []
        for i in range(k):
            for j in range(i + 1, k):
                w = dist[i, events[j]]
                # a pair no cheaper than both boundary edges never needs its own edge
                if np.isfinite(w) and (not prune or w < bdist[i] + bdist[j]):
                    real.append((i, j, float(w)))
        mg = MatchingGraph.with_boundary(k, real, [float(b) for b in bdist])
        return EventMatching(self.graph.error, list(events), min_weight_perfect_matching(mg, canonical)), pred

    def path_mask(self, pred_row: np.ndarray, source: int, target: int) -> int:
        """XOR of edge residuals along the stored shortest path ``source -> target``."""
        mask = 0
        v = target
        while v != source:
            u = int(pred_row[v])
            if u < 0:
                raise AssertionError(f"no path {source} -> {target}")
            mask ^= self._edge[(min(u, v), max(u, v))]
            v = u
        return mask

    def correction_mask(self, em: EventMatching, pred) -> int:
        k = len(em.events)
        mask = 0
        for a, b in em.matching.pairs:
            if a >= k and b >= k:
                continue
            if a >= k or b >= k:
                i = min(a, b)
                mask ^= self.path_mask(pred[i], em.events[i], self.boundary)
            else:
                mask ^= self.path_mask(pred[a], em.events[a], em.events[b])
        return mask

    def decode(self, events: list[int], canonical: bool = True) -> int:
        key = tuple(events)
        hit = self._cache.get(key)
        if hit is not None:
            self._cache.move_to_end(key)
            return hit
        em, pred = self.match(list(events), canonical)
        mask = self.correction_mask(em, pred) if events else 0
        self._cache[key] = mask
        if len(self._cache) > self._cache_size:
            self._cache.popitem(last=False)
        return mask

    # -- fast path ---------------------------------------------------------------

    def pymatching(self):
        if self._pm is None:
            import pymatching

            m = pymatching.Matching()
            for e in self.graph.edges:
                w = max(float(e.weight), _MIN_WEIGHT)
                ids = {0} if e.logical else set()
                if e.v == BOUNDARY:
                    m.add_boundary_edge(e.u, weight=w, fault_ids=ids)
                else:
                    m.add_edge(e.u, e.v, weight=w, fault_ids=ids)
            m.ensure_num_fault_ids(1)
            self._pm = m
        return self._pm

    def predict_logical(self, events: np.ndarray) -> np.ndarray:
        """Predicted logical flips for a ``(batch, n_nodes)`` event array."""
        m = self.pymatching()
        nd = m.num_detectors
        if events[:, nd:].any():
            raise ValueError("detection events on nodes without any edge")
        if nd == 0:
            return np.zeros(events.shape[0], dtype=bool)
        return m.decode_batch(np.ascontiguousarray(events[:, :nd], dtype=np.uint8))[:, 0].astype(bool)


class Decoder:
    """Both graphs of one weight table."""

    def __init__(self, layout: CodeLayout, table: EdgeWeightTable, backend: str = "blossom"):
        if backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}, got {backend!r}")
        self.layout = layout
        self.table = table
        self.backend = backend
        self.graphs = {err: GraphDecoder(g) for err, g in table.graphs.items()}
        self._h = {"X": layout.check_matrix("Z"), "Z": layout.check_matrix("X")}

    def failures(self, outcome: BatchOutcome, components=("X", "Z")) -> dict[str, np.ndarray]:
        """Logical failure flags per component for every trial in ``outcome``."""
        out = {}
        for err in components:
            flips = outcome.z_flips if err == "X" else outcome.x_flips
            data = outcome.data_x if err == "X" else outcome.data_z
            events = _events_matrix(flips)
            gd = self.graphs[err]
            if self.backend == "pymatching":
                out[err] = gd.predict_logical(events) ^ _logical_flags(self.layout, err, data)
                continue
            uniq, inverse = np.unique(events, axis=0, return_inverse=True)
            corr = np.zeros((self.layout.n_data, len(uniq)), dtype=bool)
            for u, row in enumerate(uniq):
                mask = gd.decode(np.flatnonzero(row).tolist())
                corr[:, u] = [(mask >> q) & 1 for q in range(self.layout.n_data)]
            total = data ^ corr[:, inverse.ravel()]
            if ((self._h[err].astype(np.int32) @ total) % 2).any():
                raise AssertionError("correction leaves a nonzero syndrome; decoder bug")
            out[err] = _logical_flags(self.layout, err, total)
        return out


def _events_matrix(flips: np.ndarray) -> np.ndarray:
    """``(rounds+1, n_stab, batch)`` flips -> ``(batch, nodes)`` detection events."""
    ev = flips.copy()
    ev[1:] ^= flips[:-1]
    t, s, b = ev.shape
    return ev.reshape(t * s, b).T


def _logical_flags(layout: CodeLayout, error: str, data: np.ndarray) -> np.ndarray:
    support = list(layout.logical_z_support if error == "X" else layout.logical_x_support)
    return (data[support].sum(axis=0) % 2).astype(bool)


def matching_to_correction(layout: CodeLayout, table: EdgeWeightTable, matchings) -> Correction:
    """Data-qubit flips implied by per-graph event matchings.

    ``matchings`` is an iterable of :class:`EventMatching`; the X graph
    yields the X part of the correction and the Z graph the Z part.
    """
    flips = {"X": 0, "Z": 0}
    for em in matchings:
        gd = GraphDecoder(table[em.error])
        if not em.events:
            continue
        _, pred = dijkstra(gd.csr, directed=False, indices=em.events, return_predecessors=True)
        flips[em.error] ^= gd.correction_mask(em, pred)
    n = layout.n_data
    bits = lambda m: frozenset(q for q in range(n) if (m >> q) & 1)
    return Correction(bits(flips["X"]), bits(flips["Z"]))


def logical_failure(layout: CodeLayout, residual: PauliFrame, correction: Correction, rounds: int = 0) -> TrialOutcome:
    """Homology test of ``residual`` times ``correction``."""
    n = layout.n_data
    x = np.asarray(residual.x_bits[:n], dtype=np.uint8).copy()
    z = np.asarray(residual.z_bits[:n], dtype=np.uint8).copy()
    x[list(correction.x)] ^= 1
    z[list(correction.z)] ^= 1
    if ((layout.check_matrix("Z") @ x) % 2).any() or ((layout.check_matrix("X") @ z) % 2).any():
        raise AssertionError("correction does not neutralize the syndrome")
    fx = bool(x[list(layout.logical_z_support)].sum() % 2)
    fz = bool(z[list(layout.logical_x_support)].sum() % 2)
    return TrialOutcome(fx, fz, rounds)


def simulate_batch(
    layout: CodeLayout,
    schedule: CircuitSchedule | None,
    model: NoiseModel,
    rng: np.random.Generator,
    batch: int,
    rounds: int | None = None,
) -> BatchOutcome:
    if model.kind.is_circuit:
        if schedule is None:
            raise ValueError("circuit-level noise needs a schedule")
        return FrameSimulator(layout, schedule).run(RandomInjector(model, rng), batch, rounds)
    return simulate_data_noise(layout, model, rng, batch, rounds)


def decode_trial(
    layout: CodeLayout,
    schedule: CircuitSchedule | None,
    model: NoiseModel,
    weights_table: EdgeWeightTable,
    p: float,
    rng: np.random.Generator,
) -> TrialOutcome:
    """Simulate and decode a single trial at physical rate ``p``."""
    if float(p) != float(model.p):
        model = NoiseModel(model.kind, p)
    rounds = weights_table["X"].rounds
    outcome = simulate_batch(layout, schedule, model, rng, 1, rounds)
    fails = Decoder(layout, weights_table).failures(outcome)
    return TrialOutcome(bool(fails["X"][0]), bool(fails["Z"][0]), outcome.z_flips.shape[0])
