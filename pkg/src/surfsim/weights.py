"""Matching-graph edges and weights.

Each decoding graph has one node per (round, stabilizer) detector plus a
shared boundary. X errors are decoded on the graph of Z-stabilizer
detectors, Z errors on the graph of X-stabilizer detectors.

For circuit-level noise the edges come from exhaustive single-fault
enumeration: every Pauli at every location of one round is pushed through a
short window of rounds, and the resulting detection events, translated to
every round of the experiment, define an edge (two events) or a boundary
edge (one event). Alternatives at one location are mutually exclusive, so
their probabilities add; distinct locations flip an edge independently and
combine with the odd-parity rule ``p + q - 2pq``. The weight of an edge is
the log-likelihood ratio ``ln((1 - p) / p)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .lattice import CodeLayout
from .noise import ModelKind, NoiseModel, fault_choices, FaultEvent
from .pauli_sim import ExplicitInjector, FrameSimulator
from .schedule import CircuitSchedule

BOUNDARY = -1
WINDOW = 3  # rounds simulated per single fault; all transients settle inside it


def graph_stabilizers(layout: CodeLayout, error: str):
    """Stabilizers whose outcomes detect errors of type ``error``."""
    return layout.z_stabilizers if error == "X" else layout.x_stabilizers


def to_mask(bits: np.ndarray) -> int:
    return int.from_bytes(np.packbits(np.asarray(bits, dtype=bool), bitorder="little").tobytes(), "little")


def from_mask(mask: int, n: int) -> np.ndarray:
    out = np.zeros(n, dtype=np.uint8)
    k = 0
    while mask:
        if mask & 1:
            out[k] = 1
        mask >>= 1
        k += 1
    return out


@dataclass
class Edge:
    u: int
    v: int  # BOUNDARY for boundary edges
    p: float
    weight: float
    residual: int  # bitmask of data qubits flipped by the mechanism
    logical: bool  # residual anticommutes with the opposing logical operator


@dataclass
class DecodingGraph:
    error: str  # "X" or "Z"
    rounds: int
    n_stab: int
    coords: tuple[tuple[int, int], ...]  # stabilizer coordinates
    edges: list[Edge]

    @property
    def n_nodes(self) -> int:
        return (self.rounds + 1) * self.n_stab

    def node(self, t: int, s: int) -> int:
        return t * self.n_stab + s

    def split(self, node: int) -> tuple[int, int]:
        return divmod(node, self.n_stab)


@dataclass
class EdgeWeightTable:
    graphs: dict[str, DecodingGraph]
    weighting: str = "circuit"
    ambiguous: int = 0  # edge classes merged from mechanisms of different logical parity

    def __getitem__(self, error: str) -> DecodingGraph:
        return self.graphs[error]


# ---- mechanism structure -------------------------------------------------------

@dataclass
class _Contribution:
    location: tuple  # unique fault location id
    channel: str
    fraction: Fraction
    residual: int


@dataclass
class ErrorStructure:
    """p-independent mechanism list: per graph, event key -> contributions."""

    rounds: int
    keys: dict[str, dict[tuple[int, ...], list[_Contribution]]] = field(default_factory=dict)
    undetectable_logical: int = 0


def _flip_sets(arr: np.ndarray) -> list[frozenset]:
    return [frozenset(np.nonzero(row)[0].tolist()) for row in arr]


def _circuit_templates(layout: CodeLayout, schedule: CircuitSchedule):
    """Simulate every single fault of one round (and the preamble) once."""
    sim = FrameSimulator(layout, schedule)
    faults = []
    for where, gates in ((0, schedule.gates), (-1, schedule.preamble)):
        for loc_index, g in enumerate(gates):
            for channel, label in fault_choices(g):
                faults.append((where, loc_index, channel, label, FaultEvent(g, label, where, channel)))
    if not faults:
        return []
    inj = ExplicitInjector([(col, f[4]) for col, f in enumerate(faults)])
    out = sim.run(inj, len(faults), rounds=WINDOW)
    templates = []
    for col, (where, loc_index, channel, label, fe) in enumerate(faults):
        per_graph = {}
        for error, flips, data in (("X", out.z_flips, out.data_x), ("Z", out.x_flips, out.data_z)):
            rows = _flip_sets(flips[:, :, col])
            steady = rows[WINDOW]
            if rows[WINDOW - 1] != steady:
                raise AssertionError(f"fault {fe} still changing syndromes after {WINDOW} rounds")
            per_graph[error] = (tuple(rows[:WINDOW]), steady, to_mask(data[:, col]))
        templates.append((where, loc_index, channel, fe, per_graph))
    return templates


def _events_for(start: int, rows, steady, rounds: int) -> tuple:
    """Detection events (as (t, s) pairs) of a window placed at ``start``."""

    def flips(t):
        if t < start:
            return frozenset()
        if t >= rounds:
            return steady
        k = t - start
        return rows[k] if k < len(rows) else steady

    events = []
    prev = frozenset()
    for t in range(rounds + 1):
        cur = flips(t)
        for s in cur ^ prev:
            events.append((t, s))
        prev = cur
    return tuple(sorted(events))


@lru_cache(maxsize=32)
def circuit_structure(layout: CodeLayout, schedule: CircuitSchedule, rounds: int) -> ErrorStructure:
    structure = ErrorStructure(rounds, {"X": {}, "Z": {}})
    for where, loc_index, channel, fe, per_graph in _circuit_templates(layout, schedule):
        starts = [0] if where == -1 else range(rounds)
        frac = Fraction(1, 15) if channel == "cnot" else Fraction(1, 3) if channel in ("gate1", "idle") else Fraction(1)
        for r in starts:
            for error in ("X", "Z"):
                rows, steady, residual = per_graph[error]
                events = _events_for(r, rows, steady, rounds)
                if not events:
                    if residual and _logical(layout, error, residual):
                        structure.undetectable_logical += 1
                    continue
                if len(events) > 2:
                    raise AssertionError(f"single fault {fe} in round {r} gives {len(events)} events in the {error} graph")
                key = tuple(_node(len(graph_stabilizers(layout, error)), t, s) for t, s in events)
                structure.keys[error].setdefault(key, []).append(
                    _Contribution((where, r, loc_index), channel, frac, residual)
                )
    return structure


def _node(m: int, t: int, s: int) -> int:
    return t * m + s


@lru_cache(maxsize=256)
def _logical_mask(layout: CodeLayout, error: str) -> int:
    support = layout.logical_z_support if error == "X" else layout.logical_x_support
    return sum(1 << q for q in support)


def _logical(layout: CodeLayout, error: str, residual: int) -> bool:
    return bin(residual & _logical_mask(layout, error)).count("1") % 2 == 1


@lru_cache(maxsize=32)
def data_structure(layout: CodeLayout, rounds: int) -> ErrorStructure:
    """Mechanisms of the code-capacity (``rounds == 0``) and phenomenological models."""
    structure = ErrorStructure(rounds, {"X": {}, "Z": {}})
    noisy_rounds = max(rounds, 1)
    for error in ("X", "Z"):
        stabs = graph_stabilizers(layout, error)
        m = len(stabs)
        touching: dict[int, list[int]] = {}
        for i, s in enumerate(stabs):
            for q in s.support:
                touching.setdefault(q, []).append(i)
        keys = structure.keys[error]
        for t in range(noisy_rounds):
            for q in range(layout.n_data):
                key = tuple(sorted(_node(m, t, s) for s in touching.get(q, [])))
                if key:
                    keys.setdefault(key, []).append(_Contribution(("data", t, q), "idle", Fraction(1), 1 << q))
            if rounds == 0:
                continue
            for s in range(m):
                key = (_node(m, t, s), _node(m, t + 1, s))
                keys.setdefault(key, []).append(_Contribution(("meas", t, s), "meas", Fraction(1), 0))
    return structure


def xor_combine(probs) -> float:
    """Probability that an odd number of independent events occur."""
    acc = 1.0
    for p in probs:
        acc *= 1 - 2 * p
    return (1 - acc) / 2


def llr(p: float) -> float:
    return math.log((1 - p) / p)


def _table_from_structure(layout: CodeLayout, structure: ErrorStructure, model: NoiseModel) -> EdgeWeightTable:
    rates = {k: float(v) for k, v in model.rates().items()}
    graphs = {}
    ambiguous = 0
    for error in ("X", "Z"):
        stabs = graph_stabilizers(layout, error)
        edges = []
        for key, contribs in structure.keys[error].items():
            per_loc: dict[tuple, float] = {}
            best: tuple[float, int] | None = None
            parities = set()
            for c in contribs:
                pc = rates[c.channel] * float(c.fraction)
                if pc <= 0:
                    continue
                per_loc[c.location] = per_loc.get(c.location, 0.0) + pc
                parities.add(_logical(layout, error, c.residual))
                if best is None or pc > best[0]:
                    best = (pc, c.residual)
            if not per_loc:
                continue
            ambiguous += len(parities) > 1
            p = xor_combine(per_loc.values())
            u, v = (key[0], key[1]) if len(key) == 2 else (key[0], BOUNDARY)
            residual = best[1]
            edges.append(Edge(u, v, p, llr(p), residual, _logical(layout, error, residual)))
        edges.sort(key=lambda e: (e.u, e.v))
        graphs[error] = DecodingGraph(error, structure.rounds, len(stabs), tuple(s.coord for s in stabs), edges)
    return EdgeWeightTable(graphs, "circuit", ambiguous)


def derive_weights(
    layout: CodeLayout,
    schedule: CircuitSchedule | None,
    model: NoiseModel,
    rounds: int | None = None,
) -> EdgeWeightTable:
    """Weighted decoding graphs for ``model``.

    Circuit-level models enumerate faults of ``schedule``; the
    code-capacity model has a single perfect round and the phenomenological
    model ``rounds`` noisy rounds (default ``d``), both built in closed form.
    """
    kind = model.kind
    if kind is ModelKind.CODE_CAPACITY:
        structure = data_structure(layout, 0)
    elif kind is ModelKind.PHENOMENOLOGICAL:
        structure = data_structure(layout, layout.distance if rounds is None else rounds)
    else:
        if schedule is None:
            raise ValueError("circuit-level weights need a schedule")
        structure = circuit_structure(layout, schedule, layout.distance if rounds is None else rounds)
    return _table_from_structure(layout, structure, model)


def mechanism_mass(layout: CodeLayout, schedule: CircuitSchedule, model: NoiseModel, rounds: int | None = None):
    """Total probability per location over all enumerated mechanisms.

    Summed over both graphs and the undetectable remainder this must equal
    the location's fault probability; returned as exact fractions keyed by
    location id.
    """
    rates = model.rates()
    total: dict[tuple, Fraction] = {}
    for where, loc_index, channel, fe, per_graph in _circuit_templates(layout, schedule):
        frac = Fraction(1, 15) if channel == "cnot" else Fraction(1, 3) if channel in ("gate1", "idle") else Fraction(1)
        loc = (where, loc_index)
        total[loc] = total.get(loc, Fraction(0)) + Fraction(rates[channel]) * frac
    return total


# ---- rectilinear metric ------------------------------------------------------

def rectilinear_weights(layout: CodeLayout, d_rounds: int) -> EdgeWeightTable:
    """Unit-weight nearest-neighbor graphs, so path length is rectilinear distance.

    Spatial edges join stabilizers sharing a data qubit, temporal edges join
    consecutive rounds of one stabilizer and every stabilizer touching a
    boundary data qubit gets a unit boundary edge. No diagonal edges.
    ``d_rounds == 0`` yields a single perfect round.
    """
    structure = data_structure(layout, d_rounds)
    graphs = {}
    for error in ("X", "Z"):
        stabs = graph_stabilizers(layout, error)
        edges = []
        for key, contribs in structure.keys[error].items():
            residual = contribs[0].residual
            u, v = (key[0], key[1]) if len(key) == 2 else (key[0], BOUNDARY)
            edges.append(Edge(u, v, float("nan"), 1.0, residual, _logical(layout, error, residual)))
        edges.sort(key=lambda e: (e.u, e.v))
        graphs[error] = DecodingGraph(error, d_rounds, len(stabs), tuple(s.coord for s in stabs), edges)
    return EdgeWeightTable(graphs, "rectilinear")


def rectilinear_distance(a: tuple[int, tuple[int, int]], b: tuple[int, tuple[int, int]]) -> int:
    """``|dt|`` plus the Manhattan distance on the stabilizer sublattice.

    Points are ``(round, (row, col))`` with stabilizer grid coordinates.
    """
    (ta, (ra, ca)), (tb, (rb, cb)) = a, b
    return abs(ta - tb) + (abs(ra - rb) + abs(ca - cb)) // 2


def boundary_distance(layout: CodeLayout, error: str, coord: tuple[int, int]) -> int:
    r, c = coord
    far = 2 * layout.distance - 2
    if error == "X":
        return min(c + 1, far - c + 1) // 2
    return min(r + 1, far - r + 1) // 2


# ---- table dump ----------------------------------------------------------------

def weights_csv(table: EdgeWeightTable) -> str:
    """One row per edge with its anchor detector and displacement."""
    rows = ["graph,type,t,row,col,dt,ds_row,ds_col,p_e,w_e"]
    for error, g in sorted(table.graphs.items()):
        for e in g.edges:
            t, s = g.split(e.u)
            r, c = g.coords[s]
            if e.v == BOUNDARY:
                rows.append(f"{error},boundary,{t},{r},{c},0,0,0,{e.p:.10g},{e.weight:.10g}")
            else:
                t2, s2 = g.split(e.v)
                r2, c2 = g.coords[s2]
                rows.append(f"{error},edge,{t},{r},{c},{t2 - t},{r2 - r},{c2 - c},{e.p:.10g},{e.weight:.10g}")
    return "\n".join(rows) + "\n"
