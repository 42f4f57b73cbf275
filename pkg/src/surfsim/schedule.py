"""Time-stepped syndrome-extraction circuits.

One round measures every stabilizer in parallel. Three variants are built,
named by their depth:

* ``DEPTH8``: only Z-basis preparation and measurement are native, so the
  X-stabilizer ancillas are wrapped in Hadamards.
* ``DEPTH6``: X-basis preparation and measurement are also native.
* ``DEPTH5``: measurement is nondestructive and leaves the ancilla in a known
  state, so measurement and the next preparation share one step. The very
  first round still needs an explicit preparation, kept in ``preamble``.

Any qubit without an active gate in a step gets an explicit ``IDLE``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from enum import Enum

from .lattice import CodeLayout

PREP_Z = "PREP_Z"
PREP_X = "PREP_X"
HADAMARD = "HADAMARD"
CNOT = "CNOT"
MEAS_Z = "MEAS_Z"
MEAS_X = "MEAS_X"
IDLE = "IDLE"
GATE_KINDS = (PREP_Z, PREP_X, HADAMARD, CNOT, MEAS_Z, MEAS_X, IDLE)

# CNOT interaction order of each ancilla with its data neighbors
Z_CHECK_ORDER = ("N", "W", "E", "S")
X_CHECK_ORDER = ("N", "E", "W", "S")


class Variant(str, Enum):
    DEPTH8 = "depth8"
    DEPTH6 = "depth6"
    DEPTH5 = "depth5"

    @property
    def depth(self) -> int:
        return {"depth8": 8, "depth6": 6, "depth5": 5}[self.value]

    @classmethod
    def parse(cls, value: "Variant | str") -> "Variant":
        if isinstance(value, cls):
            return value
        v = str(value).lower()
        for member in cls:
            if v in (member.value, member.name.lower()):
                return member
        raise ValueError(f"unknown circuit variant {value!r}")


@dataclass(frozen=True)
class GateLocation:
    """One gate at one time step; also a potential fault location.

    ``qubits`` is ``(control, target)`` for CNOT. ``reset`` marks the fused
    measure-and-prepare of the depth-5 circuits.
    """

    time_step: int
    kind: str
    qubits: tuple[int, ...]
    reset: bool = False


@dataclass(frozen=True, eq=False)
class CircuitSchedule:
    variant: Variant
    depth: int
    gates: tuple[GateLocation, ...]
    preamble: tuple[GateLocation, ...] = ()

    def steps(self) -> list[list[GateLocation]]:
        out: list[list[GateLocation]] = [[] for _ in range(self.depth)]
        for g in self.gates:
            out[g.time_step].append(g)
        return out

    def count(self, kind: str) -> int:
        return sum(g.kind == kind for g in self.gates)


def _cnot_steps(layout: CodeLayout, first_step: int) -> dict[int, list[GateLocation]]:
    steps: dict[int, list[GateLocation]] = {first_step + k: [] for k in range(4)}
    for stab in layout.z_stabilizers:
        for k, direction in enumerate(Z_CHECK_ORDER):
            q = stab.neighbors.get(direction)
            if q is not None:
                steps[first_step + k].append(GateLocation(first_step + k, CNOT, (q, stab.ancilla)))
    for stab in layout.x_stabilizers:
        for k, direction in enumerate(X_CHECK_ORDER):
            q = stab.neighbors.get(direction)
            if q is not None:
                steps[first_step + k].append(GateLocation(first_step + k, CNOT, (stab.ancilla, q)))
    return steps


def build_schedule(layout: CodeLayout, variant: Variant | str) -> CircuitSchedule:
    """Build one round of parallel syndrome extraction for ``layout``."""
    return _build_schedule(layout, Variant.parse(variant))


@lru_cache(maxsize=64)
def _build_schedule(layout: CodeLayout, variant: Variant) -> CircuitSchedule:
    depth = variant.depth
    xa = [s.ancilla for s in layout.x_stabilizers]
    za = [s.ancilla for s in layout.z_stabilizers]

    active: dict[int, list[GateLocation]] = {t: [] for t in range(depth)}
    preamble_active: list[GateLocation] = []

    def put(t: int, kind: str, qubits, **kw) -> None:
        for q in qubits:
            active[t].append(GateLocation(t, kind, (q,), **kw))

    if variant is Variant.DEPTH8:
        put(0, PREP_Z, xa)
        put(1, HADAMARD, xa)
        put(1, PREP_Z, za)
        cnot_start = 2
        put(6, HADAMARD, xa)
        put(6, MEAS_Z, za)
        put(7, MEAS_Z, xa)
    elif variant is Variant.DEPTH6:
        put(0, PREP_X, xa)
        put(0, PREP_Z, za)
        cnot_start = 1
        put(5, MEAS_X, xa)
        put(5, MEAS_Z, za)
    else:
        cnot_start = 0
        put(4, MEAS_X, xa, reset=True)
        put(4, MEAS_Z, za, reset=True)
        preamble_active = [GateLocation(0, PREP_X, (q,)) for q in xa]
        preamble_active += [GateLocation(0, PREP_Z, (q,)) for q in za]

    for t, gates in _cnot_steps(layout, cnot_start).items():
        active[t].extend(gates)

    gates: list[GateLocation] = []
    for t in range(depth):
        gates.extend(_with_idles(layout, t, active[t]))
    preamble: tuple[GateLocation, ...] = ()
    if preamble_active:
        preamble = tuple(_with_idles(layout, 0, preamble_active))

    sched = CircuitSchedule(variant, depth, tuple(gates), preamble)
    _validate(layout, sched)
    return sched


def _with_idles(layout: CodeLayout, t: int, gates: list[GateLocation]) -> list[GateLocation]:
    busy = {q for g in gates for q in g.qubits}
    idles = [GateLocation(t, IDLE, (q,)) for q in range(layout.n_qubits) if q not in busy]
    return sorted(gates, key=lambda g: g.qubits) + idles


def _validate(layout: CodeLayout, sched: CircuitSchedule) -> None:
    for step in sched.steps() + [list(sched.preamble)]:
        if not step:
            continue
        use = Counter(q for g in step for q in g.qubits)
        clash = [q for q, n in use.items() if n > 1]
        assert not clash, f"qubits {clash} double-booked at t={step[0].time_step}"
        assert len(use) == layout.n_qubits, "every qubit needs a gate (or IDLE) at every step"
    touched = Counter()
    for g in sched.gates:
        if g.kind == CNOT:
            touched[g.qubits] += 1
    for stab in layout.x_stabilizers:
        for q in stab.support:
            assert touched[(stab.ancilla, q)] == 1
    for stab in layout.z_stabilizers:
        for q in stab.support:
            assert touched[(q, stab.ancilla)] == 1


def idle_locations(schedule: CircuitSchedule) -> list[GateLocation]:
    """Every explicit identity location of one round."""
    return [g for g in schedule.gates if g.kind == IDLE]


def dump_schedule(schedule: CircuitSchedule) -> str:
    lines = []
    for g in schedule.preamble:
        lines.append(f"pre {g.kind} " + ",".join(map(str, g.qubits)))
    for g in sorted(schedule.gates, key=lambda g: (g.time_step, g.qubits)):
        kind = g.kind + ("+RESET" if g.reset else "")
        lines.append(f"t={g.time_step} {kind} " + ",".join(map(str, g.qubits)))
    return "\n".join(lines) + "\n"
