"""Pauli-frame simulation of repeated syndrome extraction.

Frames record the X and Z components of the accumulated error relative to
the ideal circuit. Every operation is a GF(2)-linear map on the frame bits,
so syndrome outcomes are stored as *flips* relative to the fault-free run
(whose outcomes are all +1 for a memory experiment started in the code
space).

Two engines live here: a gate-at-a-time reference (``propagate`` and
``simulate_faults``) used for checking, and a shot-batched engine
(``FrameSimulator``) that advances many trials at once with numpy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import CodeLayout
from .noise import (
    FaultEvent,
    ModelKind,
    NoiseModel,
    draw_1q,
    draw_2q,
    draw_flip,
    pauli_bits,
)
from .schedule import (
    CNOT,
    HADAMARD,
    IDLE,
    MEAS_X,
    MEAS_Z,
    PREP_X,
    PREP_Z,
    CircuitSchedule,
    GateLocation,
)


@dataclass
class PauliFrame:
    x_bits: np.ndarray
    z_bits: np.ndarray

    @classmethod
    def identity(cls, n: int) -> "PauliFrame":
        return cls(np.zeros(n, dtype=np.uint8), np.zeros(n, dtype=np.uint8))

    def copy(self) -> "PauliFrame":
        return PauliFrame(self.x_bits.copy(), self.z_bits.copy())

    def __xor__(self, other: "PauliFrame") -> "PauliFrame":
        return PauliFrame(self.x_bits ^ other.x_bits, self.z_bits ^ other.z_bits)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliFrame)
            and np.array_equal(self.x_bits, other.x_bits)
            and np.array_equal(self.z_bits, other.z_bits)
        )


def propagate(frame: PauliFrame, gate: GateLocation) -> PauliFrame:
    """Conjugate ``frame`` through one ideal gate."""
    f = frame.copy()
    x, z = f.x_bits, f.z_bits
    if gate.kind == CNOT:
        c, t = gate.qubits
        x[t] ^= x[c]
        z[c] ^= z[t]
    elif gate.kind == HADAMARD:
        (q,) = gate.qubits
        x[q], z[q] = z[q], x[q]
    elif gate.kind in (PREP_Z, PREP_X):
        (q,) = gate.qubits
        x[q] = z[q] = 0
    elif gate.kind in (MEAS_Z, MEAS_X, IDLE):
        pass
    else:
        raise ValueError(f"unknown gate kind {gate.kind}")
    return f


def measurement_flip(frame: PauliFrame, gate: GateLocation) -> int:
    """Whether the frame flips the outcome of a measurement gate."""
    (q,) = gate.qubits
    if gate.kind == MEAS_Z:
        return int(frame.x_bits[q])
    if gate.kind == MEAS_X:
        return int(frame.z_bits[q])
    raise ValueError(f"{gate.kind} is not a measurement")


@dataclass
class SyndromeHistory:
    """Syndrome flips of ``rounds`` noisy rounds plus one ideal closing round.

    ``z_rounds`` holds Z-stabilizer outcomes (sensitive to X errors) and
    ``x_rounds`` X-stabilizer outcomes, each of shape ``(rounds + 1, n_stab)``.
    """

    z_rounds: np.ndarray
    x_rounds: np.ndarray

    @property
    def rounds(self) -> int:
        return self.z_rounds.shape[0] - 1


@dataclass
class DetectionEventSet:
    z_events: np.ndarray  # (rounds + 1, n_z_stab), detects X errors
    x_events: np.ndarray  # (rounds + 1, n_x_stab), detects Z errors

    def events(self) -> list[tuple[int, str, int]]:
        """Sorted ``(round, stabilizer type, stabilizer index)`` triples."""
        out = [(int(t), "Z", int(s)) for t, s in zip(*np.nonzero(self.z_events))]
        out += [(int(t), "X", int(s)) for t, s in zip(*np.nonzero(self.x_events))]
        return sorted(out)

    def __len__(self) -> int:
        return int(self.z_events.sum() + self.x_events.sum())


def detection_events(history: SyndromeHistory) -> DetectionEventSet:
    """XOR of consecutive rounds, with an all-clear round before the first."""
    return DetectionEventSet(_diff(history.z_rounds), _diff(history.x_rounds))


def _diff(rounds: np.ndarray) -> np.ndarray:
    out = rounds.copy()
    out[1:] ^= rounds[:-1]
    return out


def dump_events(events: DetectionEventSet) -> str:
    return "".join(f"t={t} stab={s} type={k}\n" for t, k, s in events.events())


# ---- gate-at-a-time reference ---------------------------------------------

def _apply_fault(frame: PauliFrame, fault: FaultEvent) -> int:
    """Apply a fault after its gate; returns a measurement misreport bit."""
    g = fault.location
    if g.kind == CNOT:
        for q, label in zip(g.qubits, fault.pauli):
            bx, bz = pauli_bits(label)
            frame.x_bits[q] ^= bx
            frame.z_bits[q] ^= bz
        return 0
    (q,) = g.qubits
    if g.kind in (HADAMARD, IDLE):
        bx, bz = pauli_bits(fault.pauli)
        frame.x_bits[q] ^= bx
        frame.z_bits[q] ^= bz
        return 0
    if g.kind == PREP_Z or (g.kind == MEAS_Z and fault.channel == "prep"):
        frame.x_bits[q] ^= 1
        return 0
    if g.kind == PREP_X or (g.kind == MEAS_X and fault.channel == "prep"):
        frame.z_bits[q] ^= 1
        return 0
    return 1  # measurement misreport


def simulate_faults(
    layout: CodeLayout,
    schedule: CircuitSchedule,
    faults: list[FaultEvent],
    rounds: int | None = None,
) -> tuple[SyndromeHistory, PauliFrame]:
    """Reference simulation of an explicit fault list.

    Faults with ``round == -1`` sit in the preamble of depth-5 schedules.
    """
    rounds = layout.distance if rounds is None else rounds
    frame = PauliFrame.identity(layout.n_qubits)
    by_loc: dict[tuple[int, GateLocation], list[FaultEvent]] = {}
    for f in faults:
        by_loc.setdefault((f.round, f.location), []).append(f)

    row = {}
    for i, s in enumerate(layout.z_stabilizers):
        row[s.ancilla] = ("Z", i)
    for i, s in enumerate(layout.x_stabilizers):
        row[s.ancilla] = ("X", i)
    z_hist = np.zeros((rounds + 1, len(layout.z_stabilizers)), dtype=np.uint8)
    x_hist = np.zeros((rounds + 1, len(layout.x_stabilizers)), dtype=np.uint8)

    def run(gates, rnd):
        nonlocal frame
        steps: dict[int, list[GateLocation]] = {}
        for g in gates:
            steps.setdefault(g.time_step, []).append(g)
        for t in sorted(steps):
            for g in steps[t]:
                flip = 0
                if g.kind in (MEAS_Z, MEAS_X):
                    flip = measurement_flip(frame, g)
                    if g.reset:
                        q = g.qubits[0]
                        frame.x_bits[q] = frame.z_bits[q] = 0
                else:
                    frame = propagate(frame, g)
                for f in by_loc.get((rnd, g), ()):
                    flip ^= _apply_fault(frame, f)
                if g.kind in (MEAS_Z, MEAS_X) and rnd >= 0:
                    kind, i = row[g.qubits[0]]
                    (z_hist if kind == "Z" else x_hist)[rnd, i] = flip

    if schedule.preamble:
        run(schedule.preamble, -1)
    for r in range(rounds):
        run(schedule.gates, r)

    n = layout.n_data
    z_hist[rounds] = (layout.check_matrix("Z") @ frame.x_bits[:n]) % 2
    x_hist[rounds] = (layout.check_matrix("X") @ frame.z_bits[:n]) % 2
    residual = PauliFrame(frame.x_bits[:n].copy(), frame.z_bits[:n].copy())
    return SyndromeHistory(z_hist, x_hist), residual


# ---- batched engine ---------------------------------------------------------

@dataclass
class BatchOutcome:
    """Results of a batch of trials; the last axis indexes trials.

    ``z_flips``/``x_flips`` have shape ``(rounds + 1, n_stab, batch)`` with
    the ideal closing round last; ``data_x``/``data_z`` are the residual
    data frames, shape ``(n_data, batch)``.
    """

    z_flips: np.ndarray
    x_flips: np.ndarray
    data_x: np.ndarray
    data_z: np.ndarray

    def z_events(self) -> np.ndarray:
        return _diff(self.z_flips)

    def x_events(self) -> np.ndarray:
        return _diff(self.x_flips)

    def history(self, i: int) -> SyndromeHistory:
        return SyndromeHistory(self.z_flips[..., i].astype(np.uint8), self.x_flips[..., i].astype(np.uint8))


@dataclass
class _Step:
    cnot_c: np.ndarray
    cnot_t: np.ndarray
    had: np.ndarray
    prep_z: np.ndarray
    prep_x: np.ndarray
    meas_z: np.ndarray
    meas_x: np.ndarray
    idle: np.ndarray
    reset: bool
    locs: dict[str, list[GateLocation]] = field(default_factory=dict)


def _compile(gates) -> list[_Step]:
    by_t: dict[int, list[GateLocation]] = {}
    for g in gates:
        by_t.setdefault(g.time_step, []).append(g)
    steps = []
    for t in sorted(by_t):
        groups: dict[str, list[GateLocation]] = {k: [] for k in ("cnot", "had", "prep_z", "prep_x", "meas_z", "meas_x", "idle")}
        key = {CNOT: "cnot", HADAMARD: "had", PREP_Z: "prep_z", PREP_X: "prep_x", MEAS_Z: "meas_z", MEAS_X: "meas_x", IDLE: "idle"}
        for g in by_t[t]:
            groups[key[g.kind]].append(g)

        def arr(name, pos=0):
            return np.array([g.qubits[pos] for g in groups[name]], dtype=np.intp)

        resets = {g.reset for g in groups["meas_z"] + groups["meas_x"]}
        assert len(resets) <= 1
        steps.append(
            _Step(
                cnot_c=arr("cnot", 0),
                cnot_t=arr("cnot", 1),
                had=arr("had"),
                prep_z=arr("prep_z"),
                prep_x=arr("prep_x"),
                meas_z=arr("meas_z"),
                meas_x=arr("meas_x"),
                idle=arr("idle"),
                reset=bool(resets and resets.pop()),
                locs=groups,
            )
        )
    return steps


class RandomInjector:
    """Independent random faults drawn from a circuit-level noise model."""

    def __init__(self, model: NoiseModel, rng: np.random.Generator):
        if not model.kind.is_circuit:
            raise ValueError(f"{model.kind.value} model has no circuit locations")
        self.rates = {k: float(v) for k, v in model.rates().items()}
        self.rng = rng

    def one_qubit(self, rnd, step, group, shape):
        return draw_1q(self.rng, shape, self.rates["gate1" if group == "had" else "idle"])

    def two_qubit(self, rnd, step, shape):
        return draw_2q(self.rng, shape, self.rates["cnot"])

    def flips(self, rnd, step, group, channel, shape):
        return draw_flip(self.rng, shape, self.rates[channel])


class ExplicitInjector:
    """Places given faults, each in its own batch column (or a shared one).

    ``faults`` is a list of ``(column, FaultEvent)`` pairs.
    """

    def __init__(self, faults: list[tuple[int, FaultEvent]]):
        self.table: dict[tuple[int, GateLocation], list[tuple[int, FaultEvent]]] = {}
        for col, f in faults:
            self.table.setdefault((f.round, f.location), []).append((col, f))

    def _find(self, rnd, gates):
        for pos, g in enumerate(gates):
            for col, f in self.table.get((rnd, g), ()):
                yield pos, col, f

    def one_qubit(self, rnd, step, group, shape):
        fx, fz = np.zeros(shape, bool), np.zeros(shape, bool)
        for pos, col, f in self._find(rnd, step.locs[group]):
            bx, bz = pauli_bits(f.pauli)
            fx[pos, col] ^= bool(bx)
            fz[pos, col] ^= bool(bz)
        return fx, fz

    def two_qubit(self, rnd, step, shape):
        out = [np.zeros(shape, bool) for _ in range(4)]
        for pos, col, f in self._find(rnd, step.locs["cnot"]):
            for k, label in enumerate(f.pauli):
                bx, bz = pauli_bits(label)
                out[2 * k][pos, col] ^= bool(bx)
                out[2 * k + 1][pos, col] ^= bool(bz)
        return out

    def flips(self, rnd, step, group, channel, shape):
        out = np.zeros(shape, bool)
        for pos, col, f in self._find(rnd, step.locs[group]):
            if (f.channel or _default_channel(f.location)) == channel:
                out[pos, col] ^= True
        return out


def _default_channel(g: GateLocation) -> str:
    return "prep" if g.kind in (PREP_X, PREP_Z) else "meas"


class FrameSimulator:
    """Shot-batched Pauli-frame simulator for one (layout, schedule) pair."""

    def __init__(self, layout: CodeLayout, schedule: CircuitSchedule):
        self.layout = layout
        self.schedule = schedule
        self.steps = _compile(schedule.gates)
        self.preamble = _compile(schedule.preamble) if schedule.preamble else []
        n = layout.n_data
        # ancilla qubit -> (is_z_stab, row)
        self._anc_row = {}
        for i, s in enumerate(layout.z_stabilizers):
            self._anc_row[s.ancilla] = (True, i)
        for i, s in enumerate(layout.x_stabilizers):
            self._anc_row[s.ancilla] = (False, i)
        self._hz = layout.check_matrix("Z")
        self._hx = layout.check_matrix("X")
        self._n = n

    def _rows(self, qubits):
        zi = [(k, self._anc_row[q][1]) for k, q in enumerate(qubits) if self._anc_row[q][0]]
        xi = [(k, self._anc_row[q][1]) for k, q in enumerate(qubits) if not self._anc_row[q][0]]
        return zi, xi

    def run(self, injector, batch: int, rounds: int | None = None) -> BatchOutcome:
        lay = self.layout
        rounds = lay.distance if rounds is None else rounds
        nq = lay.n_qubits
        x = np.zeros((nq, batch), dtype=bool)
        z = np.zeros((nq, batch), dtype=bool)
        zf = np.zeros((rounds + 1, len(lay.z_stabilizers), batch), dtype=bool)
        xf = np.zeros((rounds + 1, len(lay.x_stabilizers), batch), dtype=bool)

        for step in self.preamble:
            self._step(step, -1, x, z, injector, batch, None, None)
        for r in range(rounds):
            for step in self.steps:
                self._step(step, r, x, z, injector, batch, zf[r], xf[r])

        dx, dz = x[: self._n], z[: self._n]
        zf[rounds] = (self._hz.astype(np.int32) @ dx) % 2
        xf[rounds] = (self._hx.astype(np.int32) @ dz) % 2
        return BatchOutcome(zf, xf, dx.copy(), dz.copy())

    def _step(self, s: _Step, rnd, x, z, inj, batch, zrow, xrow):
        if s.cnot_c.size:
            c, t = s.cnot_c, s.cnot_t
            x[t] ^= x[c]
            z[c] ^= z[t]
            xc, zc, xt, zt = inj.two_qubit(rnd, s, (c.size, batch))
            x[c] ^= xc
            z[c] ^= zc
            x[t] ^= xt
            z[t] ^= zt
        if s.had.size:
            h = s.had
            x[h], z[h] = z[h], x[h].copy()
            fx, fz = inj.one_qubit(rnd, s, "had", (h.size, batch))
            x[h] ^= fx
            z[h] ^= fz
        for arr, group, bit in ((s.prep_z, "prep_z", x), (s.prep_x, "prep_x", z)):
            if arr.size:
                x[arr] = False
                z[arr] = False
                bit[arr] ^= inj.flips(rnd, s, group, "prep", (arr.size, batch))
        for arr, group, bit, other in ((s.meas_z, "meas_z", x, z), (s.meas_x, "meas_x", z, x)):
            if not arr.size:
                continue
            out = bit[arr] ^ inj.flips(rnd, s, group, "meas", (arr.size, batch))
            if s.reset:
                bit[arr] = inj.flips(rnd, s, group, "prep", (arr.size, batch))
                other[arr] = False
            if zrow is not None:
                zi, xi = self._rows(arr.tolist())
                if zi:
                    k, rows = zip(*zi)
                    zrow[list(rows)] = out[list(k)]
                if xi:
                    k, rows = zip(*xi)
                    xrow[list(rows)] = out[list(k)]
        if s.idle.size:
            fx, fz = inj.one_qubit(rnd, s, "idle", (s.idle.size, batch))
            x[s.idle] ^= fx
            z[s.idle] ^= fz


def run_rounds(
    layout: CodeLayout,
    schedule: CircuitSchedule,
    model: NoiseModel,
    rng: np.random.Generator,
    rounds: int | None = None,
) -> tuple[SyndromeHistory, PauliFrame]:
    """Simulate one trial: ``rounds`` noisy rounds plus the ideal closing round."""
    out = FrameSimulator(layout, schedule).run(RandomInjector(model, rng), 1, rounds)
    residual = PauliFrame(out.data_x[:, 0].astype(np.uint8), out.data_z[:, 0].astype(np.uint8))
    return out.history(0), residual


# ---- data/syndrome-level models --------------------------------------------

def simulate_data_noise(
    layout: CodeLayout, model: NoiseModel, rng: np.random.Generator, batch: int, rounds: int | None = None
) -> BatchOutcome:
    """Batched trials of the code-capacity or phenomenological model.

    Code capacity uses a single perfect syndrome round (``rounds`` ignored).
    The phenomenological model runs ``rounds`` noisy rounds, each adding
    fresh data flips before a misreporting syndrome measurement, then the
    ideal closing round.
    """
    p = float(model.p)
    hz = layout.check_matrix("Z").astype(np.int32)
    hx = layout.check_matrix("X").astype(np.int32)
    if model.kind is ModelKind.CODE_CAPACITY:
        ex = rng.random((layout.n_data, batch)) < p
        ez = rng.random((layout.n_data, batch)) < p
        zf = ((hz @ ex) % 2).astype(bool)[None]
        xf = ((hx @ ez) % 2).astype(bool)[None]
        return BatchOutcome(zf, xf, ex, ez)
    if model.kind is not ModelKind.PHENOMENOLOGICAL:
        raise ValueError(f"{model.kind.value} is a circuit-level model")
    rounds = layout.distance if rounds is None else rounds
    n, mz, mx = layout.n_data, hz.shape[0], hx.shape[0]
    dx = np.cumsum(rng.random((rounds, n, batch)) < p, axis=0, dtype=np.int32) % 2
    dz = np.cumsum(rng.random((rounds, n, batch)) < p, axis=0, dtype=np.int32) % 2
    zf = np.empty((rounds + 1, mz, batch), dtype=bool)
    xf = np.empty((rounds + 1, mx, batch), dtype=bool)
    # float32 matmul is exact for these small counts and goes through BLAS
    hz32, hx32 = hz.astype(np.float32), hx.astype(np.float32)
    zf[:rounds] = (np.matmul(hz32, dx.astype(np.float32)) % 2).astype(bool) ^ (rng.random((rounds, mz, batch)) < p)
    xf[:rounds] = (np.matmul(hx32, dz.astype(np.float32)) % 2).astype(bool) ^ (rng.random((rounds, mx, batch)) < p)
    zf[rounds] = (hz @ dx[-1]) % 2
    xf[rounds] = (hx @ dz[-1]) % 2
    return BatchOutcome(zf, xf, dx[-1].astype(bool), dz[-1].astype(bool))
