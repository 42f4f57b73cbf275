"""Noise models and fault sampling.

Circuit-level models attach a fault probability to every gate location:
a faulty one- or two-qubit gate acts ideally and is followed by a uniformly
random non-identity Pauli; a faulty preparation produces the orthogonal
state and a faulty measurement reports the wrong outcome.

The code-capacity and phenomenological models act on data qubits (and
syndrome bits) directly. There each data qubit suffers an X flip with
probability ``p`` and, independently, a Z flip with probability ``p``; each
syndrome bit is misreported with probability ``p``. Because X and Z errors
are decoded separately, each decoding problem sees flip rate ``p``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Union

import numpy as np

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
from .lattice import CodeLayout

Number = Union[float, Fraction]

PAULI_1Q = ("X", "Y", "Z")
PAULI_2Q = tuple(a + b for a in "IXYZ" for b in "IXYZ")[1:]
_PAULI_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


def pauli_bits(label: str) -> tuple[int, int]:
    """``(x, z)`` frame bits of a single-qubit Pauli label."""
    return _PAULI_BITS[label]


class ModelKind(str, Enum):
    CODE_CAPACITY = "capacity"
    PHENOMENOLOGICAL = "pheno"
    STANDARD = "standard"
    BALANCED = "balanced"
    PERFECT_1Q = "perfect1q"

    @classmethod
    def parse(cls, value: "ModelKind | str") -> "ModelKind":
        if isinstance(value, cls):
            return value
        v = str(value).lower()
        for m in cls:
            if v in (m.value, m.name.lower()):
                return m
        raise ValueError(f"unknown noise model {value!r}")

    @property
    def is_circuit(self) -> bool:
        return self in (ModelKind.STANDARD, ModelKind.BALANCED, ModelKind.PERFECT_1Q)


# location classes carrying their own fault probability
LOCATION_CLASSES = ("gate1", "cnot", "prep", "meas", "idle")


def location_class(gate: GateLocation) -> str:
    if gate.kind == CNOT:
        return "cnot"
    if gate.kind == HADAMARD:
        return "gate1"
    if gate.kind == IDLE:
        return "idle"
    if gate.kind in (PREP_X, PREP_Z):
        return "prep"
    if gate.kind in (MEAS_X, MEAS_Z):
        return "meas"
    raise ValueError(f"unknown gate kind {gate.kind}")


@dataclass(frozen=True)
class NoiseModel:
    kind: ModelKind
    p: Number

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind.parse(self.kind))
        if not 0 <= self.p < 1:
            raise ValueError(f"physical error rate must lie in [0, 1), got {self.p}")

    def rates(self) -> dict[str, Number]:
        """Fault probability of each location class.

        Exact ``Fraction`` arithmetic is preserved when ``p`` is a Fraction.
        """
        p = self.p
        zero = p * 0
        if self.kind is ModelKind.STANDARD:
            return dict.fromkeys(LOCATION_CLASSES, p)
        if self.kind is ModelKind.BALANCED:
            return {
                "gate1": p * 4 / 5,
                "idle": p * 4 / 5,
                "prep": p * 2 / 3,
                "meas": p * 2 / 3,
                "cnot": p,
            }
        if self.kind is ModelKind.PERFECT_1Q:
            return {"gate1": zero, "idle": zero, "prep": zero, "meas": zero, "cnot": p}
        # data/syndrome models reuse the class names for their two channels
        return {"gate1": zero, "idle": p, "prep": zero, "meas": p, "cnot": zero}

    @property
    def p_1q(self) -> Number:
        return self.rates()["gate1"]

    @property
    def p_2q(self) -> Number:
        return self.rates()["cnot"]

    @property
    def p_prep(self) -> Number:
        return self.rates()["prep"]

    @property
    def p_meas(self) -> Number:
        return self.rates()["meas"]

    @property
    def p_idle(self) -> Number:
        return self.rates()["idle"]


@dataclass(frozen=True)
class FaultEvent:
    """A fault at one location.

    ``pauli`` is a one-letter label for one-qubit locations, a two-letter
    label (control first) for CNOTs and ``"FLIP"`` for preparation and
    measurement faults. ``channel`` separates the two independent channels
    of a fused measure-and-prepare location (``"meas"`` or ``"prep"``).
    """

    location: GateLocation
    pauli: str
    round: int = 0
    channel: str = ""


def fault_choices(gate: GateLocation) -> list[tuple[str, str]]:
    """All ``(channel, pauli)`` alternatives of a location."""
    cls = location_class(gate)
    if cls == "cnot":
        return [("cnot", s) for s in PAULI_2Q]
    if cls in ("gate1", "idle"):
        return [(cls, s) for s in PAULI_1Q]
    if cls == "meas" and gate.reset:
        return [("meas", "FLIP"), ("prep", "FLIP")]
    return [(cls, "FLIP")]


def choice_probability(model: NoiseModel, gate: GateLocation, channel: str) -> Number:
    rate = model.rates()[channel]
    cls = location_class(gate)
    if cls == "cnot":
        return rate / 15
    if cls in ("gate1", "idle"):
        return rate / 3
    return rate


def sample_circuit_faults(
    schedule: CircuitSchedule, model: NoiseModel, rng: np.random.Generator, round: int = 0
) -> list[FaultEvent]:
    """Independently sample faults at every location of one round."""
    if not model.kind.is_circuit:
        raise ValueError(f"{model.kind.value} model has no circuit locations")
    rates = model.rates()
    faults = []
    for gate in schedule.gates:
        choices = fault_choices(gate)
        if gate.reset:
            for channel, label in choices:
                if rng.random() < rates[channel]:
                    faults.append(FaultEvent(gate, label, round, channel))
            continue
        channel = choices[0][0]
        if rng.random() < rates[channel]:
            label = choices[int(rng.integers(len(choices)))][1]
            faults.append(FaultEvent(gate, label, round, channel))
    return faults


def sample_code_capacity(layout: CodeLayout, p: float, rng: np.random.Generator, shots: int | None = None):
    """X and Z flip patterns on data qubits; shape ``(n_data,)`` or ``(n_data, shots)``."""
    shape = (layout.n_data,) if shots is None else (layout.n_data, shots)
    return rng.random(shape) < p, rng.random(shape) < p


def sample_phenomenological(
    layout: CodeLayout, p: float, rng: np.random.Generator, rounds: int | None = None, shots: int | None = None
):
    """Per-round data flips and syndrome misreports.

    Returns ``(x_err, z_err, z_syn_flip, x_syn_flip)``: data flips of shape
    ``(rounds, n_data[, shots])`` and misreport flags of the Z- and X-type
    syndromes with shape ``(rounds, n_stab[, shots])``.
    """
    rounds = layout.distance if rounds is None else rounds
    tail = () if shots is None else (shots,)
    n, mz, mx = layout.n_data, len(layout.z_stabilizers), len(layout.x_stabilizers)
    return (
        rng.random((rounds, n) + tail) < p,
        rng.random((rounds, n) + tail) < p,
        rng.random((rounds, mz) + tail) < p,
        rng.random((rounds, mx) + tail) < p,
    )


# ---- batched draws used by the frame simulator ---------------------------

def draw_1q(rng: np.random.Generator, shape: tuple[int, int], p: float):
    """X and Z frame flips for a block of one-qubit locations."""
    fx = np.zeros(shape, dtype=bool)
    fz = np.zeros(shape, dtype=bool)
    if p <= 0:
        return fx, fz
    u = rng.random(shape)
    hit = np.nonzero(u < p)
    which = np.minimum(u[hit] * (3 / p), 2).astype(np.int8)  # 0 X, 1 Y, 2 Z
    fx[hit] = which < 2
    fz[hit] = which > 0
    return fx, fz


def draw_2q(rng: np.random.Generator, shape: tuple[int, int], p: float):
    """Frame flips ``(xc, zc, xt, zt)`` for a block of CNOT locations."""
    out = [np.zeros(shape, dtype=bool) for _ in range(4)]
    if p <= 0:
        return out
    u = rng.random(shape)
    hit = np.nonzero(u < p)
    k = np.minimum(u[hit] * (15 / p), 14).astype(np.int8) + 1  # 1..15, control = k >> 2
    c, t = k >> 2, k & 3
    out[0][hit] = (c == 1) | (c == 2)
    out[1][hit] = c >= 2
    out[2][hit] = (t == 1) | (t == 2)
    out[3][hit] = t >= 2
    return out


def draw_flip(rng: np.random.Generator, shape: tuple[int, int], p: float) -> np.ndarray:
    if p <= 0:
        return np.zeros(shape, dtype=bool)
    return rng.random(shape) < p
