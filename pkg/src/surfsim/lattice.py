"""Planar surface code geometry.

Qubits live on a ``(2d-1) x (2d-1)`` grid of integer ``(row, col)``
coordinates. Sites with ``row + col`` even hold data qubits; the remaining
sites hold ancillas. An ancilla at ``(even, odd)`` measures a Z-type face
stabilizer and one at ``(odd, even)`` measures an X-type vertex stabilizer.

X errors are therefore detected by Z stabilizers and terminate on the left
and right boundaries; the minimal X logical runs along row 0. Z errors are
detected by X stabilizers and terminate on the top and bottom boundaries;
the minimal Z logical runs down column 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

# (north, west, east, south); the order of Stabilizer.neighbors
DIRECTIONS = {
    "N": (-1, 0),
    "W": (0, -1),
    "E": (0, 1),
    "S": (1, 0),
}
NEIGHBOR_ORDER = ("N", "W", "E", "S")


@dataclass(frozen=True, eq=False)
class Stabilizer:
    kind: str  # "X" or "Z"
    coord: tuple[int, int]
    ancilla: int  # global qubit index of the measuring ancilla
    neighbors: dict[str, int]  # direction -> data-qubit index

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(self.neighbors[k] for k in NEIGHBOR_ORDER if k in self.neighbors)


@dataclass(frozen=True, eq=False)
class CodeLayout:
    """Distance-``d`` planar code with one logical qubit.

    Data qubits take indices ``0 .. n_data-1`` and ancillas follow, both in
    row-major coordinate order. Stabilizers are indexed row-major within
    their own type.
    """

    distance: int
    data_coords: tuple[tuple[int, int], ...]
    ancilla_coords: tuple[tuple[int, int], ...]
    x_stabilizers: tuple[Stabilizer, ...]
    z_stabilizers: tuple[Stabilizer, ...]
    logical_x_support: tuple[int, ...]
    logical_z_support: tuple[int, ...]
    _index: dict = field(repr=False, compare=False, default_factory=dict)

    @property
    def n_data(self) -> int:
        return len(self.data_coords)

    @property
    def n_qubits(self) -> int:
        return len(self.data_coords) + len(self.ancilla_coords)

    @property
    def size(self) -> int:
        return 2 * self.distance - 1

    def qubit_at(self, coord: tuple[int, int]) -> int | None:
        return self._index.get(coord)

    def stabilizers(self, kind: str) -> tuple[Stabilizer, ...]:
        if kind == "X":
            return self.x_stabilizers
        if kind == "Z":
            return self.z_stabilizers
        raise ValueError(f"unknown stabilizer kind {kind!r}")

    def check_matrix(self, kind: str) -> np.ndarray:
        """0/1 matrix with one row per ``kind`` stabilizer and one column per data qubit."""
        stabs = self.stabilizers(kind)
        h = np.zeros((len(stabs), self.n_data), dtype=np.uint8)
        for i, s in enumerate(stabs):
            h[i, list(s.support)] = 1
        return h

    def logical_mask(self, kind: str) -> np.ndarray:
        support = self.logical_x_support if kind == "X" else self.logical_z_support
        mask = np.zeros(self.n_data, dtype=np.uint8)
        mask[list(support)] = 1
        return mask


def build_code(d: int) -> CodeLayout:
    """Construct the distance-``d`` planar surface code (``d >= 2``).

    Layouts are immutable and cached, so equal distances share one object.
    """
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise ValueError(f"distance must be an integer >= 2, got {d!r}")
    return _build_code(int(d))


@lru_cache(maxsize=None)
def _build_code(d: int) -> CodeLayout:
    size = 2 * d - 1
    data = [(r, c) for r in range(size) for c in range(size) if (r + c) % 2 == 0]
    anc = [(r, c) for r in range(size) for c in range(size) if (r + c) % 2 == 1]
    index = {rc: i for i, rc in enumerate(data)}
    index.update({rc: len(data) + i for i, rc in enumerate(anc)})

    x_stabs, z_stabs = [], []
    for rc in anc:
        r, c = rc
        nbrs = {}
        for name in NEIGHBOR_ORDER:
            dr, dc = DIRECTIONS[name]
            q = (r + dr, c + dc)
            if 0 <= q[0] < size and 0 <= q[1] < size:
                nbrs[name] = index[q]
        kind = "Z" if r % 2 == 0 else "X"
        stab = Stabilizer(kind, rc, index[rc], nbrs)
        (z_stabs if kind == "Z" else x_stabs).append(stab)

    logical_x = tuple(index[(0, c)] for c in range(0, size, 2))
    logical_z = tuple(index[(r, 0)] for r in range(0, size, 2))
    return CodeLayout(
        distance=d,
        data_coords=tuple(data),
        ancilla_coords=tuple(anc),
        x_stabilizers=tuple(x_stabs),
        z_stabilizers=tuple(z_stabs),
        logical_x_support=logical_x,
        logical_z_support=logical_z,
        _index=index,
    )


def commutes(support_a: Iterable[int], type_a: str, support_b: Iterable[int], type_b: str) -> bool:
    """Whether two single-type Pauli operators commute."""
    for t in (type_a, type_b):
        if t not in ("X", "Z"):
            raise ValueError(f"pauli type must be 'X' or 'Z', got {t!r}")
    if type_a == type_b:
        return True
    return len(set(support_a) & set(support_b)) % 2 == 0


def syndrome(layout: CodeLayout, kind: str, error: Sequence[int] | np.ndarray) -> np.ndarray:
    """Syndrome bits of ``kind`` stabilizers for a data-qubit error bit vector."""
    h = layout.check_matrix(kind)
    return (h @ np.asarray(error, dtype=np.uint8)) % 2


def dump_layout(layout: CodeLayout) -> str:
    """Stable line-per-object description used for golden-file checks."""
    lines = [f"distance {layout.distance}"]
    for i, (r, c) in enumerate(layout.data_coords):
        lines.append(f"data {i} ({r},{c})")
    for kind in ("X", "Z"):
        for i, s in enumerate(layout.stabilizers(kind)):
            nb = " ".join(f"{k}={s.neighbors[k]}" for k in NEIGHBOR_ORDER if k in s.neighbors)
            lines.append(f"stab{kind} {i} anc={s.ancilla} ({s.coord[0]},{s.coord[1]}) {nb}")
    lines.append("logicalX " + ",".join(map(str, layout.logical_x_support)))
    lines.append("logicalZ " + ",".join(map(str, layout.logical_z_support)))
    return "\n".join(lines) + "\n"
