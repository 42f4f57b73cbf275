"""Monte Carlo sweeps over (d, p) grids.

Trials run in fixed-size chunks. Chunk ``k`` of point ``(d, p_index)`` draws
from a generator seeded by ``(seed, d, p_index, k)``, so a sweep's counts
depend only on its configuration, never on how chunks were spread over
worker processes. Stopping is decided chunk by chunk in index order.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from functools import lru_cache

import numpy as np

from .decoder import Decoder, simulate_batch
from .lattice import build_code
from .noise import ModelKind, NoiseModel
from .schedule import Variant, build_schedule
from .weights import derive_weights, rectilinear_weights

CSV_COLUMNS = (
    "model", "variant", "weighting", "component", "d", "p", "rounds",
    "shots", "failures", "p_l", "stderr", "accounting",
)
EXTRA_COLUMNS = ("p_l_naive", "converged")


class Accounting(str, Enum):
    PER_D_ROUNDS = "per_d_rounds"
    PER_ROUND = "per_round"

    @classmethod
    def parse(cls, value) -> "Accounting":
        if isinstance(value, cls):
            return value
        v = str(value).lower().replace("-", "_")
        for a in cls:
            if v == a.value:
                return a
        raise ValueError(f"unknown accounting {value!r} (per_d_rounds or per_round)")


@dataclass
class RunConfig:
    model: str = "standard"
    variant: str = "depth6"
    weighting: str = "circuit"
    component: str = "auto"
    d_list: list[int] = field(default_factory=lambda: [3, 5])
    p_list: list[float] = field(default_factory=lambda: [0.005])
    shots: int = 100_000
    min_failures: int = 1_000
    max_shots: int = 0  # 0: 100x shots
    seed: int = 0
    workers: int = 1
    accounting: str = "per_d_rounds"
    chunk: int = 5_000
    backend: str = "pymatching"
    output: str = ""

    def validate(self) -> "RunConfig":
        ModelKind.parse(self.model)
        Variant.parse(self.variant)
        Accounting.parse(self.accounting)
        if self.weighting not in ("circuit", "rectilinear"):
            raise ValueError(f"weighting must be 'circuit' or 'rectilinear', got {self.weighting!r}")
        if self.component.lower() not in ("x", "z", "auto"):
            raise ValueError(f"component must be x, z or auto, got {self.component!r}")
        if not self.d_list or any(int(d) < 2 for d in self.d_list):
            raise ValueError(f"distances must be integers >= 2, got {self.d_list}")
        if not self.p_list or any(not (0 <= p <= 0.2) for p in self.p_list):
            raise ValueError(f"physical error rates must lie in [0, 0.2], got {self.p_list}")
        if self.shots < 1 or self.chunk < 1 or self.workers < 1 or self.min_failures < 0:
            raise ValueError("shots, chunk and workers must be positive; min_failures >= 0")
        if self.backend not in ("blossom", "pymatching"):
            raise ValueError(f"unknown backend {self.backend!r}")
        return self

    def resolved_component(self) -> str:
        """Z for depth-8 circuits, X for everything else, unless set explicitly."""
        c = self.component.lower()
        if c != "auto":
            return c.upper()
        kind = ModelKind.parse(self.model)
        if kind.is_circuit and Variant.parse(self.variant) is Variant.DEPTH8:
            return "Z"
        return "X"

    def shot_cap(self) -> int:
        return self.max_shots or 100 * self.shots


@dataclass
class SweepPoint:
    d: int
    p: float
    shots: int
    failures: int
    rounds: int
    accounting: Accounting = Accounting.PER_D_ROUNDS
    p_l: float = float("nan")
    stderr: float = float("nan")
    p_l_naive: float = float("nan")  # p_l / rounds, first-order per-round rate
    converged: bool = True

    def __post_init__(self):
        self.d, self.p = int(self.d), float(self.p)
        if not 0 <= self.failures <= self.shots:
            raise ValueError(f"failures {self.failures} outside [0, {self.shots}]")
        self.accounting = Accounting.parse(self.accounting)
        if math.isnan(self.p_l):
            self.p_l = self.failures / self.shots if self.shots else float("nan")
        if math.isnan(self.stderr):
            self.stderr = binomial_stderr(self.p_l, self.shots)
        if math.isnan(self.p_l_naive) and self.accounting is Accounting.PER_D_ROUNDS:
            self.p_l_naive = self.p_l / self.rounds


def binomial_stderr(p_l: float, shots: int) -> float:
    if shots <= 0:
        return float("nan")
    return math.sqrt(max(p_l * (1 - p_l), 0.0) / shots)


def _rounds_for(model: ModelKind, d: int) -> int:
    return 1 if model is ModelKind.CODE_CAPACITY else d


def to_per_round(point: SweepPoint) -> SweepPoint:
    """Failure rate per measurement round.

    Treats the ``rounds`` rounds as independent channels composing by parity:
    ``1 - 2 p_l = (1 - 2 r) ** rounds``. The naive ``p_l / rounds`` is kept
    alongside in ``p_l_naive``.
    """
    if point.accounting is not Accounting.PER_D_ROUNDS:
        raise ValueError("point is already per round")
    if point.p_l >= 0.5:
        raise ValueError(f"p_l = {point.p_l} >= 1/2 has no per-round equivalent")
    n = point.rounds
    base = 1 - 2 * point.p_l
    r = (1 - base ** (1 / n)) / 2
    # delta method: dr/dp_l = base**(1/n - 1) / n
    err = point.stderr * base ** (1 / n - 1) / n
    return replace(point, accounting=Accounting.PER_ROUND, p_l=r, stderr=err, p_l_naive=point.p_l / n)


def from_per_round(point: SweepPoint) -> SweepPoint:
    """Inverse of :func:`to_per_round`."""
    if point.accounting is not Accounting.PER_ROUND:
        raise ValueError("point is not per round")
    n = point.rounds
    base = 1 - 2 * point.p_l
    p_l = (1 - base**n) / 2
    err = point.stderr * n * base ** (n - 1)
    return replace(point, accounting=Accounting.PER_D_ROUNDS, p_l=p_l, stderr=err, p_l_naive=p_l / n)


# ---- execution -------------------------------------------------------------------

@lru_cache(maxsize=16)
def _decoder(model: str, variant: str, weighting: str, d: int, p: float, backend: str):
    kind = ModelKind.parse(model)
    layout = build_code(d)
    schedule = build_schedule(layout, variant) if kind.is_circuit else None
    noise = NoiseModel(kind, p)
    if weighting == "rectilinear":
        rounds = 0 if kind is ModelKind.CODE_CAPACITY else d
        table = rectilinear_weights(layout, rounds)
    else:
        table = derive_weights(layout, schedule, noise)
    return layout, schedule, noise, Decoder(layout, table, backend)


def chunk_rng(seed: int, d: int, p_index: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, d, p_index, chunk]))


def run_chunk(task) -> int:
    """Failures of the tracked component in one chunk (worker entry point)."""
    model, variant, weighting, component, backend, d, p, p_index, k, size, seed = task
    if p == 0:
        return 0
    layout, schedule, noise, dec = _decoder(model, variant, weighting, d, p, backend)
    rounds = 0 if noise.kind is ModelKind.CODE_CAPACITY else d
    outcome = simulate_batch(layout, schedule, noise, chunk_rng(seed, d, p_index, k), size, rounds)
    return int(dec.failures(outcome, (component,))[component].sum())


def run_point(config: RunConfig, d: int, p_index: int, pool=None) -> SweepPoint:
    p = float(config.p_list[p_index])
    comp = config.resolved_component()
    cap = max(config.shot_cap(), config.shots)
    shots = failures = 0
    k = 0
    wave = max(1, config.workers)
    done = False
    while not done:
        tasks = []
        planned = shots
        for j in range(wave):
            if planned >= cap:
                break
            size = min(config.chunk, config.shots, cap - planned)
            tasks.append((config.model, config.variant, config.weighting, comp, config.backend,
                          d, p, p_index, k + j, size, config.seed))
            planned += size
        if not tasks:
            break
        results = list(pool.map(run_chunk, tasks)) if pool is not None else [run_chunk(t) for t in tasks]
        for t, f in zip(tasks, results):
            shots += t[9]
            failures += f
            k += 1
            if shots >= config.shots and failures >= config.min_failures:
                done = True
                break
            if shots >= cap:
                done = True
                break
    converged = shots >= config.shots and failures >= config.min_failures
    kind = ModelKind.parse(config.model)
    pt = SweepPoint(d, p, shots, failures, _rounds_for(kind, d), converged=converged)
    if Accounting.parse(config.accounting) is Accounting.PER_ROUND and pt.p_l < 0.5:
        pt = to_per_round(pt)
    return pt


def run_sweep(config: RunConfig) -> list[SweepPoint]:
    """All (d, p) points of ``config``, d-major.

    Each point runs until ``shots`` trials and ``min_failures`` failures are
    reached, or the shot cap is hit (``converged`` is then False).
    """
    config.validate()
    pool = ProcessPoolExecutor(config.workers) if config.workers > 1 else None
    try:
        return [run_point(config, int(d), i, pool) for d in config.d_list for i in range(len(config.p_list))]
    finally:
        if pool is not None:
            pool.shutdown()


# ---- CSV -------------------------------------------------------------------------

def config_lines(config: RunConfig) -> list[str]:
    out = []
    for k, v in asdict(config).items():
        if k in ("output", "workers"):  # neither changes the numbers
            continue
        if isinstance(v, list):
            v = ",".join(repr(x) if isinstance(x, float) else str(x) for x in v)
        out.append(f"{k}={v}")
    return out


def points_to_csv(points: list[SweepPoint], config: RunConfig) -> str:
    buf = io.StringIO()
    for line in config_lines(config):
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS + EXTRA_COLUMNS)
    kind = ModelKind.parse(config.model)
    variant = Variant.parse(config.variant).value if kind.is_circuit else "none"
    for pt in points:
        w.writerow([
            kind.value, variant, config.weighting, config.resolved_component(), pt.d, repr(pt.p),
            pt.rounds, pt.shots, pt.failures, f"{pt.p_l:.12g}", f"{pt.stderr:.12g}", pt.accounting.value,
            f"{pt.p_l_naive:.12g}", int(pt.converged),
        ])
    return buf.getvalue()


def read_csv(text: str) -> tuple[dict[str, str], list[SweepPoint]]:
    """Parse a sweep CSV into (embedded config entries, points)."""
    meta: dict[str, str] = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key.strip()] = value.strip()
        elif line.strip():
            body.append(line)
    if not body:
        raise ValueError("CSV has no header row")
    header = next(csv.reader(body[:1]))
    missing = [c for c in CSV_COLUMNS if c not in header]
    if missing:
        raise ValueError(f"CSV is missing columns {missing}")
    points = []
    for r in csv.DictReader(body):
        points.append(SweepPoint(
            d=int(r["d"]), p=float(r["p"]), shots=int(r["shots"]), failures=int(r["failures"]),
            rounds=int(r["rounds"]), accounting=r["accounting"], p_l=float(r["p_l"]),
            stderr=float(r["stderr"]),
            p_l_naive=float(r.get("p_l_naive") or "nan"),
            converged=bool(int(r.get("converged") or 1)),
        ))
    return meta, points


# ---- crossings -------------------------------------------------------------------

def _curve(points: list[SweepPoint], d: int):
    sel = sorted((pt for pt in points if pt.d == d), key=lambda pt: pt.p)
    return np.array([pt.p for pt in sel]), np.array([pt.p_l for pt in sel]), sel


def _cross(p: np.ndarray, ya: np.ndarray, yb: np.ndarray) -> float:
    diff = yb - ya
    for i in range(len(p) - 1):
        if diff[i] == 0:
            return float(p[i])
        if diff[i] * diff[i + 1] < 0:
            t = diff[i] / (diff[i] - diff[i + 1])
            return float(p[i] + t * (p[i + 1] - p[i]))
    if diff[-1] == 0:
        return float(p[-1])
    return float("nan")


def crossing(points: list[SweepPoint], d_a: int, d_b: int, bootstrap: int = 0, seed: int = 0):
    """Where the p_l curves of ``d_a`` and ``d_b`` intersect.

    Both curves are linearly interpolated on their common p grid. With
    ``bootstrap > 0`` each replica redraws every point's failure count from
    its binomial estimate; the error is the replicas' standard deviation.
    Returns ``(p_cross, err)``; ``p_cross`` is NaN when the curves do not
    cross inside the grid.
    """
    pa, ya, sa = _curve(points, d_a)
    pb, yb, sb = _curve(points, d_b)
    if len(pa) < 2 or not np.array_equal(pa, pb):
        raise ValueError("both distances need the same p grid with at least two points")
    best = _cross(pa, ya, yb)
    if bootstrap <= 0:
        return best, float("nan")
    rng = np.random.default_rng(seed)

    def redraw(sel):
        out = []
        for pt in sel:
            f = rng.binomial(pt.shots, pt.failures / pt.shots) if pt.shots else 0
            q = SweepPoint(pt.d, pt.p, pt.shots, int(f), pt.rounds)
            out.append(to_per_round(q).p_l if pt.accounting is Accounting.PER_ROUND and q.p_l < 0.5 else q.p_l)
        return np.array(out)

    reps = [_cross(pa, redraw(sa), redraw(sb)) for _ in range(bootstrap)]
    reps = np.array([r for r in reps if np.isfinite(r)])
    return best, float(reps.std(ddof=1)) if len(reps) > 1 else float("nan")
