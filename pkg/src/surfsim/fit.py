"""Threshold fits with the quadratic finite-size scaling ansatz.

Near threshold the logical rate is modeled as

    p_l = A + B x + C x**2,    x = (p - p_th) * d ** (1 / nu0)

and the five parameters are found by weighted least squares with the
binomial standard error of each point as its sigma.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace
from statistics import median

import numpy as np
from scipy.optimize import least_squares

from .experiment import SweepPoint, crossing

PARAMS = ("A", "B", "C", "p_th", "nu0")
METHOD_NOTE = (
    "weighted least squares, sigma = binomial stderr of each point; "
    "parameter errors from the inverse curvature (J^T J)^-1 at the optimum"
)


class FitNonconvergence(RuntimeError):
    pass


@dataclass
class FitResult:
    p_th: float
    nu0: float
    A: float
    B: float
    C: float
    p_th_err: float
    nu0_err: float
    r_squared: float
    d_min: int
    n_points: int
    chi2: float = float("nan")

    @property
    def publication_grade(self) -> bool:
        return self.r_squared > 0.999

    def predict(self, p, d):
        return scaling_model(np.asarray([self.A, self.B, self.C, self.p_th, self.nu0]), np.asarray(p, float), np.asarray(d, float))

    def to_json(self, **extra) -> str:
        body = {"method": METHOD_NOTE, **asdict(self), "publication_grade": self.publication_grade, **extra}
        return json.dumps(body, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "FitResult":
        raw = json.loads(text)
        names = cls.__dataclass_fields__
        return cls(**{k: v for k, v in raw.items() if k in names})


def scaling_model(theta: np.ndarray, p: np.ndarray, d: np.ndarray) -> np.ndarray:
    A, B, C, p_th, nu0 = theta
    x = (p - p_th) * d ** (1.0 / nu0)
    return A + B * x + C * x * x


def _sigma(pt: SweepPoint) -> float:
    floor = 1.0 / pt.shots if pt.shots else 1.0
    return max(pt.stderr, floor) if math.isfinite(pt.stderr) else floor


def _select(points: list[SweepPoint], d_min: int) -> list[SweepPoint]:
    sel = [pt for pt in points if pt.d >= d_min]
    ds = sorted({pt.d for pt in sel})
    if len(ds) < 3:
        raise ValueError(f"need at least 3 distinct distances >= {d_min}, got {ds}")
    for d in ds:
        n = len({pt.p for pt in sel if pt.d == d})
        if n < 4:
            raise ValueError(f"distance {d} has {n} p values, need at least 4")
    return sel


def initial_guess(points: list[SweepPoint]) -> np.ndarray:
    ds = sorted({pt.d for pt in points})
    crosses = []
    for a, b in zip(ds, ds[1:]):
        try:
            c, _ = crossing(points, a, b)
        except ValueError:
            continue
        if math.isfinite(c):
            crosses.append(c)
    p_th = median(crosses) if crosses else float(np.mean([pt.p for pt in points]))
    nu0 = 1.0
    p = np.array([pt.p for pt in points])
    d = np.array([pt.d for pt in points], float)
    y = np.array([pt.p_l for pt in points])
    w = 1.0 / np.array([_sigma(pt) for pt in points])
    x = (p - p_th) * d ** (1 / nu0)
    design = np.stack([np.ones_like(x), x, x * x], axis=1) * w[:, None]
    (A, B, C), *_ = np.linalg.lstsq(design, y * w, rcond=None)
    return np.array([A, B, C, p_th, nu0])


def fit_threshold(points: list[SweepPoint], d_min: int = 0, x0=None, max_nfev: int = 20_000) -> FitResult:
    """Fit the scaling ansatz to the points with ``d >= d_min``.

    Raises
    ------
    ValueError
        Too few distances or p values.
    FitNonconvergence
        The optimizer stopped without meeting its tolerances.
    """
    sel = _select(points, d_min)
    p = np.array([pt.p for pt in sel])
    d = np.array([pt.d for pt in sel], float)
    y = np.array([pt.p_l for pt in sel])
    sig = np.array([_sigma(pt) for pt in sel])
    theta0 = initial_guess(sel) if x0 is None else np.asarray(x0, float)

    def resid(theta):
        return (y - scaling_model(theta, p, d)) / sig

    res = least_squares(resid, theta0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                        x_scale="jac", max_nfev=max_nfev)
    if res.status <= 0 or not np.all(np.isfinite(res.x)) or res.x[4] <= 0:
        raise FitNonconvergence(f"scaling fit did not converge: {res.message}")
    try:
        cov = np.linalg.inv(res.jac.T @ res.jac)
        errs = np.sqrt(np.clip(np.diag(cov), 0, None))
    except np.linalg.LinAlgError:
        errs = np.full(5, np.nan)
    w = 1 / sig**2
    ybar = np.sum(w * y) / np.sum(w)
    ss_tot = float(np.sum(w * (y - ybar) ** 2))
    chi2 = float(np.sum(res.fun**2))
    r2 = 1.0 - chi2 / ss_tot if ss_tot > 0 else 1.0
    A, B, C, p_th, nu0 = map(float, res.x)
    return FitResult(p_th, nu0, A, B, C, float(errs[3]), float(errs[4]),
                     float(min(max(r2, 0.0), 1.0)), int(d_min), len(sel), chi2)


def bootstrap_fit(points: list[SweepPoint], d_min: int = 0, replicas: int = 100, seed: int = 0) -> dict:
    """Spread of (p_th, nu0) over binomially redrawn datasets."""
    rng = np.random.default_rng(seed)
    base = fit_threshold(points, d_min)
    x0 = [base.A, base.B, base.C, base.p_th, base.nu0]
    got = []
    for _ in range(replicas):
        redrawn = []
        for pt in points:
            f = int(rng.binomial(pt.shots, pt.p_l)) if pt.shots else 0
            redrawn.append(replace(pt, failures=f, p_l=f / pt.shots,
                                   stderr=math.sqrt(f / pt.shots * (1 - f / pt.shots) / pt.shots)))
        try:
            r = fit_threshold(redrawn, d_min, x0=x0)
        except FitNonconvergence:
            continue
        got.append((r.p_th, r.nu0))
    arr = np.array(got)
    return {
        "replicas": len(got),
        "p_th_std": float(arr[:, 0].std(ddof=1)) if len(got) > 1 else float("nan"),
        "nu0_std": float(arr[:, 1].std(ddof=1)) if len(got) > 1 else float("nan"),
    }


def synthetic_points(theta, ds, ps, shots: int = 100_000, rng=None, rounds=None) -> list[SweepPoint]:
    """Points drawn from the ansatz itself; noiseless when ``rng`` is None."""
    out = []
    for d in ds:
        for p in ps:
            mean = float(scaling_model(np.asarray(theta, float), np.array(p), np.array(float(d))))
            if rng is None:
                f = round(mean * shots)
                pl = mean
            else:
                f = int(rng.binomial(shots, min(max(mean, 0.0), 1.0)))
                pl = f / shots
            se = math.sqrt(max(pl * (1 - pl), 1e-12) / shots)
            out.append(SweepPoint(d, p, shots, min(max(f, 0), shots), rounds or d, p_l=pl, stderr=se))
    return out
