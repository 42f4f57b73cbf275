"""
Circuit-level thresholds, all eight rows
========================================

The test suite runs three circuit-level rows at CI scale. This script runs
every row with the same recipe: distances 5, 7 and 9, five physical rates
spanning 0.85 to 1.15 times the reference threshold, 1e5 shots per point.
Each row leaves a CSV, a fit JSON and an SVG in the output directory, and
a summary table is printed at the end.

On one core a row takes roughly 2 to 4 minutes, so the full table needs
about 20 minutes. Use ``--workers`` on a bigger machine; the counts do not
depend on it.

    python demos/reproduce_table.py --out table_out [--shots 100000] [--rows 1,4]
"""

import argparse
import json
import time
from pathlib import Path

import numpy as np

from surfsim.experiment import RunConfig, points_to_csv, run_sweep
from surfsim.fit import fit_threshold
from surfsim.plot import render_svg

# (model, variant, weighting, reference threshold)
ROWS = [
    ("standard", "depth8", "circuit", 0.00502),
    ("standard", "depth6", "circuit", 0.00672),
    ("standard", "depth5", "circuit", 0.00846),
    ("balanced", "depth8", "circuit", 0.00576),
    ("balanced", "depth6", "circuit", 0.00749),
    ("balanced", "depth5", "circuit", 0.00905),
    ("perfect1q", "depth6", "circuit", 0.01140),
    ("standard", "depth6", "rectilinear", 0.00504),
]
TOLERANCE = 0.15


def run_row(model, variant, weighting, ref, args):
    cfg = RunConfig(model=model, variant=variant, weighting=weighting, d_list=args.d,
                    p_list=[round(ref * f, 6) for f in np.linspace(0.85, 1.15, 5)],
                    shots=args.shots, seed=args.seed, workers=args.workers)
    t0 = time.time()
    points = run_sweep(cfg)
    fit = fit_threshold(points)
    stem = args.out / f"{model}_{variant}_{weighting}"
    stem.with_suffix(".csv").write_text(points_to_csv(points, cfg))
    stem.with_suffix(".json").write_text(fit.to_json(reference=ref))
    stem.with_suffix(".svg").write_text(render_svg(points, fit, title=f"{model} {variant} {weighting}"))
    return fit, time.time() - t0


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--out", type=Path, default=Path("table_out"))
    ap.add_argument("--shots", type=int, default=100_000)
    ap.add_argument("--d", type=lambda s: [int(v) for v in s.split(",")], default=[5, 7, 9])
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--rows", type=lambda s: [int(v) for v in s.split(",")], default=None,
                    help="1-based row numbers to run (default all)")
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)

    summary = []
    for i, (model, variant, weighting, ref) in enumerate(ROWS, 1):
        if args.rows and i not in args.rows:
            continue
        fit, secs = run_row(model, variant, weighting, ref, args)
        rel = fit.p_th / ref - 1
        ok = abs(rel) <= TOLERANCE
        summary.append(dict(row=i, model=model, variant=variant, weighting=weighting, ref=ref,
                            p_th=fit.p_th, p_th_err=fit.p_th_err, nu0=fit.nu0, rel=rel, ok=ok, seconds=secs))
        print(f"{i}  {model:9s} {variant} {weighting:11s} p_th={fit.p_th:.5f}+-{fit.p_th_err:.5f} "
              f"ref={ref:.5f} {rel:+6.1%} {'PASS' if ok else 'FAIL'}  ({secs:.0f}s)", flush=True)
    (args.out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return 0 if all(r["ok"] for r in summary) else 1


if __name__ == "__main__":
    raise SystemExit(main())
