"""``surfsim`` command line.

Exit status: 0 success, 1 usage or configuration error, 2 runtime error,
3 fit nonconvergence.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .experiment import RunConfig, chunk_rng, points_to_csv, read_csv, run_sweep
from .fit import FitNonconvergence, FitResult, bootstrap_fit, fit_threshold
from .lattice import build_code, dump_layout
from .noise import ModelKind, NoiseModel
from .pauli_sim import detection_events, dump_events
from .decoder import simulate_batch
from .plot import render_svg
from .schedule import build_schedule, dump_schedule
from .weights import derive_weights, rectilinear_weights, weights_csv

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_NONCONVERGENCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_p_list(text: str) -> list[float]:
    """``a,b,c`` or ``start:stop:count`` (inclusive, evenly spaced)."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"p range must be start:stop:count, got {text!r}")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise UsageError("p range count must be >= 1")
        return [float(round(v, 12)) for v in np.linspace(start, stop, count)]
    return [float(v) for v in text.split(",") if v.strip()]


def parse_d_list(text: str) -> list[int]:
    return [int(v) for v in str(text).split(",") if v.strip()]


_FIELD_PARSERS = {
    "d_list": parse_d_list,
    "p_list": parse_p_list,
    "shots": int, "min_failures": int, "max_shots": int, "seed": int, "workers": int, "chunk": int,
}


def read_config(text: str) -> dict:
    """Flat ``key=value`` lines with :class:`RunConfig` keys.

    Lines of the form ``# key=value`` are accepted too, so a sweep CSV's
    header can be used as a config file directly.
    """
    names = {f.name for f in dataclasses.fields(RunConfig)}
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        commented = line.startswith("#")
        line = line.lstrip("#").strip()
        if not line or "=" not in line:
            continue
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in names:
            if commented:
                continue
            raise UsageError(f"config line {n}: unknown key {key!r}; valid keys: {', '.join(sorted(names))}")
        try:
            out[key] = _FIELD_PARSERS.get(key, str)(value.strip())
        except ValueError as exc:
            raise UsageError(f"config line {n}: bad value for {key}: {exc}") from None
    return out


def resolve_config(args) -> RunConfig:
    values = {}
    if args.config:
        values.update(read_config(Path(args.config).read_text()))
    flags = {
        "model": args.model, "variant": args.variant, "weighting": args.weighting,
        "component": args.component, "shots": args.shots, "min_failures": args.min_failures,
        "max_shots": args.max_shots, "seed": args.seed, "workers": args.workers,
        "accounting": args.accounting, "chunk": args.chunk, "backend": args.backend,
        "output": args.out,
    }
    values.update({k: v for k, v in flags.items() if v is not None})
    if args.d is not None:
        values["d_list"] = parse_d_list(args.d)
    if args.p is not None:
        values["p_list"] = parse_p_list(args.p)
    cfg = RunConfig(**values)
    try:
        cfg.model = ModelKind.parse(cfg.model).value
        cfg.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return cfg


def _write(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_run(args) -> int:
    cfg = resolve_config(args)
    if args.dump_events:
        _dump_trials(cfg, args.dump_events)
    points = run_sweep(cfg)
    for pt in points:
        if not pt.converged:
            print(f"warning: d={pt.d} p={pt.p}: {pt.failures} failures in {pt.shots} shots, "
                  f"below min_failures={cfg.min_failures}", file=sys.stderr)
    _write(cfg.output or None, points_to_csv(points, cfg))
    return EXIT_OK


def _dump_trials(cfg: RunConfig, n: int) -> None:
    d, p = int(cfg.d_list[0]), float(cfg.p_list[0])
    kind = ModelKind.parse(cfg.model)
    layout = build_code(d)
    schedule = build_schedule(layout, cfg.variant) if kind.is_circuit else None
    rounds = 0 if kind is ModelKind.CODE_CAPACITY else d
    out = simulate_batch(layout, schedule, NoiseModel(kind, p), chunk_rng(cfg.seed, d, 0, 0), n, rounds)
    for i in range(n):
        sys.stderr.write(f"# trial {i} d={d} p={p}\n")
        sys.stderr.write(dump_events(detection_events(out.history(i))))


def _load_points(path: str):
    text = Path(path).read_text()
    meta, points = read_csv(text)
    return meta, points


def cmd_fit(args) -> int:
    _, points = _load_points(args.csv)
    if not points:
        raise UsageError(f"{args.csv} has no data rows")
    reports = []
    for d_min in args.d_min:
        try:
            res = fit_threshold(points, d_min)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        extra = {}
        if args.bootstrap:
            extra["bootstrap"] = bootstrap_fit(points, d_min, args.bootstrap, args.seed)
        reports.append(json.loads(res.to_json(**extra)))
    text = json.dumps(reports[0] if len(reports) == 1 else reports, indent=2, sort_keys=True) + "\n"
    _write(args.out, text)
    return EXIT_OK


def cmd_plot(args) -> int:
    _, points = _load_points(args.csv)
    if not points:
        raise UsageError(f"{args.csv} has no data rows; no plot written")
    fit = None
    if args.fit:
        raw = json.loads(Path(args.fit).read_text())
        if isinstance(raw, list):
            raw = raw[0]
        fit = FitResult.from_json(json.dumps(raw))
    svg = render_svg(points, fit, title=args.title or "")
    Path(args.out).write_text(svg)
    return EXIT_OK


def cmd_weights(args) -> int:
    kind = ModelKind.parse(args.model)
    layout = build_code(args.d)
    rounds = args.rounds if args.rounds is not None else (0 if kind is ModelKind.CODE_CAPACITY else args.d)
    if args.weighting == "rectilinear":
        table = rectilinear_weights(layout, rounds)
    else:
        schedule = build_schedule(layout, args.variant) if kind.is_circuit else None
        table = derive_weights(layout, schedule, NoiseModel(kind, args.p), rounds)
    _write(args.out, weights_csv(table))
    return EXIT_OK


def cmd_dump_layout(args) -> int:
    _write(args.out, dump_layout(build_code(args.d)))
    return EXIT_OK


def cmd_dump_schedule(args) -> int:
    _write(args.out, dump_schedule(build_schedule(build_code(args.d), args.variant)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="surfsim", description="Surface-code threshold simulations.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="Monte Carlo sweep over distances and error rates")
    run.add_argument("--config", help="flat key=value file; flags override it")
    run.add_argument("--model", choices=[k.value for k in ModelKind])
    run.add_argument("--variant", choices=["depth8", "depth6", "depth5"])
    run.add_argument("--weighting", choices=["circuit", "rectilinear"])
    run.add_argument("--component", choices=["x", "z", "auto"])
    run.add_argument("--d", help="comma-separated distances")
    run.add_argument("--p", help="comma list or start:stop:count")
    run.add_argument("--shots", type=int)
    run.add_argument("--min-failures", type=int)
    run.add_argument("--max-shots", type=int, help="shot cap per point (default 100x --shots)")
    run.add_argument("--seed", type=int)
    run.add_argument("--workers", type=int)
    run.add_argument("--chunk", type=int, help="trials per RNG chunk")
    run.add_argument("--accounting", choices=["per_d_rounds", "per_round"])
    run.add_argument("--backend", choices=["pymatching", "blossom"])
    run.add_argument("--dump-events", type=int, default=0, metavar="N",
                     help="print detection events of N trials of the first point to stderr")
    run.add_argument("--out", help="CSV path (default stdout)")
    run.set_defaults(func=cmd_run)

    fit = sub.add_parser("fit", help="fit the scaling ansatz to a sweep CSV")
    fit.add_argument("csv")
    fit.add_argument("--d-min", type=parse_d_list, default=[0],
                     help="smallest distance used; a comma list emits one fit per value")
    fit.add_argument("--bootstrap", type=int, default=0, metavar="N")
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--out")
    fit.set_defaults(func=cmd_fit)

    plot = sub.add_parser("plot", help="render a sweep CSV as SVG")
    plot.add_argument("csv")
    plot.add_argument("--fit", help="fit JSON to overlay")
    plot.add_argument("--title")
    plot.add_argument("--out", required=True)
    plot.set_defaults(func=cmd_plot)

    w = sub.add_parser("weights", help="dump the matching-graph edge table as CSV")
    w.add_argument("--model", default="standard")
    w.add_argument("--variant", default="depth6", choices=["depth8", "depth6", "depth5"])
    w.add_argument("--weighting", default="circuit", choices=["circuit", "rectilinear"])
    w.add_argument("--d", type=int, default=3)
    w.add_argument("--p", type=float, default=0.001)
    w.add_argument("--rounds", type=int)
    w.add_argument("--out")
    w.set_defaults(func=cmd_weights)

    lay = sub.add_parser("dump-layout", help="qubits and stabilizers of one code")
    lay.add_argument("--d", type=int, default=3)
    lay.add_argument("--out")
    lay.set_defaults(func=cmd_dump_layout)

    sch = sub.add_parser("dump-schedule", help="gate listing of one extraction round")
    sch.add_argument("--d", type=int, default=3)
    sch.add_argument("--variant", default="depth6", choices=["depth8", "depth6", "depth5"])
    sch.add_argument("--out")
    sch.set_defaults(func=cmd_dump_schedule)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"surfsim: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FitNonconvergence as exc:
        print(f"surfsim: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (OSError, RuntimeError, ValueError, AssertionError) as exc:
        print(f"surfsim: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
