"""
A first threshold sweep
=======================

Builds a distance-3 planar code, looks at one extraction round, decodes a
few noisy trials by hand and finishes with a small sweep, a scaling fit
and an SVG plot. Runs in well under a minute.

    python demos/quickstart.py [outdir]
"""

import sys
from pathlib import Path

import numpy as np

from surfsim import build_code, build_schedule
from surfsim.lattice import dump_layout
from surfsim.decoder import Decoder, simulate_batch
from surfsim.experiment import RunConfig, points_to_csv, run_sweep
from surfsim.fit import fit_threshold
from surfsim.noise import NoiseModel
from surfsim.plot import render_svg
from surfsim.weights import derive_weights

out = Path(sys.argv[1] if len(sys.argv) > 1 else "quickstart_out")
out.mkdir(exist_ok=True)

# the code: 13 data qubits, 6 Z and 6 X stabilizers for d=3
layout = build_code(3)
print(dump_layout(layout))

# one round of syndrome extraction, six time steps deep
schedule = build_schedule(layout, "depth6")
print("steps per round:", schedule.depth)

# edge weights come from enumerating every single fault of the circuit
model = NoiseModel("standard", 0.004)
table = derive_weights(layout, schedule, model)
for err, graph in table.graphs.items():
    print(f"{err} graph: {graph.n_nodes} nodes, {len(graph.edges)} edges")

# 2000 noisy trials, decoded with the exact blossom matcher
rng = np.random.default_rng(0)
outcome = simulate_batch(layout, schedule, model, rng, 2000, rounds=3)
fails = Decoder(layout, table, "blossom").failures(outcome)
print("logical X failures:", int(fails["X"].sum()), " logical Z failures:", int(fails["Z"].sum()))

# a code-capacity sweep is cheap enough to fit right away
cfg = RunConfig(model="capacity", d_list=[5, 7, 9], p_list=list(np.linspace(0.09, 0.115, 6)),
                shots=20_000, seed=1)
points = run_sweep(cfg)
(out / "capacity.csv").write_text(points_to_csv(points, cfg))

fit = fit_threshold(points)
print(f"p_th = {fit.p_th:.4f} +- {fit.p_th_err:.4f}, nu0 = {fit.nu0:.2f}, R^2 = {fit.r_squared:.4f}")
(out / "capacity.json").write_text(fit.to_json())
(out / "capacity.svg").write_text(render_svg(points, fit, title="code capacity"))
print("wrote", out)
