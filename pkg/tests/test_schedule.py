import re

import numpy as np
import pytest

from surfsim.lattice import build_code
from surfsim.pauli_sim import PauliFrame, measurement_flip, propagate
from surfsim.schedule import CNOT, HADAMARD, IDLE, Variant, build_schedule, dump_schedule, idle_locations

VARIANTS = list(Variant)


@pytest.mark.parametrize("variant", VARIANTS)
@pytest.mark.parametrize("d", [2, 3, 5])
def test_every_qubit_busy_once_per_step(variant, d):
    lay = build_code(d)
    sched = build_schedule(lay, variant)
    assert sched.depth == variant.depth
    for step in sched.steps():
        qs = [q for g in step for q in g.qubits]
        assert sorted(qs) == list(range(lay.n_qubits))
    n_cnot = sum(len(s.support) for s in lay.x_stabilizers + lay.z_stabilizers)
    assert sched.count(CNOT) == n_cnot


def test_variant_parse():
    assert Variant.parse("DEPTH5") is Variant.DEPTH5
    with pytest.raises(ValueError):
        Variant.parse("depth7")


def test_hadamards_only_in_depth8():
    lay = build_code(3)
    assert build_schedule(lay, "depth8").count(HADAMARD) == 2 * len(lay.x_stabilizers)
    assert build_schedule(lay, "depth6").count(HADAMARD) == 0
    assert build_schedule(lay, "depth5").count(HADAMARD) == 0
    assert build_schedule(lay, "depth5").preamble
    assert not build_schedule(lay, "depth6").preamble


def test_idles_fill_gaps():
    lay = build_code(3)
    sched = build_schedule(lay, "depth8")
    idles = idle_locations(sched)
    assert all(g.kind == IDLE for g in idles)
    # Z ancillas idle in the first and last step of the depth-8 round
    za = {s.ancilla for s in lay.z_stabilizers}
    assert za <= {g.qubits[0] for g in idles if g.time_step == 0}
    assert za <= {g.qubits[0] for g in idles if g.time_step == 7}


def _one_round(lay, sched, frame):
    """Gate-by-gate propagation; returns {ancilla: flip}."""
    out = {}
    for g in list(sched.preamble) + sorted(sched.gates, key=lambda g: g.time_step):
        frame = propagate(frame, g)
        if g.kind.startswith("MEAS"):
            out[g.qubits[0]] = measurement_flip(frame, g)
    return out


@pytest.mark.parametrize("variant", VARIANTS)
@pytest.mark.parametrize("d", [2, 3, 4])
def test_round_measures_stabilizers(variant, d):
    """A data Pauli present before the round flips exactly the anticommuting checks."""
    lay = build_code(d)
    sched = build_schedule(lay, variant)
    hz, hx = lay.check_matrix("Z"), lay.check_matrix("X")
    for q in range(lay.n_data):
        for kind in "XZ":
            f = PauliFrame.identity(lay.n_qubits)
            (f.x_bits if kind == "X" else f.z_bits)[q] = 1
            flips = _one_round(lay, sched, f)
            h, stabs = (hz, lay.z_stabilizers) if kind == "X" else (hx, lay.x_stabilizers)
            other = lay.x_stabilizers if kind == "X" else lay.z_stabilizers
            got = np.array([flips[s.ancilla] for s in stabs])
            assert np.array_equal(got, h[:, q]), (variant, q, kind)
            assert not any(flips[s.ancilla] for s in other)


def test_dump_format():
    text = dump_schedule(build_schedule(build_code(2), "depth5"))
    pat = re.compile(r"^(pre [A-Z_]+ \d+|t=\d+ [A-Z_]+(\+RESET)? \d+(,\d+)?)$")
    lines = text.splitlines()
    assert lines and all(pat.match(l) for l in lines)
    assert any("+RESET" in l for l in lines)
    assert text == dump_schedule(build_schedule(build_code(2), "depth5"))
