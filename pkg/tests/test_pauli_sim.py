import re

import numpy as np
import pytest

from surfsim.lattice import build_code
from surfsim.noise import NoiseModel, sample_circuit_faults
from surfsim.pauli_sim import (
    ExplicitInjector,
    FrameSimulator,
    PauliFrame,
    detection_events,
    dump_events,
    propagate,
    run_rounds,
    simulate_data_noise,
    simulate_faults,
)
from surfsim.schedule import CNOT, HADAMARD, GateLocation, Variant, build_schedule


def frame(n, x=(), z=()):
    f = PauliFrame.identity(n)
    for q in x:
        f.x_bits[q] = 1
    for q in z:
        f.z_bits[q] = 1
    return f


def test_cnot_rules():
    g = GateLocation(0, CNOT, (0, 1))
    assert propagate(frame(2, x=[0]), g) == frame(2, x=[0, 1])
    assert propagate(frame(2, z=[1]), g) == frame(2, z=[0, 1])
    assert propagate(frame(2, x=[1]), g) == frame(2, x=[1])
    assert propagate(frame(2, z=[0]), g) == frame(2, z=[0])


def test_hadamard_swaps():
    g = GateLocation(0, HADAMARD, (0,))
    assert propagate(frame(1, x=[0]), g) == frame(1, z=[0])
    assert propagate(frame(1, x=[0], z=[0]), g) == frame(1, x=[0], z=[0])


@pytest.mark.parametrize("variant", list(Variant))
def test_batched_matches_reference(variant):
    """The vectorised engine and the gate-by-gate reference agree fault list by fault list."""
    lay = build_code(3)
    sched = build_schedule(lay, variant)
    rng = np.random.default_rng(11)
    model = NoiseModel("standard", 0.05)
    rounds = 3
    lists = []
    for _ in range(25):
        faults = []
        for r in range(rounds):
            faults += sample_circuit_faults(sched, model, rng, r)
        lists.append(faults)
    inj = ExplicitInjector([(col, f) for col, fl in enumerate(lists) for f in fl])
    out = FrameSimulator(lay, sched).run(inj, len(lists), rounds)
    for col, fl in enumerate(lists):
        hist, residual = simulate_faults(lay, sched, fl, rounds)
        assert np.array_equal(hist.z_rounds, out.z_flips[..., col].astype(np.uint8))
        assert np.array_equal(hist.x_rounds, out.x_flips[..., col].astype(np.uint8))
        assert np.array_equal(residual.x_bits[: lay.n_data], out.data_x[:, col])


def test_noiseless_rounds_are_quiet():
    lay = build_code(3)
    for variant in Variant:
        hist, res = run_rounds(lay, build_schedule(lay, variant), NoiseModel("standard", 0.0), np.random.default_rng(0))
        assert hist.rounds == 3
        assert len(detection_events(hist)) == 0
        assert not res.x_bits.any() and not res.z_bits.any()


def test_final_round_closes_syndrome():
    """Cumulative events of each check equal the final syndrome of the residual error."""
    lay = build_code(3)
    sched = build_schedule(lay, "depth6")
    hist, res = run_rounds(lay, sched, NoiseModel("standard", 0.02), np.random.default_rng(3))
    ev = detection_events(hist)
    assert np.array_equal(ev.z_events.sum(axis=0) % 2, (lay.check_matrix("Z") @ res.x_bits[: lay.n_data]) % 2)
    assert np.array_equal(ev.x_events.sum(axis=0) % 2, (lay.check_matrix("X") @ res.z_bits[: lay.n_data]) % 2)


def test_measurement_error_gives_time_pair():
    lay = build_code(3)
    sched = build_schedule(lay, "depth6")
    meas = next(g for g in sched.gates if g.kind == "MEAS_Z")
    from surfsim.noise import FaultEvent

    hist, _ = simulate_faults(lay, sched, [FaultEvent(meas, "FLIP", 1, "meas")], 3)
    events = detection_events(hist).events()
    s = [i for i, st in enumerate(lay.z_stabilizers) if st.ancilla == meas.qubits[0]][0]
    assert events == [(1, "Z", s), (2, "Z", s)]


def test_capacity_syndrome_is_parity():
    lay = build_code(5)
    out = simulate_data_noise(lay, NoiseModel("capacity", 0.1), np.random.default_rng(2), 50)
    assert out.z_flips.shape == (1, len(lay.z_stabilizers), 50)
    assert np.array_equal(out.z_flips[0], (lay.check_matrix("Z").astype(int) @ out.data_x) % 2)


def test_pheno_rates():
    lay = build_code(5)
    out = simulate_data_noise(lay, NoiseModel("pheno", 0.0), np.random.default_rng(2), 10)
    assert not out.z_flips.any() and out.z_flips.shape[0] == 6


def test_dump_events_format():
    lay = build_code(3)
    hist, _ = run_rounds(lay, build_schedule(lay, "depth5"), NoiseModel("standard", 0.05), np.random.default_rng(9))
    text = dump_events(detection_events(hist))
    for line in text.splitlines():
        assert re.fullmatch(r"t=\d+ stab=\d+ type=[XZ]", line)
