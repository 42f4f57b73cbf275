"""Surface-code threshold estimation under circuit-level Pauli noise.

Typical use::

    from surfsim import RunConfig, run_sweep, fit_threshold
    pts = run_sweep(RunConfig(model="capacity", d_list=[5, 7, 9],
                              p_list=[0.098, 0.103, 0.108], shots=20_000))
"""

from .lattice import CodeLayout, Stabilizer, build_code
from .schedule import CircuitSchedule, GateLocation, Variant, build_schedule
from .noise import FaultEvent, ModelKind, NoiseModel
from .pauli_sim import DetectionEventSet, PauliFrame, SyndromeHistory, detection_events, run_rounds
from .weights import EdgeWeightTable, derive_weights, rectilinear_weights
from .matcher import Matching, MatchingGraph, brute_force_matching, min_weight_perfect_matching
from .decoder import Correction, Decoder, TrialOutcome, decode_trial, logical_failure, matching_to_correction
from .experiment import Accounting, RunConfig, SweepPoint, crossing, from_per_round, run_sweep, to_per_round
from .fit import FitNonconvergence, FitResult, fit_threshold

__version__ = "0.1.0"

__all__ = [
    "CodeLayout", "Stabilizer", "build_code",
    "CircuitSchedule", "GateLocation", "Variant", "build_schedule",
    "FaultEvent", "ModelKind", "NoiseModel",
    "DetectionEventSet", "PauliFrame", "SyndromeHistory", "detection_events", "run_rounds",
    "EdgeWeightTable", "derive_weights", "rectilinear_weights",
    "Matching", "MatchingGraph", "brute_force_matching", "min_weight_perfect_matching",
    "Correction", "Decoder", "TrialOutcome", "decode_trial", "logical_failure", "matching_to_correction",
    "Accounting", "RunConfig", "SweepPoint", "crossing", "from_per_round", "run_sweep", "to_per_round",
    "FitNonconvergence", "FitResult", "fit_threshold",
]
