"""Clone-based genome assembly with interval-graph repair."""

__version__ = "0.1.0"

from .estimator import BarnacleAssembler
from .interval import IntervalModel, brute_force_interval, is_interval, recognize_interval
from .model import AssemblyInput, Clone, Fragment, OrientationPair, PipelineParams, ValidOverlap
from .pipeline import AssemblyResult, run_pipeline
from .simulator import GroundTruth, SimParams, score_assembly, simulate

__all__ = [
    "AssemblyInput",
    "AssemblyResult",
    "BarnacleAssembler",
    "Clone",
    "Fragment",
    "GroundTruth",
    "IntervalModel",
    "OrientationPair",
    "PipelineParams",
    "SimParams",
    "ValidOverlap",
    "brute_force_interval",
    "is_interval",
    "recognize_interval",
    "run_pipeline",
    "score_assembly",
    "simulate",
]
