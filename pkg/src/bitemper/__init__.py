"""Tempered-MCMC toolkit for multimodal targets on binary state spaces."""

__version__ = "1.0.0"

from .balancing import BalancingSpec, BoundTrace, bound_statistic, eval_balancing
from .estimator import EstimatorAccumulator
from .kernels import BACKEND
from .samplers import ReplicaState, WeightedSample, sample_multiplicity, step
from .state import BinaryState
from .target import TargetSpec, build_modes, exact_distribution, log_target
from .tempering import PTOptions, ReplicaLadder, run_pt

__all__ = [
    "BACKEND",
    "BalancingSpec",
    "BinaryState",
    "BoundTrace",
    "EstimatorAccumulator",
    "PTOptions",
    "ReplicaLadder",
    "ReplicaState",
    "TargetSpec",
    "WeightedSample",
    "bound_statistic",
    "build_modes",
    "eval_balancing",
    "exact_distribution",
    "log_target",
    "run_pt",
    "sample_multiplicity",
    "step",
]
