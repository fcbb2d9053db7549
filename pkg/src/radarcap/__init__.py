"""Rates, bounds and optimized discrete inputs for an AWGN channel hit by a
constant-amplitude, random-phase interferer."""

from ._backend import BACKEND
from .bounds import BoundSet, bound_envelope
from .channel import ChannelParams, DiscreteInput, InfeasibleInputError
from .optimizer import (
    KktReport,
    OptimizationResult,
    OptimizerConfig,
    escalate_mass_points,
    estimate_lambda,
    g_function,
    kkt_report,
    optimize,
    optimize_input,
    optimize_probabilities,
)
from .quadrature import QuadratureConfig, QuadratureError
from .rates import RateBreakdown, gaussian_input_rate, mutual_information, noise_modsq_entropy

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoundSet",
    "ChannelParams",
    "DiscreteInput",
    "InfeasibleInputError",
    "KktReport",
    "OptimizationResult",
    "OptimizerConfig",
    "QuadratureConfig",
    "QuadratureError",
    "RateBreakdown",
    "bound_envelope",
    "escalate_mass_points",
    "estimate_lambda",
    "g_function",
    "gaussian_input_rate",
    "kkt_report",
    "mutual_information",
    "noise_modsq_entropy",
    "optimize",
    "optimize_input",
    "optimize_probabilities",
]
