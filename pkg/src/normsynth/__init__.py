"""Synthesis of parametric tax-society norms aligned with several values via MOEAs."""

from .errors import ConfigurationError, DomainError
from .objectives import Evaluator, ProblemSpec, evaluate
from .society import NormVector, SocietyConfig, SocietyState, run_path

__all__ = [
    "ConfigurationError",
    "DomainError",
    "Evaluator",
    "NormVector",
    "ProblemSpec",
    "SocietyConfig",
    "SocietyState",
    "evaluate",
    "run_path",
]

__version__ = "0.1.0"
