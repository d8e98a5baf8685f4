"""Combinatorial invariants and complexity counts of unimodal interval maps."""

from .arith import CertifiedPoint, Interval
from .errors import (
    BudgetExceeded,
    HorizonExceeded,
    HypothesisViolation,
    NoFixedPoint,
    NotACuttingSequence,
    PrecisionExhausted,
    RenormalizationDetected,
    UnimodalError,
)
from .map_core import MapSpec, evaluate, fixed_point_q, hat_point, iterate, monotone_branches

__all__ = [
    "BudgetExceeded",
    "CertifiedPoint",
    "HorizonExceeded",
    "HypothesisViolation",
    "Interval",
    "MapSpec",
    "NoFixedPoint",
    "NotACuttingSequence",
    "PrecisionExhausted",
    "RenormalizationDetected",
    "UnimodalError",
    "evaluate",
    "fixed_point_q",
    "hat_point",
    "iterate",
    "monotone_branches",
]

__version__ = "0.1.0"
