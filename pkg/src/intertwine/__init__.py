"""Fractional powers and conformal intertwiners on H-type groups, checked numerically."""
from .errors import (BlockedPrecondition, ConvergenceError, DivergenceError, EvaluationError,
                     IntertwineError, InvalidArgument, PoleError, PrecisionError,
                     QuadratureError, UnsupportedDimension, UsageError)
from .htype import GroupPoint, HTypeStructure, build_standard, structure_for
from .kernels import FracOrder
from .quad import QuadratureSpec

__all__ = [
    "BlockedPrecondition", "ConvergenceError", "DivergenceError", "EvaluationError",
    "IntertwineError", "InvalidArgument", "PoleError", "PrecisionError", "QuadratureError",
    "UnsupportedDimension", "UsageError", "GroupPoint", "HTypeStructure", "build_standard",
    "structure_for", "FracOrder", "QuadratureSpec",
]
