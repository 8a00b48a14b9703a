"""
Loop r-matrix package.

This module exposes the SL2 loop bracket, its orbit points and the comparison
with the moduli bracket.
"""

from qdiff_core import ComparisonFailureError, NumericContext

from .client import LoopBracketSource
from .compare import ComparisonReport, compare_brackets
from .interface import ILoopBracket
from .kernels import KernelKind, RKernels, phi_values, tau_values
from .orbit import LoopOrbitPoint
from .rmatrix_bracket import RMatrixLoopBracket


def get_loop_bracket(ctx: NumericContext) -> ILoopBracket:
    """Return the r-matrix implementation of the ILoopBracket interface."""
    return RMatrixLoopBracket(ctx)


__all__ = [
    "ComparisonFailureError",
    "ComparisonReport",
    "ILoopBracket",
    "KernelKind",
    "LoopBracketSource",
    "LoopOrbitPoint",
    "RKernels",
    "RMatrixLoopBracket",
    "compare_brackets",
    "get_loop_bracket",
    "phi_values",
    "tau_values",
]
