import logging
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from moduli_api import BracketSource
from qdiff_core import ClosedFormBracket, ComparisonFailureError, ExtensionClass, NumericContext
from loop_rmatrix.client import LoopBracketSource

# Set up logger
logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ComparisonReport:
    """
    Outcome of comparing two bracket sources entrywise.

    Attributes:
        ratio (complex | None): The common ratio loop / moduli; None when skipped.
        max_residual (float): Largest relative deviation of an entry ratio from it.
        entries_compared (int): Number of entries with a usable denominator.
        ratios (np.ndarray): Entry ratios, NaN where the denominator was too small.
    """

    ratio: Optional[complex]
    max_residual: float
    entries_compared: int
    ratios: np.ndarray = field(compare=False)

    @property
    def skipped(self) -> bool:
        return self.ratio is None

    def to_dict(self) -> dict[str, Any]:
        """
        Serializes the report with complex values as [re, im].
        """
        return {
            "ratio": None if self.ratio is None else [self.ratio.real, self.ratio.imag],
            "max_residual": self.max_residual,
            "entries_compared": self.entries_compared,
            "skipped": self.skipped,
        }


def compare_brackets(
    x: ExtensionClass,
    ctx: NumericContext,
    loop: Optional[BracketSource] = None,
    moduli: Optional[BracketSource] = None,
    rtol: Optional[float] = None,
) -> ComparisonReport:
    """
    Compares the reduced loop bracket with the moduli bracket at x.

    Args:
        x (ExtensionClass): The class to compare at.
        ctx (NumericContext): Numerical settings.
        loop (BracketSource, optional): Numerator source; the lifted r-matrix bracket by default.
        moduli (BracketSource, optional): Denominator source; the closed form by default.
        rtol (float, optional): Allowed relative spread of the ratios; tol * 1e4 by default.

    Returns:
        ComparisonReport: The common ratio and its spread.

    Raises:
        ComparisonFailureError: If the entry ratios are not one constant.
    """
    loop = loop or LoopBracketSource(ctx)
    moduli = moduli or ClosedFormBracket(ctx)
    rtol = rtol if rtol is not None else ctx.tol * 1e4
    size = 2 * x.k
    if x.vanishes:
        logger.warning("x = 0: both brackets vanish, comparison skipped")
        return ComparisonReport(None, 0.0, 0, np.full((size, size), np.nan, dtype=complex))

    numerator = loop.matrix(x)
    denominator = moduli.matrix(x)
    usable = np.abs(denominator) > 1e-8 * np.max(np.abs(denominator))
    ratios = np.full((size, size), np.nan, dtype=complex)
    ratios[usable] = numerator[usable] / denominator[usable]
    if not usable.any():
        logger.warning("all moduli bracket entries vanish, comparison skipped")
        return ComparisonReport(None, 0.0, 0, ratios)

    ratio = complex(np.mean(ratios[usable]))
    residual = float(np.max(np.abs(ratios[usable] - ratio)) / abs(ratio))
    logger.debug(f"{loop.name}/{moduli.name} ratio {ratio:.12g}, spread {residual:.2e}")
    if residual > rtol:
        logger.error(f"ratio matrix:\n{ratios}")
        raise ComparisonFailureError(
            f"{loop.name}/{moduli.name} ratios vary by {residual:.2e} around {ratio:.6g}:\n{ratios}",
            ratios=ratios,
        )
    return ComparisonReport(ratio, residual, int(usable.sum()), ratios)
