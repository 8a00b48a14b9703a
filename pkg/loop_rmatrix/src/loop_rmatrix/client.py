from typing import Optional

import numpy as np

from qdiff_core import ExtensionClass, NumericContext
from loop_rmatrix.interface import ILoopBracket
from loop_rmatrix.orbit import LoopOrbitPoint
from loop_rmatrix.rmatrix_bracket import RMatrixLoopBracket


class LoopBracketSource:
    """
    Adapter exposing a loop bracket as a bracket source on extension classes.

    A class x is lifted to the orbit point with c(z) = (eta z)^k x(z). Under the
    lift theta^loop_(m+k) = eta^k theta_m, so entries are reported for the
    rescaled functionals eta^-k theta^loop_(m+k).
    """

    def __init__(self, ctx: NumericContext, bracket: Optional[ILoopBracket] = None) -> None:
        """
        Initializes the adapter with an injected loop bracket.

        Args:
            ctx (NumericContext): Supplies the window for the lift.
            bracket (ILoopBracket, optional): Backend bracket; the r-matrix bracket by default.
        """
        self.ctx = ctx
        self.bracket = bracket or RMatrixLoopBracket(ctx)

    @property
    def name(self) -> str:
        return "loop"

    def lift(self, x: ExtensionClass) -> LoopOrbitPoint:
        """
        Lifts x to the orbit.
        """
        return LoopOrbitPoint.from_extension(x, self.ctx)

    def entry(self, x: ExtensionClass, m: int, n: int) -> complex:
        """
        Reduced bracket of the rescaled functionals with indices m and n.
        """
        pt = self.lift(x)
        return complex(pt.a_minus_k**2 * self.bracket.reduced_bracket(pt, m + x.k, n + x.k))

    def matrix(self, x: ExtensionClass) -> np.ndarray:
        """
        All entries for 0 <= m, n < 2k.
        """
        pt = self.lift(x)
        size = 2 * x.k
        out = np.zeros((size, size), dtype=complex)
        for m in range(size):
            for n in range(size):
                out[m, n] = pt.a_minus_k**2 * self.bracket.reduced_bracket(pt, m + x.k, n + x.k)
        return out

    def functionals(self, x: ExtensionClass) -> np.ndarray:
        """
        The rescaled functionals eta^-k theta^loop_(n+k) at the lift, n = 0..2k-1.
        """
        pt = self.lift(x)
        scale = x.eta ** (-x.k)
        return np.array(
            [scale * self.bracket.invariant_functional(pt, n + x.k) for n in range(2 * x.k)]
        )
