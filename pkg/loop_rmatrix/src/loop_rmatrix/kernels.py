from enum import Enum
from typing import Any

import numpy as np

from qdiff_core import LaurentSeries, NumericContext


class KernelKind(Enum):
    """
    Enum naming the kernels of the loop r-matrix.
    """
    RPHI = "rphi"
    TAU = "tau"
    DELTA = "delta"


def phi_values(ls: np.ndarray, ctx: NumericContext) -> np.ndarray:
    """
    phi_l = 1 / (1 - q^l) for l != 0 and phi_0 = 1/2.

    Args:
        ls (np.ndarray): Integer exponents.
        ctx (NumericContext): Supplies q.

    Returns:
        np.ndarray: The coefficients phi_l.
    """
    ls = np.asarray(ls)
    out = np.full(ls.shape, 0.5, dtype=complex)
    nonzero = ls != 0
    out[nonzero] = 1.0 / (1.0 - np.power(ctx.q, ls[nonzero].astype(float)))
    return out


def tau_values(ls: np.ndarray, ctx: NumericContext) -> np.ndarray:
    """
    tau_l = (1 + q^l) / (1 - q^l) for l != 0 and tau_0 = 0.
    """
    ls = np.asarray(ls)
    out = np.zeros(ls.shape, dtype=complex)
    nonzero = ls != 0
    qs = np.power(ctx.q, ls[nonzero].astype(float))
    out[nonzero] = (1.0 + qs) / (1.0 - qs)
    return out


class RKernels:
    """
    The kernels phi(z), tau(z) = phi(z) - phi(1/z) and delta(z) truncated to a window.

    Attributes:
        rphi (LaurentSeries): phi(z) = 1/2 + sum_{l != 0} z^l / (1 - q^l).
        tau (LaurentSeries): tau(z) = sum_{l != 0} (1 + q^l) / (1 - q^l) z^l.
        delta (LaurentSeries): delta(z) = sum_l z^l.
    """

    def __init__(self, ctx: NumericContext, window: tuple[int, int] | None = None) -> None:
        """
        Builds the kernels on the given window, the context window by default.

        Args:
            ctx (NumericContext): Supplies q and the default window.
            window (tuple[int, int], optional): Exponent window of the kernels.
        """
        self._ctx = ctx
        lo, hi = window or ctx.window
        ls = np.arange(lo, hi + 1)
        self._rphi = LaurentSeries(phi_values(ls, ctx), (lo, hi))
        self._tau = LaurentSeries(tau_values(ls, ctx), (lo, hi))
        self._delta = LaurentSeries(np.ones(ls.size), (lo, hi))

    @property
    def rphi(self) -> LaurentSeries:
        return self._rphi

    @property
    def tau(self) -> LaurentSeries:
        return self._tau

    @property
    def delta(self) -> LaurentSeries:
        return self._delta

    def kernel(self, kind: KernelKind) -> LaurentSeries:
        """
        Returns the kernel of the given kind.
        """
        return {
            KernelKind.RPHI: self._rphi,
            KernelKind.TAU: self._tau,
            KernelKind.DELTA: self._delta,
        }[kind]

    def tau_residual(self) -> float:
        """
        Largest coefficient of tau(z) - (phi(z) - phi(1/z)) on the window.
        """
        symmetric = (self._rphi - self._rphi.reflect()).restrict(self._tau.window)
        return (self._tau - symmetric).max_abs()

    def oddness_residual(self) -> float:
        """
        Largest coefficient of tau(z) + tau(1/z).
        """
        return (self._tau + self._tau.reflect()).max_abs()

    def to_dict(self) -> dict[str, Any]:
        """
        Serializes the kernels, keyed by kind.

        Returns:
            dict[str, Any]: Series payloads per kernel.
        """
        return {kind.value: self.kernel(kind).to_dict() for kind in KernelKind}
