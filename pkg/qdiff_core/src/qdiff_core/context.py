"""Numeric context: the modular parameter q plus tolerance and window policy."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

from .errors import ValidationError

# Set up logger
logger = logging.getLogger(__name__)

MIN_WINDOW = 4


def default_window_for(q: complex, tol: float) -> int:
    """Return the smallest W >= 4 with |q|^W < tol * 1e-3."""
    bound = math.log(tol * 1e-3) / math.log(abs(q))
    return max(MIN_WINDOW, int(math.floor(bound)) + 1)


@dataclass(frozen=True)
class NumericContext:
    """Parameters every numerical operation runs under.

    Attributes:
        q: Modular parameter of E_q, 0 < |q| < 1.
        tol: Relative tolerance used for every residual and rank decision.
        default_window: Half-width W of the default window [-W, W]. When left
            as None it is chosen so that |q|^W < tol * 1e-3.
    """

    q: complex
    tol: float = 1e-12
    default_window: Optional[int] = field(default=None)

    def __post_init__(self) -> None:
        q = complex(self.q)
        if not 0.0 < abs(q) < 1.0:
            raise ValidationError(f"q must satisfy 0 < |q| < 1, got {self.q!r}")
        if not self.tol > 0.0:
            raise ValidationError(f"tol must be positive, got {self.tol!r}")
        object.__setattr__(self, "q", q)
        if self.default_window is None:
            object.__setattr__(self, "default_window", default_window_for(q, self.tol))
        elif self.default_window < MIN_WINDOW:
            raise ValidationError(
                f"default_window must be at least {MIN_WINDOW}, got {self.default_window}"
            )
        logger.debug(f"NumericContext q={q} tol={self.tol} W={self.default_window}")

    @property
    def window(self) -> tuple[int, int]:
        """Return the default symmetric window (-W, W)."""
        w = int(self.default_window)  # type: ignore[arg-type]
        return (-w, w)

    @property
    def eps(self) -> float:
        """Truncation threshold for series tails."""
        return self.tol * 1e-3

    def widened(self, factor: int = 2) -> "NumericContext":
        """Return a copy whose default window is scaled by ``factor``."""
        return replace(self, default_window=int(self.default_window) * factor)  # type: ignore[arg-type]

    def gaussian_bound(self, k: int, extra: int = 0) -> int:
        """Return the minimal L >= 1 with |q|^(k L (L-1)) < eps.

        Used as the summation bound for theta-type double sums at level 2k.
        ``extra`` widens the bound, e.g. when the context window is widened.
        """
        log_q = math.log(abs(self.q))
        log_eps = math.log(self.eps)
        L = 1
        while k * L * (L - 1) * log_q >= log_eps:
            L += 1
        scale = max(1, int(self.default_window) // default_window_for(self.q, self.tol))  # type: ignore[arg-type]
        return L * scale + extra
