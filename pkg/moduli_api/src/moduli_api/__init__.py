"""Interfaces shared by the qmoduli packages."""

from typing import Any, Mapping, Protocol, runtime_checkable

import numpy as np


@runtime_checkable
class Series(Protocol):
    """A Laurent series truncated to an exponent window."""

    @property
    def window(self) -> tuple[int, int]:
        """Return the exponent window (lo, hi)."""
        raise NotImplementedError()

    def coefficient(self, exponent: int) -> complex:
        """Return the coefficient at ``exponent``.

        Raises:
            WindowUnderflowError: If the exponent lies outside the window.
        """
        raise NotImplementedError()

    def terms(self, threshold: float = 0.0) -> dict[int, complex]:
        """Return the sparse ``{exponent: coefficient}`` view above ``threshold``."""
        raise NotImplementedError()

    def to_dict(self, threshold: float = 0.0) -> Mapping[str, Any]:
        """Return a JSON-ready representation."""
        raise NotImplementedError()


@runtime_checkable
class BracketSource(Protocol):
    """Anything that evaluates the Poisson bracket of theta covectors at a class x."""

    @property
    def name(self) -> str:
        """Return a short label used in reports."""
        raise NotImplementedError()

    def entry(self, x: Any, m: int, n: int) -> complex:
        """Return the bracket of the covectors with indices m and n at x.

        Args:
            x: An extension class
            m: Index of the first covector, 0 <= m < 2k
            n: Index of the second covector, 0 <= n < 2k

        Returns:
            The bracket value
        """
        raise NotImplementedError()

    def matrix(self, x: Any) -> np.ndarray:
        """Return the full 2k x 2k bracket matrix at x."""
        raise NotImplementedError()
