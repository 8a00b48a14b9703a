"""Truncated complex Laurent series and their arithmetic.

A series stores one coefficient per exponent of its window ``(lo, hi)``;
coefficients outside the window are taken to be zero. Products keep the
intersection of the operand windows, which always contains the exponent 0.
"""

from __future__ import annotations

import logging
from typing import Any, Iterable, Mapping, Union

import numpy as np
from scipy.linalg import solve_triangular, toeplitz

from .context import NumericContext
from .errors import SingularMultiplierError, ValidationError, WindowUnderflowError

# Set up logger
logger = logging.getLogger(__name__)

Scalar = Union[int, float, complex, np.number]
Window = tuple[int, int]


def _check_window(window: Window) -> Window:
    lo, hi = int(window[0]), int(window[1])
    if not lo <= 0 <= hi:
        raise WindowUnderflowError(f"window {window} does not contain the exponent 0")
    return (lo, hi)


class LaurentSeries:
    """A complex Laurent series truncated to an exponent window."""

    __slots__ = ("_coeffs", "_lo", "_hi")

    def __init__(self, coeffs: Iterable[Scalar] | np.ndarray, window: Window) -> None:
        """Initialize a series.

        Args:
            coeffs: Dense coefficients for exponents lo..hi, in order.
            window: The exponent window (lo, hi), with lo <= 0 <= hi.

        Raises:
            WindowUnderflowError: If the window does not contain 0.
            ValidationError: If the coefficient count does not match the window.
        """
        lo, hi = _check_window(window)
        data = np.array(coeffs, dtype=complex)
        if data.shape != (hi - lo + 1,):
            raise ValidationError(
                f"expected {hi - lo + 1} coefficients for window {window}, got {data.shape}"
            )
        data.setflags(write=False)
        self._coeffs = data
        self._lo = lo
        self._hi = hi

    # constructors

    @classmethod
    def zero(cls, window: Window) -> "LaurentSeries":
        lo, hi = _check_window(window)
        return cls(np.zeros(hi - lo + 1, dtype=complex), (lo, hi))

    @classmethod
    def from_terms(cls, terms: Mapping[int, Scalar], window: Window) -> "LaurentSeries":
        """Build a series from a sparse ``{exponent: coefficient}`` map.

        Raises:
            WindowUnderflowError: If a nonzero term falls outside the window.
        """
        lo, hi = _check_window(window)
        data = np.zeros(hi - lo + 1, dtype=complex)
        for exponent, value in terms.items():
            e = int(exponent)
            if not lo <= e <= hi:
                if value == 0:
                    continue
                raise WindowUnderflowError(f"exponent {e} lies outside window {window}")
            data[e - lo] += complex(value)
        return cls(data, (lo, hi))

    @classmethod
    def monomial(cls, exponent: int, window: Window, coefficient: Scalar = 1.0) -> "LaurentSeries":
        return cls.from_terms({exponent: coefficient}, window)

    @classmethod
    def polynomial(
        cls, coeffs: Iterable[Scalar], window: Window, offset: int = 0
    ) -> "LaurentSeries":
        """Build sum_j coeffs[j] z^(offset + j)."""
        return cls.from_terms({offset + j: c for j, c in enumerate(coeffs)}, window)

    # accessors

    @property
    def window(self) -> Window:
        return (self._lo, self._hi)

    @property
    def lo(self) -> int:
        return self._lo

    @property
    def hi(self) -> int:
        return self._hi

    @property
    def coefficients(self) -> np.ndarray:
        """Read-only dense coefficient array for exponents lo..hi."""
        return self._coeffs

    @property
    def exponents(self) -> np.ndarray:
        return np.arange(self._lo, self._hi + 1)

    def coefficient(self, exponent: int) -> complex:
        """Return the coefficient at ``exponent``.

        Raises:
            WindowUnderflowError: If the exponent lies outside the window.
        """
        if not self._lo <= exponent <= self._hi:
            raise WindowUnderflowError(
                f"exponent {exponent} outside window {self.window}"
            )
        return complex(self._coeffs[exponent - self._lo])

    def terms(self, threshold: float = 0.0) -> dict[int, complex]:
        """Sparse view: exponents whose coefficient magnitude exceeds ``threshold``."""
        idx = np.nonzero(np.abs(self._coeffs) > threshold)[0]
        return {int(i) + self._lo: complex(self._coeffs[i]) for i in idx}

    def max_abs(self) -> float:
        return float(np.max(np.abs(self._coeffs))) if self._coeffs.size else 0.0

    def is_negligible(self, tol: float, reference: float = 1.0) -> bool:
        """True iff every coefficient in the window is below ``tol * reference``."""
        return self.max_abs() < tol * reference

    # window manipulation

    def restrict(self, window: Window) -> "LaurentSeries":
        """Return the series on a sub- or super-window, padding with zeros."""
        lo, hi = _check_window(window)
        data = np.zeros(hi - lo + 1, dtype=complex)
        a, b = max(lo, self._lo), min(hi, self._hi)
        if a <= b:
            data[a - lo : b - lo + 1] = self._coeffs[a - self._lo : b - self._lo + 1]
        return LaurentSeries(data, (lo, hi))

    def shift(self, d: int) -> "LaurentSeries":
        """Multiply by z^d; the window moves with the coefficients."""
        return LaurentSeries(self._coeffs, (self._lo + d, self._hi + d))

    def reflect(self) -> "LaurentSeries":
        """Return f(1/z)."""
        return LaurentSeries(self._coeffs[::-1], (-self._hi, -self._lo))

    # arithmetic

    def scale(self, factor: Scalar) -> "LaurentSeries":
        return LaurentSeries(self._coeffs * complex(factor), self.window)

    def _aligned(self, other: "LaurentSeries") -> tuple[np.ndarray, np.ndarray, Window]:
        window = (max(self._lo, other._lo), min(self._hi, other._hi))
        return (
            self.restrict(window)._coeffs,
            other.restrict(window)._coeffs,
            window,
        )

    def __add__(self, other: Any) -> "LaurentSeries":
        if isinstance(other, LaurentSeries):
            a, b, window = self._aligned(other)
            return LaurentSeries(a + b, window)
        if isinstance(other, (int, float, complex, np.number)):
            return self + LaurentSeries.monomial(0, self.window, other)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self) -> "LaurentSeries":
        return self.scale(-1.0)

    def __sub__(self, other: Any) -> "LaurentSeries":
        if isinstance(other, (LaurentSeries, int, float, complex, np.number)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other: Any) -> "LaurentSeries":
        return (-self) + other

    def __mul__(self, other: Any) -> "LaurentSeries":
        if isinstance(other, LaurentSeries):
            return series_mul(self, other)
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other: Any) -> "LaurentSeries":
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        return NotImplemented

    def __repr__(self) -> str:
        shown = ", ".join(f"{e}: {c:.3g}" for e, c in list(self.terms(1e-300).items())[:6])
        return f"LaurentSeries({{{shown}}}, window={self.window})"

    # serialization

    def to_dict(self, threshold: float = 0.0) -> dict[str, Any]:
        """Serialize as ``{"window": [lo, hi], "coeffs": {exponent: [re, im]}}``."""
        return {
            "window": [self._lo, self._hi],
            "coeffs": {
                str(e): [c.real, c.imag] for e, c in self.terms(threshold).items()
            },
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "LaurentSeries":
        try:
            lo, hi = data["window"]
            terms = {int(e): complex(v[0], v[1]) for e, v in data["coeffs"].items()}
        except (KeyError, TypeError, ValueError, IndexError) as e:
            raise ValidationError(f"malformed series payload: {e}") from e
        return cls.from_terms(terms, (int(lo), int(hi)))


def series_mul(f: LaurentSeries, g: LaurentSeries, window: Window | None = None) -> LaurentSeries:
    """Multiply two series.

    The full convolution of the stored coefficients is computed and kept on
    the intersection of the two windows. Finitely supported operands may ask
    for a wider ``window``, up to the sum window (f.lo + g.lo, f.hi + g.hi),
    on which their product is exact; exponents beyond it are zero.

    Raises:
        WindowUnderflowError: If the resulting window is empty.
    """
    if window is None:
        window = (max(f.lo, g.lo), min(f.hi, g.hi))
        if window[0] > window[1] or not window[0] <= 0 <= window[1]:
            raise WindowUnderflowError(f"product of windows {f.window} and {g.window} is empty")
    full = LaurentSeries(np.convolve(f.coefficients, g.coefficients), (f.lo + g.lo, f.hi + g.hi))
    return full.restrict(window)


def q_shift(f: LaurentSeries, ctx: NumericContext, j: int = 1) -> LaurentSeries:
    """Return f(q^j z): the coefficient at exponent l is multiplied by q^(j l)."""
    factors = np.power(ctx.q, j * f.exponents)
    return LaurentSeries(f.coefficients * factors, f.window)


def constant_term(f: LaurentSeries) -> complex:
    """Return the coefficient of z^0.

    Raises:
        WindowUnderflowError: If 0 lies outside the window.
    """
    return f.coefficient(0)


def leading_exponent(f: LaurentSeries, tol: float) -> int:
    """Lowest exponent whose coefficient exceeds ``tol`` times the largest one."""
    scale = f.max_abs()
    if scale == 0.0:
        raise SingularMultiplierError("the zero series has no leading term")
    idx = np.nonzero(np.abs(f.coefficients) > tol * scale)[0]
    return int(idx[0]) + f.lo


def series_inverse(f: LaurentSeries, ctx: NumericContext) -> LaurentSeries:
    """Invert a unit series through its leading term.

    Writes f = f_e z^e (1 + h) with h in positive powers of z, and inverts the
    power series part by a lower-triangular Toeplitz solve. The inverse is
    exact on [-e, hi] whenever f is a polynomial in that range.

    Raises:
        SingularMultiplierError: If f is numerically zero or its inverse
            would start outside the window.
    """
    e = leading_exponent(f, ctx.tol)
    if not f.lo <= -e <= f.hi:
        raise SingularMultiplierError(
            f"inverse of a series led by z^{e} does not fit window {f.window}"
        )
    n = f.hi - (-e) + 1
    tail = f.coefficients[e - f.lo :]
    column = np.zeros(n, dtype=complex)
    column[: min(n, tail.size)] = tail[:n]
    if abs(column[0]) < ctx.tol * f.max_abs():
        raise SingularMultiplierError("leading coefficient is numerically zero")
    rhs = np.zeros(n, dtype=complex)
    rhs[0] = 1.0
    first_row = np.zeros(n, dtype=complex)
    first_row[0] = column[0]
    matrix = toeplitz(column, first_row)
    solution = solve_triangular(matrix, rhs, lower=True)
    return LaurentSeries.polynomial(solution, f.window, offset=-e)
