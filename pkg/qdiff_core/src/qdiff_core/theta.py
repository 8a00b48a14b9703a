"""Cohomology of rank-one q-difference modules on E_q.

A line bundle is the module with phi(e) = c z^d e. For d > 0 its global
sections are spanned by the theta series

    theta_n(z) = sum_l q^(l n) q^(d l (l-1) / 2) c^l z^(d l + n),   0 <= n < d,

and for d < 0 every class in H^1 has a unique representative in
span{1, z, ..., z^(|d|-1)}. The two are dual through the constant term of a
product (the Serre pairing).

Index convention: ``theta_series(bundle, n)`` accepts any integer n and
evaluates the formula above literally. For 0 < n < d the series with index
-n equals c q^(-n) times the basis element of index d - n, and it is the
literal index -n that satisfies <theta_{-n}, [z^m]> = delta_{mn}.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .context import NumericContext
from .errors import ConditioningError, DomainError, ValidationError
from .laurent import LaurentSeries, constant_term, q_shift, series_mul

# Set up logger
logger = logging.getLogger(__name__)

_SCAN_LIMIT = 100_000


def power_product(c: complex, a: np.ndarray, q: complex, b: np.ndarray) -> np.ndarray:
    """Return c**a * q**b for integer arrays a, b, evaluated in log space.

    Terms whose magnitude underflows are set to zero instead of producing
    inf * 0 = nan.
    """
    log_value = np.asarray(a) * np.log(complex(c)) + np.asarray(b) * np.log(complex(q))
    out = np.zeros(log_value.shape, dtype=complex)
    keep = log_value.real > -740.0
    out[keep] = np.exp(log_value[keep])
    return out


@dataclass(frozen=True)
class LineBundle:
    """Rank-one multiplier c z^d.

    Attributes:
        c: Nonzero multiplier scalar.
        d: Degree.
    """

    c: complex
    d: int

    def __post_init__(self) -> None:
        c = complex(self.c)
        if c == 0 or not np.isfinite(c):
            raise DomainError(f"line bundle scalar must be finite and nonzero, got {self.c!r}")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", int(self.d))

    def dual(self) -> "LineBundle":
        return LineBundle(1.0 / self.c, -self.d)

    def tensor(self, other: "LineBundle") -> "LineBundle":
        return LineBundle(self.c * other.c, self.d + other.d)

    def is_dual_to(self, other: "LineBundle", tol: float) -> bool:
        return self.d == -other.d and abs(self.c * other.c - 1.0) < tol * 1e3

    def check_conditioned(self, ctx: NumericContext) -> None:
        """Reject |c| outside (|q|^(|d|+1), |q|^-(|d|+1)).

        Degree 0 bundles are exempt.

        Raises:
            ConditioningError: If the scalar lies outside the annulus.
        """
        if self.d == 0:
            return
        width = (abs(self.d) + 1) * math.log(abs(ctx.q))
        log_c = math.log(abs(self.c))
        if not width < log_c < -width:
            raise ConditioningError(
                f"|c| = {abs(self.c):.3g} outside the conditioning annulus for degree "
                f"{self.d} at |q| = {abs(ctx.q):.3g}; normalize c by powers of q first"
            )

    def to_dict(self) -> dict[str, Any]:
        return {"c": [self.c.real, self.c.imag], "d": self.d}


def _as_coords(values: Sequence[complex] | np.ndarray, length: int, what: str) -> np.ndarray:
    coords = np.array(values, dtype=complex).reshape(-1)
    if coords.shape != (length,):
        raise ValidationError(f"{what} needs {length} coordinates, got {coords.shape[0]}")
    coords.setflags(write=False)
    return coords


@dataclass(frozen=True)
class H1Class:
    """A class in H^1 of a negative-degree line bundle, in the basis [z^m]."""

    bundle: LineBundle
    coords: np.ndarray = field(compare=False)

    def __post_init__(self) -> None:
        if self.bundle.d >= 0:
            raise DomainError(f"H1 classes need a negative degree, got {self.bundle.d}")
        object.__setattr__(self, "coords", _as_coords(self.coords, -self.bundle.d, "H1 class"))

    @property
    def rank(self) -> int:
        return -self.bundle.d

    def representative(self, window: tuple[int, int]) -> LaurentSeries:
        """Canonical representative sum_m coords[m] z^m."""
        return LaurentSeries.polynomial(self.coords, window)

    def is_zero(self, tol: float, reference: float = 1.0) -> bool:
        return bool(np.max(np.abs(self.coords)) < tol * reference)

    def to_dict(self) -> dict[str, Any]:
        return {
            "bundle": self.bundle.to_dict(),
            "coords": [[z.real, z.imag] for z in self.coords],
        }


@dataclass(frozen=True)
class ThetaVector:
    """A global section of a positive-degree bundle in the theta basis."""

    bundle: LineBundle
    coords: np.ndarray = field(compare=False)

    def __post_init__(self) -> None:
        if self.bundle.d <= 0:
            raise DomainError(f"theta vectors need a positive degree, got {self.bundle.d}")
        object.__setattr__(self, "coords", _as_coords(self.coords, self.bundle.d, "theta vector"))

    @classmethod
    def basis(cls, bundle: LineBundle, n: int) -> "ThetaVector":
        coords = np.zeros(bundle.d, dtype=complex)
        coords[n] = 1.0
        return cls(bundle, coords)

    def __add__(self, other: "ThetaVector") -> "ThetaVector":
        if self.bundle != other.bundle:
            raise DomainError("cannot add theta vectors of different bundles")
        return ThetaVector(self.bundle, self.coords + other.coords)

    def scale(self, factor: complex) -> "ThetaVector":
        return ThetaVector(self.bundle, self.coords * factor)


def _log_magnitude(bundle: LineBundle, n: int, ctx: NumericContext, l: int) -> float:
    return l * math.log(abs(bundle.c)) + (l * n + bundle.d * l * (l - 1) / 2) * math.log(
        abs(ctx.q)
    )


def _decay_range(bundle: LineBundle, n: int, ctx: NumericContext) -> tuple[int, int]:
    """Range of l outside which theta coefficients are below eps of the peak."""
    log_eps = math.log(ctx.eps)
    peak = _log_magnitude(bundle, n, ctx, 0)
    bounds = []
    for step in (1, -1):
        l, prev = 0, peak
        while True:
            l += step
            value = _log_magnitude(bundle, n, ctx, l)
            peak = max(peak, value)
            if value < prev and value < peak + log_eps:
                break
            prev = value
            if abs(l) > _SCAN_LIMIT:
                raise ConditioningError(f"theta coefficients of {bundle} do not decay")
        bounds.append(l)
    return bounds[1], bounds[0]


def theta_window(bundle: LineBundle, n: int, ctx: NumericContext) -> tuple[int, int]:
    """Symmetric window holding the decayed support of theta_n."""
    l_lo, l_hi = _decay_range(bundle, n, ctx)
    reach = max(abs(bundle.d * l_lo + n), abs(bundle.d * l_hi + n)) + bundle.d
    w = max(int(ctx.default_window), reach)  # type: ignore[arg-type]
    return (-w, w)


def theta_series(bundle: LineBundle, n: int, ctx: NumericContext) -> LaurentSeries:
    """Evaluate the theta formula at any integer index n.

    Raises:
        DomainError: If the degree is not positive.
        ConditioningError: If c is outside the conditioning annulus.
    """
    if bundle.d <= 0:
        raise DomainError(f"theta series need a positive degree, got d = {bundle.d}")
    bundle.check_conditioned(ctx)
    d = bundle.d
    lo, hi = theta_window(bundle, n, ctx)
    # every l whose exponent d l + n lands in the window
    ls = np.arange(-((n - lo) // d), (hi - n) // d + 1)
    q_power = ls * n + d * ls * (ls - 1) // 2
    coeffs = power_product(bundle.c, ls, ctx.q, q_power)
    data = np.zeros(hi - lo + 1, dtype=complex)
    data[d * ls + n - lo] = coeffs
    logger.debug(f"theta_{n} of {bundle}: window {(lo, hi)}, {ls.size} terms")
    return LaurentSeries(data, (lo, hi))


def theta_basis(bundle: LineBundle, n: int, ctx: NumericContext) -> LaurentSeries:
    """Return the basis section theta_n, 0 <= n < d.

    Raises:
        DomainError: If d <= 0 or n is out of range.
    """
    if bundle.d <= 0:
        raise DomainError(f"theta basis needs a positive degree, got d = {bundle.d}")
    if not 0 <= n < bundle.d:
        raise DomainError(f"basis index must satisfy 0 <= n < {bundle.d}, got {n}")
    return theta_series(bundle, n, ctx)


def index_factor(bundle: LineBundle, n: int, ctx: NumericContext) -> complex:
    """Scalar f with theta_n = f * theta_(n mod d)."""
    s, r = divmod(n, bundle.d)
    return complex(bundle.c ** (-s) * ctx.q ** (-s * r - bundle.d * s * (s - 1) // 2))


def dual_theta(bundle: LineBundle, n: int, ctx: NumericContext) -> ThetaVector:
    """Return theta_{-n} as a theta vector (literal negative index)."""
    _, r = divmod(-n, bundle.d)
    coords = np.zeros(bundle.d, dtype=complex)
    coords[r] = index_factor(bundle, -n, ctx)
    return ThetaVector(bundle, coords)


def realize(theta: ThetaVector, ctx: NumericContext) -> LaurentSeries:
    """Return the Laurent series of a theta vector."""
    reach = max(theta_window(theta.bundle, n, ctx)[1] for n in range(theta.bundle.d))
    total: LaurentSeries | None = None
    for n, coefficient in enumerate(theta.coords):
        term = theta_basis(theta.bundle, n, ctx).restrict((-reach, reach)).scale(coefficient)
        total = term if total is None else total + term
    assert total is not None
    return total


def functional_residual(bundle: LineBundle, f: LaurentSeries, ctx: NumericContext) -> float:
    """Relative residual of c z^d f(qz) - f on the interior of f's window."""
    shifted = q_shift(f, ctx).shift(bundle.d).scale(bundle.c)
    inner = (f.lo + abs(bundle.d), f.hi - abs(bundle.d))
    diff = (shifted - f).restrict(inner)
    return diff.max_abs() / max(f.max_abs(), np.finfo(float).tiny)


def h0_basis(bundle: LineBundle, ctx: NumericContext) -> list[LaurentSeries]:
    """Return a basis of global sections.

    Positive degree gives the d theta series; degree 0 gives {z^m} when
    c = q^(-m) for some m in the default window; negative degree gives none.
    """
    if bundle.d > 0:
        return [theta_basis(bundle, n, ctx) for n in range(bundle.d)]
    if bundle.d < 0:
        return []
    lo, hi = ctx.window
    ms = np.arange(lo, hi + 1)
    mismatch = np.abs(bundle.c * np.power(ctx.q, ms) - 1.0)
    best = int(np.argmin(mismatch))
    if mismatch[best] < ctx.tol:
        return [LaurentSeries.monomial(int(ms[best]), ctx.window)]
    if mismatch[best] < ctx.tol * 1e3:
        logger.warning(
            f"c = {bundle.c} is within {mismatch[best]:.2e} of q^{-int(ms[best])}; "
            "treating H0 as empty"
        )
    return []


def _dual_index_table(k: int, lo: int, hi: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    exponents = np.arange(lo, hi + 1)
    ls = np.floor_divide(exponents, k)
    ns = exponents - k * ls
    return exponents, ls, ns


def h1_reduce(bundle: LineBundle, f: LaurentSeries, ctx: NumericContext) -> H1Class:
    """Reduce a representative to canonical coordinates.

    For the bundle (c, -k) the relation [z^(k l + n)] = c^l q^(l n + k l (l+1)/2) [z^n]
    moves every exponent to its residue n in 0..k-1.

    Raises:
        DomainError: If the degree is not negative.
    """
    if bundle.d >= 0:
        raise DomainError(f"H1 reduction needs a negative degree, got d = {bundle.d}")
    bundle.check_conditioned(ctx)
    k = -bundle.d
    _, ls, ns = _dual_index_table(k, f.lo, f.hi)
    factors = power_product(bundle.c, ls, ctx.q, ls * ns + k * ls * (ls + 1) // 2)
    coords = np.zeros(k, dtype=complex)
    np.add.at(coords, ns, f.coefficients * factors)
    return H1Class(bundle, coords)


def coboundary_series(bundle: LineBundle, g: LaurentSeries, ctx: NumericContext) -> LaurentSeries:
    """Return (phi - 1) g = c z^d g(qz) - g, an element of the coboundary image.

    The result lives on the union of g's window and its shift, so it is exact
    for finitely supported g.
    """
    shifted = q_shift(g, ctx).shift(bundle.d).scale(bundle.c)
    window = (min(g.lo, shifted.lo), max(g.hi, shifted.hi))
    return shifted.restrict(window) - g.restrict(window)


def serre_pair_series(theta: ThetaVector, f: LaurentSeries, ctx: NumericContext) -> complex:
    """Constant term of realize(theta) * f for an unreduced representative f."""
    return constant_term(series_mul(realize(theta, ctx), f))


def serre_pair(theta: ThetaVector, cls: H1Class, ctx: NumericContext) -> complex:
    """Serre pairing of H^0(c, d) with H^1(1/c, -d).

    Raises:
        DomainError: If the bundles are not mutually dual.
    """
    if not theta.bundle.is_dual_to(cls.bundle, ctx.tol):
        raise DomainError(f"{theta.bundle} and {cls.bundle} are not dual")
    series = realize(theta, ctx)
    return constant_term(series_mul(series, cls.representative(series.window)))


def theta_functional(bundle: LineBundle, n: int, f: LaurentSeries, ctx: NumericContext) -> complex:
    """Apply the dual functional theta_n = sum_l c^(-l) q^(n l + d l (l+1)/2) phi_(d l + n).

    Raises:
        DomainError: If the degree is not positive.
    """
    if bundle.d <= 0:
        raise DomainError(f"theta functionals need a positive degree, got d = {bundle.d}")
    d = bundle.d
    exponents = f.exponents
    hits = (exponents - n) % d == 0
    ls = (exponents[hits] - n) // d
    weights = power_product(bundle.c, -ls, ctx.q, n * ls + d * ls * (ls + 1) // 2)
    return complex(np.sum(weights * f.coefficients[hits]))


def duality_tables(bundle: LineBundle, ctx: NumericContext) -> tuple[np.ndarray, np.ndarray]:
    """Return (P, F) with P[n, m] = <theta_{-n}, [z^m]> and F[n, m] = theta_n(z^m)."""
    d = bundle.d
    dual = bundle.dual()
    pairing = np.zeros((d, d), dtype=complex)
    functional = np.zeros((d, d), dtype=complex)
    for m in range(d):
        unit = np.zeros(d, dtype=complex)
        unit[m] = 1.0
        cls = H1Class(dual, unit)
        monomial = LaurentSeries.monomial(m, ctx.window)
        for n in range(d):
            pairing[n, m] = serre_pair(dual_theta(bundle, n, ctx), cls, ctx)
            functional[n, m] = theta_functional(bundle, n, monomial, ctx)
    return pairing, functional


def pairing_table(k: int, eta: complex, ctx: NumericContext) -> tuple[np.ndarray, np.ndarray]:
    """Duality tables for xi_0 = (eta^k, k)."""
    return duality_tables(LineBundle(eta**k, k), ctx)
