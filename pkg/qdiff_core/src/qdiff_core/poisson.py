"""The Poisson bracket on Ext^1(xi_0, xi_0^*) and its diagnostics.

Entries are Pi[m][n] = <B(d theta_-m), d theta_-n> for the level-2k theta
covectors. Two evaluations are provided: the closed double sum

    Pi[m][n] = sum_{u != 0} (q^u + 1)/(q^u - 1) P_m(-u) P_n(u),
    P_m(v)   = <theta_-m, [x z^v]>
             = sum_l q^(-m l) q^(k l (l-1)) eta^(2k l) x_(m - v - 2k l),

and the series path, which builds b' = theta_-m, splits b' x and reduces
(b' x - 2a) x in H^1. The closed formula is quadratic in x and defined
everywhere; its geometric meaning needs x_m = x_n = 0.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .context import NumericContext
from .errors import InternalConsistencyError, InvalidCovectorError
from .laurent import LaurentSeries, constant_term, series_mul
from .multipliers import ExtensionClass
from .theta import H1Class, LineBundle, h1_reduce, theta_series

# Set up logger
logger = logging.getLogger(__name__)


def kernel_weight(u: np.ndarray | int, ctx: NumericContext) -> np.ndarray:
    """(q^u + 1) / (q^u - 1) for u != 0."""
    qu = np.power(ctx.q, np.asarray(u, dtype=float))
    return (qu + 1.0) / (qu - 1.0)


def truncation_bound(k: int, ctx: NumericContext) -> int:
    """Summation bound L for the level-2k theta sums."""
    return ctx.gaussian_bound(k, extra=1)


def square_bundle(k: int, eta: complex) -> LineBundle:
    """xi_0 tensor xi_0 = (eta^2k, 2k), home of the covectors theta_-m."""
    return LineBundle(eta ** (2 * k), 2 * k)


def _check_admissible(x: ExtensionClass, indices: tuple[int, ...], ctx: NumericContext) -> None:
    scale = max(1.0, float(np.max(np.abs(x.coords))))
    for m in indices:
        if abs(x.coords[m]) > ctx.tol * 1e3 * scale:
            raise InvalidCovectorError(
                f"d theta_-{m} is not a covector at x: x_{m} = {x.coords[m]:.3g} != 0"
            )


def _check_index(x: ExtensionClass, *indices: int) -> None:
    for m in indices:
        if not 0 <= m < 2 * x.k:
            raise InvalidCovectorError(f"covector index must satisfy 0 <= m < {2 * x.k}, got {m}")


def _closed_terms(
    x: ExtensionClass, m: int, n: int, L: int, ctx: NumericContext
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Enumerate the nonzero terms of the closed sum as (weight, u, j, s).

    Each term is weight * x_j * x_s with j = m + u - 2k l and s = n - u - 2k t.
    """
    k = x.k
    ls, ts, js = np.meshgrid(np.arange(-L, L + 1), np.arange(-L, L + 1), np.arange(2 * k), indexing="ij")
    ls, ts, js = ls.ravel(), ts.ravel(), js.ravel()
    us = js - m + 2 * k * ls
    ss = n - us - 2 * k * ts
    keep = (us != 0) & (ss >= 0) & (ss < 2 * k)
    ls, ts, js, us, ss = ls[keep], ts[keep], js[keep], us[keep], ss[keep]
    log_weight = (
        (-m * ls - n * ts + k * (ls * (ls - 1) + ts * (ts - 1))) * np.log(ctx.q)
        + 2 * k * (ls + ts) * np.log(x.eta)
    )
    weights = np.exp(log_weight) * kernel_weight(us, ctx)
    return weights, us, js, ss


def bracket_entry_closed(x: ExtensionClass, m: int, n: int, ctx: NumericContext) -> complex:
    """Closed double-sum evaluation of Pi[m][n].

    Raises:
        InvalidCovectorError: If m or n is not a covector index.
    """
    _check_index(x, m, n)
    weights, _, js, ss = _closed_terms(x, m, n, truncation_bound(x.k, ctx), ctx)
    return complex(np.sum(weights * x.coords[js] * x.coords[ss]))


def covector_pairing(x: ExtensionClass, m: int, v: int, ctx: NumericContext) -> complex:
    """<theta_-m, [x z^v]> as the constant term of the realized product."""
    theta = theta_series(square_bundle(x.k, x.eta), -m, ctx)
    margin = abs(v) + 2 * x.k
    wide = (theta.lo - margin, theta.hi + margin)
    shifted = x.polynomial(wide).shift(v).restrict(theta.window)
    return constant_term(series_mul(theta, shifted))


def bracket_entry_succinct(x: ExtensionClass, m: int, n: int, ctx: NumericContext) -> complex:
    """Evaluate Pi[m][n] as sum_u (q^u+1)/(q^u-1) <theta_-m,[x z^-u]> <theta_-n,[x z^u]>."""
    _check_index(x, m, n)
    k = x.k
    reach = 2 * k * (truncation_bound(k, ctx) + 1)
    total = 0j
    for u in range(-reach, reach + 1):
        if u == 0:
            continue
        left = covector_pairing(x, m, -u, ctx)
        if left == 0:
            continue
        total += complex(kernel_weight(u, ctx)) * left * covector_pairing(x, n, u, ctx)
    return total


def bivector_apply_series(x: ExtensionClass, m: int, ctx: NumericContext) -> H1Class:
    """Apply the bivector to d theta_-m through the series construction.

    Sets b' = theta_-m, beta = b' x, a = sum_{l != 0} beta_l / (1 - q^l) z^l,
    and returns the class of (b' x - 2a) x in H^1(eta^-2k, -2k). Coordinate n
    of the result is Pi[m][n].

    Raises:
        InvalidCovectorError: If x_m is not numerically zero.
    """
    _check_index(x, m)
    _check_admissible(x, (m,), ctx)
    b_prime = theta_series(square_bundle(x.k, x.eta), -m, ctx)
    poly = x.polynomial(b_prime.window)
    beta = series_mul(b_prime, poly)
    exponents = beta.exponents
    split = np.zeros(beta.coefficients.shape, dtype=complex)
    nonzero = exponents != 0
    split[nonzero] = beta.coefficients[nonzero] / (1.0 - np.power(ctx.q, exponents[nonzero].astype(float)))
    a = LaurentSeries(split, beta.window)
    return h1_reduce(x.bundle, series_mul(beta - a.scale(2.0), poly), ctx)


@dataclass(frozen=True)
class BracketMatrix:
    """The bracket matrix Pi at a class x."""

    x: ExtensionClass
    entries: np.ndarray = field(compare=False)
    truncation: int = 0

    @property
    def k(self) -> int:
        return self.x.k

    @property
    def eta(self) -> complex:
        return self.x.eta

    @property
    def skew_residual(self) -> float:
        return float(np.max(np.abs(self.entries + self.entries.T)))

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.entries)))

    def rank(self, tol: float) -> int:
        """Numerical rank with a singular value cutoff relative to the largest."""
        singular = np.linalg.svd(self.entries, compute_uv=False)
        if singular[0] == 0:
            return 0
        return int(np.sum(singular > tol * singular[0]))

    def to_dict(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "eta": [self.eta.real, self.eta.imag],
            "x": [[z.real, z.imag] for z in self.x.coords],
            "entries": [[[z.real, z.imag] for z in row] for row in self.entries],
            "skew_residual": self.skew_residual,
            "truncation": self.truncation,
        }


def bracket_matrix(x: ExtensionClass, ctx: NumericContext) -> BracketMatrix:
    """Assemble Pi from the closed formula and check skew-symmetry.

    Raises:
        InternalConsistencyError: If Pi + Pi^T is not numerically zero.
    """
    size = 2 * x.k
    L = truncation_bound(x.k, ctx)
    entries = np.zeros((size, size), dtype=complex)
    for m in range(size):
        for n in range(size):
            weights, _, js, ss = _closed_terms(x, m, n, L, ctx)
            entries[m, n] = np.sum(weights * x.coords[js] * x.coords[ss])
    result = BracketMatrix(x, entries, L)
    bound = ctx.tol * 1e3 * max(1.0, result.max_abs)
    if result.skew_residual > bound:
        logger.error(f"skew residual {result.skew_residual:.3e} exceeds {bound:.3e}")
        raise InternalConsistencyError(
            f"bracket matrix is not skew: residual {result.skew_residual:.3e}"
        )
    logger.debug(f"bracket_matrix k={x.k}: L={L}, max |Pi| = {result.max_abs:.3e}")
    return result


def series_path_matrix(x: ExtensionClass, ctx: NumericContext) -> np.ndarray:
    """Rows of Pi computed by the series path; rows with x_m != 0 are NaN."""
    size = 2 * x.k
    out = np.full((size, size), np.nan, dtype=complex)
    for m in range(size):
        try:
            out[m] = bivector_apply_series(x, m, ctx).coords
        except InvalidCovectorError:
            logger.debug(f"row {m} skipped: x_{m} != 0")
    return out


@dataclass(frozen=True)
class BracketTensor:
    """K with Pi[m][n](x) = sum_{j,s} K[m, n, j, s] x_j x_s, symmetric in (j, s)."""

    k: int
    eta: complex
    coefficients: np.ndarray = field(compare=False)

    def evaluate(self, x: ExtensionClass) -> np.ndarray:
        return np.einsum("mnjs,j,s->mn", self.coefficients, x.coords, x.coords)

    def gradient(self, x: ExtensionClass) -> np.ndarray:
        """G[p, m, n] = d Pi[m][n] / d x_p."""
        return 2.0 * np.einsum("mnps,s->pmn", self.coefficients, x.coords)


def bracket_tensor(k: int, eta: complex, ctx: NumericContext) -> BracketTensor:
    """Extract K by evaluating Pi on basis vectors and polarizing."""
    size = 2 * k
    zero = ExtensionClass.zero(k, eta)

    def pi_at(coords: np.ndarray) -> np.ndarray:
        return bracket_matrix(zero.with_coords(coords), ctx).entries

    basis = np.eye(size, dtype=complex)
    diagonal = [pi_at(basis[j]) for j in range(size)]
    K = np.zeros((size, size, size, size), dtype=complex)
    for j in range(size):
        K[:, :, j, j] = diagonal[j]
        for s in range(j + 1, size):
            mixed = (pi_at(basis[j] + basis[s]) - diagonal[j] - diagonal[s]) / 2.0
            K[:, :, j, s] = mixed
            K[:, :, s, j] = mixed
    return BracketTensor(k, complex(eta), K)


def bracket_gradient(x: ExtensionClass, ctx: NumericContext) -> np.ndarray:
    """Exact derivatives d Pi[m][n] / d x_p, indexed [p, m, n]."""
    return bracket_tensor(x.k, x.eta, ctx).gradient(x)


def jacobiator(
    x: ExtensionClass,
    m: int,
    n: int,
    s: int,
    ctx: NumericContext,
    tensor: BracketTensor | None = None,
    require_admissible: bool = True,
) -> complex:
    """Cyclic sum sum_p Pi^pm d_p Pi^ns + Pi^pn d_p Pi^sm + Pi^ps d_p Pi^mn.

    ``require_admissible=False`` evaluates off the admissible locus; such
    values are diagnostics only.

    Raises:
        InvalidCovectorError: If x_m, x_n or x_s is nonzero and admissibility is required.
    """
    _check_index(x, m, n, s)
    if require_admissible:
        _check_admissible(x, (m, n, s), ctx)
    tensor = tensor or bracket_tensor(x.k, x.eta, ctx)
    pi = tensor.evaluate(x)
    grad = tensor.gradient(x)
    return complex(
        np.dot(pi[:, m], grad[:, n, s])
        + np.dot(pi[:, n], grad[:, s, m])
        + np.dot(pi[:, s], grad[:, m, n])
    )


def jacobi_scale(x: ExtensionClass, tensor: BracketTensor) -> float:
    """Reference magnitude |Pi| |dPi| for judging a Jacobiator value."""
    return float(np.max(np.abs(tensor.evaluate(x))) * np.max(np.abs(tensor.gradient(x))))


class ClosedFormBracket:
    """Bracket source backed by the closed double sum."""

    def __init__(self, ctx: NumericContext) -> None:
        self.ctx = ctx

    @property
    def name(self) -> str:
        return "closed"

    def entry(self, x: ExtensionClass, m: int, n: int) -> complex:
        return bracket_entry_closed(x, m, n, self.ctx)

    def matrix(self, x: ExtensionClass) -> np.ndarray:
        return bracket_matrix(x, self.ctx).entries


class SeriesPathBracket:
    """Bracket source backed by the series construction; rows need x_m = 0."""

    def __init__(self, ctx: NumericContext) -> None:
        self.ctx = ctx

    @property
    def name(self) -> str:
        return "series"

    def entry(self, x: ExtensionClass, m: int, n: int) -> complex:
        _check_index(x, n)
        return complex(bivector_apply_series(x, m, self.ctx).coords[n])

    def matrix(self, x: ExtensionClass) -> np.ndarray:
        return series_path_matrix(x, self.ctx)
