"""Matrix multipliers for rank-two extensions and their endomorphism bundles.

Multipliers act on the right: a section is a row vector f with
f(qz) a(z) = f(z). The extension of xi_0 = (eta^k, k) by its dual is

    a(z) = [[(eta z)^-k, 0], [(eta z)^k x(z), (eta z)^k]],

so the stored corner carries (eta z)^k x while the class coordinates are
those of the plain polynomial x(z) = sum_j x_j z^j, 0 <= j < 2k, in
H^1 of LineBundle(eta^-2k, -2k).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .context import NumericContext
from .errors import DomainError, InvalidSectionError, SingularMultiplierError, ValidationError
from .laurent import LaurentSeries, Window, q_shift, series_inverse
from .theta import (
    H1Class,
    LineBundle,
    ThetaVector,
    functional_residual,
    h1_reduce,
    realize,
)

# Set up logger
logger = logging.getLogger(__name__)


def multiplier_window(k: int, ctx: NumericContext) -> Window:
    """Symmetric window wide enough for every entry of the End(V) multiplier."""
    w = max(int(ctx.default_window), 6 * k)  # type: ignore[arg-type]
    return (-w, w)


class Multiplier:
    """A square matrix of Laurent series sharing one window."""

    def __init__(self, entries: Sequence[Sequence[LaurentSeries]]) -> None:
        rows = [list(row) for row in entries]
        n = len(rows)
        if n == 0 or any(len(row) != n for row in rows):
            raise ValidationError("multiplier entries must form a non-empty square matrix")
        window = rows[0][0].window
        if any(entry.window != window for row in rows for entry in row):
            raise ValidationError("multiplier entries must share one window")
        self._entries = tuple(tuple(row) for row in rows)
        self._window = window

    @classmethod
    def identity(cls, n: int, window: Window) -> "Multiplier":
        return cls.diagonal([LaurentSeries.monomial(0, window)] * n)

    @classmethod
    def diagonal(cls, series: Sequence[LaurentSeries]) -> "Multiplier":
        n = len(series)
        window = series[0].window
        zero = LaurentSeries.zero(window)
        return cls([[series[i] if i == j else zero for j in range(n)] for i in range(n)])

    @property
    def size(self) -> int:
        return len(self._entries)

    @property
    def window(self) -> Window:
        return self._window

    @property
    def entries(self) -> tuple[tuple[LaurentSeries, ...], ...]:
        return self._entries

    def __getitem__(self, index: tuple[int, int]) -> LaurentSeries:
        i, j = index
        return self._entries[i][j]

    def __matmul__(self, other: "Multiplier") -> "Multiplier":
        if self.size != other.size:
            raise ValidationError(f"cannot multiply {self.size}x{self.size} by {other.size}x{other.size}")
        n = self.size
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                total = LaurentSeries.zero(self._window)
                for p in range(n):
                    total = total + self[i, p] * other[p, j]
                row.append(total)
            out.append(row)
        return Multiplier(out)

    def transpose(self) -> "Multiplier":
        n = self.size
        return Multiplier([[self[j, i] for j in range(n)] for i in range(n)])

    def scale(self, factor: LaurentSeries) -> "Multiplier":
        return Multiplier([[entry * factor for entry in row] for row in self._entries])

    def _minor(self, i: int, j: int) -> "Multiplier":
        return Multiplier(
            [
                [entry for c, entry in enumerate(row) if c != j]
                for r, row in enumerate(self._entries)
                if r != i
            ]
        )

    def determinant(self) -> LaurentSeries:
        """Cofactor expansion along the first row."""
        if self.size == 1:
            return self[0, 0]
        total = LaurentSeries.zero(self._window)
        for j in range(self.size):
            term = self[0, j] * self._minor(0, j).determinant()
            total = total + term if j % 2 == 0 else total - term
        return total

    def adjugate(self) -> "Multiplier":
        n = self.size
        if n == 1:
            return Multiplier([[LaurentSeries.monomial(0, self._window)]])
        cofactors = [
            [self._minor(i, j).determinant().scale((-1) ** (i + j)) for j in range(n)]
            for i in range(n)
        ]
        return Multiplier(cofactors).transpose()

    def inverse(self, ctx: NumericContext) -> "Multiplier":
        """Inverse through the adjugate and the series inverse of the determinant.

        Raises:
            SingularMultiplierError: If the determinant is not a unit on the window.
        """
        det = self.determinant()
        try:
            det_inverse = series_inverse(det, ctx)
        except SingularMultiplierError as e:
            raise SingularMultiplierError(f"multiplier is not invertible: {e}") from e
        return self.adjugate().scale(det_inverse)

    def kron(self, other: "Multiplier") -> "Multiplier":
        """Tensor product; row (i, j) is i * other.size + j."""
        n, m = self.size, other.size
        return Multiplier(
            [
                [self[i, p] * other[j, s] for p in range(n) for s in range(m)]
                for i in range(n)
                for j in range(m)
            ]
        )

    def max_deviation(self, other: "Multiplier", window: Window | None = None) -> float:
        """Largest coefficient difference between two multipliers on ``window``."""
        if self.size != other.size:
            raise ValidationError("multipliers of different sizes cannot be compared")
        window = window or self._window
        return max(
            (self[i, j].restrict(window) - other[i, j].restrict(window)).max_abs()
            for i in range(self.size)
            for j in range(self.size)
        )

    def to_dict(self, threshold: float = 0.0) -> dict[str, Any]:
        return {
            "size": self.size,
            "entries": [[entry.to_dict(threshold) for entry in row] for row in self._entries],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Multiplier":
        try:
            rows = data["entries"]
        except (KeyError, TypeError) as e:
            raise ValidationError(f"malformed multiplier payload: {e}") from e
        return cls([[LaurentSeries.from_dict(entry) for entry in row] for row in rows])


@dataclass(frozen=True)
class ExtensionClass:
    """A class in Ext^1(xi_0, xi_0^*) = H^1(eta^-2k, -2k), canonical coordinates x_0..x_{2k-1}."""

    k: int
    eta: complex
    coords: np.ndarray = field(compare=False)

    def __post_init__(self) -> None:
        if int(self.k) < 1:
            raise ValidationError(f"k must be a positive integer, got {self.k!r}")
        eta = complex(self.eta)
        if eta == 0 or not np.isfinite(eta):
            raise ValidationError(f"eta must be finite and nonzero, got {self.eta!r}")
        coords = np.array(self.coords, dtype=complex).reshape(-1)
        if coords.shape != (2 * int(self.k),):
            raise ValidationError(
                f"an extension class at k = {self.k} needs {2 * int(self.k)} coordinates, "
                f"got {coords.shape[0]}"
            )
        coords.setflags(write=False)
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "coords", coords)

    @classmethod
    def zero(cls, k: int, eta: complex) -> "ExtensionClass":
        return cls(k, eta, np.zeros(2 * k, dtype=complex))

    @property
    def bundle(self) -> LineBundle:
        """The line bundle whose H^1 holds the class."""
        return LineBundle(self.eta ** (-2 * self.k), -2 * self.k)

    @property
    def xi0(self) -> LineBundle:
        return LineBundle(self.eta**self.k, self.k)

    def as_h1(self) -> H1Class:
        return H1Class(self.bundle, self.coords)

    def polynomial(self, window: Window) -> LaurentSeries:
        """The representative x(z) = sum_j x_j z^j."""
        return LaurentSeries.polynomial(self.coords, window)

    def with_coords(self, coords: Sequence[complex] | np.ndarray) -> "ExtensionClass":
        return ExtensionClass(self.k, self.eta, coords)

    def with_zeroed(self, indices: Sequence[int]) -> "ExtensionClass":
        """Copy with the given coordinates set to 0, e.g. to make covectors admissible."""
        coords = self.coords.copy()
        coords[list(indices)] = 0.0
        return self.with_coords(coords)

    def scaled(self, factor: complex) -> "ExtensionClass":
        return self.with_coords(self.coords * factor)

    @property
    def vanishes(self) -> bool:
        """Exactly zero; any nonzero multiple of a class counts as nonzero."""
        return not np.any(self.coords)

    def to_dict(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "eta": [self.eta.real, self.eta.imag],
            "x": [[z.real, z.imag] for z in self.coords],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ExtensionClass":
        try:
            eta = complex(data["eta"][0], data["eta"][1])
            coords = [complex(v[0], v[1]) for v in data["x"]]
            k = int(data["k"])
        except (KeyError, TypeError, ValueError, IndexError) as e:
            raise ValidationError(f"malformed extension class payload: {e}") from e
        return cls(k, eta, coords)


@dataclass(frozen=True)
class ParabolicSection:
    """A section (a, b, c, d) of End(V) in the basis e_i^* (x) e_j.

    b is the Hom(xi_0^*, xi_0) component; flag-preserving sections have b = 0.
    """

    a: LaurentSeries
    b: LaurentSeries
    c: LaurentSeries
    d: LaurentSeries
    trace_free: bool = False
    parabolic: bool = False
    tol: float = 1e-9

    def __post_init__(self) -> None:
        scale = max(self.a.max_abs(), self.d.max_abs(), 1.0)
        if self.trace_free and not (self.a + self.d).is_negligible(self.tol, scale):
            raise InvalidSectionError("section flagged trace-free has a + d != 0")
        if self.parabolic and not self.b.is_negligible(self.tol, scale):
            raise InvalidSectionError("section flagged parabolic has b != 0")

    def as_row(self) -> list[LaurentSeries]:
        return [self.a, self.b, self.c, self.d]

    def residual(self, x: ExtensionClass, ctx: NumericContext) -> float:
        """Relative residual of v(qz) M(z) - v(z) against the End(V) multiplier."""
        m = end_multiplier(x, ctx)
        row = [entry.restrict(m.window) for entry in self.as_row()]
        shifted = [q_shift(entry, ctx) for entry in row]
        # entries span z^-2k .. z^(6k-2); only this range sees every needed term
        inner = (m.window[0] + 6 * x.k, m.window[1] - 2 * x.k)
        scale = max(max(entry.max_abs() for entry in row), np.finfo(float).tiny)
        worst = 0.0
        for j in range(4):
            total = LaurentSeries.zero(m.window)
            for i in range(4):
                total = total + shifted[i] * m[i, j]
            worst = max(worst, (total - row[j]).restrict(inner).max_abs())
        return worst / scale


def _eta_z_power(eta: complex, power: int, window: Window) -> LaurentSeries:
    return LaurentSeries.monomial(power, window, eta**power)


def dual_multiplier(m: Multiplier, ctx: NumericContext) -> Multiplier:
    """Inverse transpose of a multiplier.

    Raises:
        SingularMultiplierError: If the determinant is not a unit.
    """
    return m.inverse(ctx).transpose()


def extension_multiplier(x: ExtensionClass, ctx: NumericContext) -> Multiplier:
    """The lower-triangular multiplier of the extension classified by x."""
    window = multiplier_window(x.k, ctx)
    up = _eta_z_power(x.eta, x.k, window)
    down = _eta_z_power(x.eta, -x.k, window)
    corner = up * x.polynomial(window)
    return Multiplier([[down, LaurentSeries.zero(window)], [corner, up]])


def end_multiplier(x: ExtensionClass, ctx: NumericContext) -> Multiplier:
    """The End(V) multiplier on (e1*e1, e1*e2, e2*e1, e2*e2), written out entrywise."""
    window = multiplier_window(x.k, ctx)
    one = LaurentSeries.monomial(0, window)
    zero = LaurentSeries.zero(window)
    up2 = _eta_z_power(x.eta, 2 * x.k, window)
    down2 = _eta_z_power(x.eta, -2 * x.k, window)
    poly = x.polynomial(window)
    up2_x = up2 * poly
    return Multiplier(
        [
            [one, zero, -poly, zero],
            [up2_x, up2, -(up2_x * poly), -up2_x],
            [zero, zero, down2, zero],
            [zero, zero, poly, one],
        ]
    )


def coboundary(
    x: ExtensionClass, b: ThetaVector | LaurentSeries, ctx: NumericContext
) -> H1Class:
    """Connecting map H^0(xi_0) -> H^1(xi_0^*), b -> [b x].

    Raises:
        DomainError: If a theta vector lives on a bundle other than xi_0.
        InvalidSectionError: If a series b fails the functional equation of xi_0.
    """
    if isinstance(b, ThetaVector):
        if not (b.bundle.d == x.k and abs(b.bundle.c - x.xi0.c) < ctx.tol * 1e3):
            raise DomainError(f"section lives on {b.bundle}, expected {x.xi0}")
        series = realize(b, ctx)
    else:
        series = b
        residual = functional_residual(x.xi0, series, ctx)
        if residual > ctx.tol * 1e3:
            raise InvalidSectionError(
                f"series is not a section of {x.xi0}: residual {residual:.2e}"
            )
    return h1_reduce(x.xi0.dual(), series * x.polynomial(series.window), ctx)


def extension_class(m: Multiplier, ctx: NumericContext) -> ExtensionClass:
    """Read the extension class off a multiplier of extension shape.

    Raises:
        DomainError: If m is not 2x2 lower-triangular with diagonal
            ((eta z)^-k, (eta z)^k).
    """
    if m.size != 2:
        raise DomainError(f"extension multipliers are 2x2, got {m.size}x{m.size}")
    scale = max(m[0, 0].max_abs(), m[1, 1].max_abs())
    if not m[0, 1].is_negligible(ctx.tol, scale):
        raise DomainError("extension multiplier must be lower-triangular")
    up = m[1, 1].terms(ctx.tol * scale)
    if len(up) != 1:
        raise DomainError("lower-right entry must be a monomial (eta z)^k")
    ((k, coefficient),) = up.items()
    if k < 1:
        raise DomainError(f"lower-right entry must have positive degree, got z^{k}")
    eta = complex(coefficient) ** (1.0 / k)
    # any k-th root of the coefficient is a valid eta; pick the one matching the upper-left entry
    roots = eta * np.exp(2j * np.pi * np.arange(k) / k)
    mismatches = [
        (m[0, 0] - _eta_z_power(root, -k, m.window)).max_abs() for root in roots
    ]
    eta = complex(roots[int(np.argmin(mismatches))])
    down = _eta_z_power(eta, -k, m.window)
    if not (m[0, 0] - down).is_negligible(ctx.tol * 1e3, scale):
        raise DomainError("upper-left entry must be (eta z)^-k for the same eta and k")
    normalized = m[1, 0].shift(-k).scale(eta ** (-k))
    bundle = LineBundle(eta ** (-2 * k), -2 * k)
    return ExtensionClass(k, eta, h1_reduce(bundle, normalized, ctx).coords)


def parabolic_aut_dim(x: ExtensionClass, ctx: NumericContext, trace_free: bool = False) -> int:
    """Dimension of the flag-preserving (b = 0) sections of End(V).

    Unknowns are the coefficients of a and d on the default window. The rows
    impose a(qz) = a, d(qz) = d and the vanishing of [(a(qz) - d(qz)) x] in
    H^1(eta^-2k, -2k), which is the solvability condition for c. That
    bundle has negative degree, so c is fixed once a and d are. Rank uses a singular value cutoff at
    tol times the largest one, after normalizing every row.
    """
    lo, hi = ctx.window
    ls = np.arange(lo, hi + 1)
    n = ls.size
    bundle = x.bundle
    wide = (lo - 2 * x.k, hi + 2 * x.k)
    poly = x.polynomial(wide)
    reduced = np.array(
        [h1_reduce(bundle, poly.shift(int(l)).restrict(wide), ctx).coords for l in ls]
    ).T
    q_powers = np.power(ctx.q, ls)
    rows = []
    for l_index in range(n):
        for offset in (0, n):
            row = np.zeros(2 * n, dtype=complex)
            row[offset + l_index] = q_powers[l_index] - 1.0
            rows.append(row)
    for r in range(2 * x.k):
        weights = q_powers * reduced[r]
        rows.append(np.concatenate([weights, -weights]))
    if trace_free:
        for l_index in range(n):
            row = np.zeros(2 * n, dtype=complex)
            row[l_index] = row[n + l_index] = 1.0
            rows.append(row)
    system = np.array(rows)
    norms = np.linalg.norm(system, axis=1)
    system = system[norms > 0] / norms[norms > 0, None]
    singular = np.linalg.svd(system, compute_uv=False)
    rank = int(np.sum(singular > ctx.tol * singular[0])) if singular.size else 0
    dim = 2 * n - rank
    logger.debug(f"parabolic_aut_dim k={x.k} trace_free={trace_free}: rank {rank}, dim {dim}")
    return dim
