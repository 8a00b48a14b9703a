from typing import Any, Mapping, Optional

import numpy as np

from qdiff_core import ExtensionClass, LaurentSeries, NumericContext, ValidationError


class LoopOrbitPoint:
    """
    A point of the lifted orbit: the lower-triangular loop
    [[a_{-k} z^-k, 0], [x(z), z^k / a_{-k}]] with off-diagonal coefficients c_i.

    Attributes:
        k (int): Degree of xi_0.
        eta (complex): Multiplier scalar of xi_0.
        xcoeffs (LaurentSeries): The coefficients c_i of x(z).
        a_minus_k (complex): The diagonal coefficient a_{-k}.
    """

    def __init__(
        self,
        k: int,
        eta: complex,
        xcoeffs: LaurentSeries,
        a_minus_k: Optional[complex] = None,
    ) -> None:
        """
        Initializes an orbit point.

        Args:
            k (int): Degree of xi_0, positive.
            eta (complex): Multiplier scalar of xi_0.
            xcoeffs (LaurentSeries): Coefficients c_i, zero outside the window.
            a_minus_k (complex, optional): Defaults to eta^-k, the l = 0 orbit representative.
        """
        if int(k) < 1:
            raise ValidationError(f"k must be a positive integer, got {k!r}")
        self._k = int(k)
        self._eta = complex(eta)
        self._xcoeffs = xcoeffs
        self._a = complex(a_minus_k) if a_minus_k is not None else self._eta ** (-self._k)
        if self._a == 0:
            raise ValidationError("a_{-k} must be nonzero")

    @classmethod
    def from_extension(cls, x: ExtensionClass, ctx: NumericContext) -> "LoopOrbitPoint":
        """
        Lifts an extension class through the corner entry (eta z)^k x(z).

        Args:
            x (ExtensionClass): Canonical class, supported on 0..2k-1.
            ctx (NumericContext): Supplies the window.

        Returns:
            LoopOrbitPoint: The point with c_i = eta^k x_{i-k}, supported on k..3k-1.
        """
        w = max(int(ctx.default_window), 4 * x.k)
        coeffs = LaurentSeries.polynomial(x.coords * x.eta**x.k, (-w, w), offset=x.k)
        return cls(x.k, x.eta, coeffs)

    @property
    def k(self) -> int:
        return self._k

    @property
    def eta(self) -> complex:
        return self._eta

    @property
    def xcoeffs(self) -> LaurentSeries:
        return self._xcoeffs

    @property
    def a_minus_k(self) -> complex:
        return self._a

    def c(self, i: int) -> complex:
        """
        Returns c_i, zero outside the stored window.
        """
        if not self._xcoeffs.lo <= i <= self._xcoeffs.hi:
            return 0j
        return self._xcoeffs.coefficient(i)

    def c_at(self, indices: np.ndarray) -> np.ndarray:
        """
        Vectorized c_i lookup, zero outside the stored window.
        """
        indices = np.asarray(indices)
        out = np.zeros(indices.shape, dtype=complex)
        inside = (indices >= self._xcoeffs.lo) & (indices <= self._xcoeffs.hi)
        out[inside] = self._xcoeffs.coefficients[indices[inside] - self._xcoeffs.lo]
        return out

    def a(self, i: int) -> complex:
        """
        Returns a_i; the diagonal is supported at -k only.
        """
        return self._a if i == -self._k else 0j

    def act(self, l: int, ctx: NumericContext, strength: complex = 1.0) -> "LoopOrbitPoint":
        """
        Applies the LN_- element [[1, 0], [t z^l, 1]] by q-conjugation.

        The off-diagonal entry changes by t (z^(k+l) / a_{-k} - q^l a_{-k} z^(l-k)).

        Args:
            l (int): Exponent of the unipotent entry.
            ctx (NumericContext): Supplies q.
            strength (complex, optional): The scalar t.

        Returns:
            LoopOrbitPoint: The transformed point.
        """
        lo = min(self._xcoeffs.lo, l - self._k)
        hi = max(self._xcoeffs.hi, l + self._k)
        window = (min(lo, 0), max(hi, 0))
        change = LaurentSeries.from_terms(
            {
                self._k + l: strength / self._a,
                l - self._k: -strength * complex(ctx.q) ** l * self._a,
            },
            window,
        )
        return LoopOrbitPoint(
            self._k, self._eta, self._xcoeffs.restrict(window) + change, self._a
        )

    def to_dict(self) -> dict[str, Any]:
        """
        Serializes the point.

        Returns:
            dict[str, Any]: k, eta, a_{-k} and the coefficient series.
        """
        return {
            "k": self._k,
            "eta": [self._eta.real, self._eta.imag],
            "a_minus_k": [self._a.real, self._a.imag],
            "xcoeffs": self._xcoeffs.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "LoopOrbitPoint":
        """
        Rebuilds a point from its serialized form.
        """
        try:
            eta = complex(data["eta"][0], data["eta"][1])
            a = complex(data["a_minus_k"][0], data["a_minus_k"][1])
            k = int(data["k"])
            series = LaurentSeries.from_dict(data["xcoeffs"])
        except (KeyError, TypeError, ValueError, IndexError) as e:
            raise ValidationError(f"malformed orbit point payload: {e}") from e
        return cls(k, eta, series, a)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LoopOrbitPoint):
            return NotImplemented
        return (
            self._k == other._k
            and self._eta == other._eta
            and self._a == other._a
            and self._xcoeffs.window == other._xcoeffs.window
            and bool(np.array_equal(self._xcoeffs.coefficients, other._xcoeffs.coefficients))
        )
