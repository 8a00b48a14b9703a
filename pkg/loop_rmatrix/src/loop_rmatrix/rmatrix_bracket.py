import logging

import numpy as np

from qdiff_core import NumericContext, power_product
from loop_rmatrix.interface import ILoopBracket
from loop_rmatrix.kernels import tau_values
from loop_rmatrix.orbit import LoopOrbitPoint

# Set up logger
logger = logging.getLogger(__name__)


class RMatrixLoopBracket(ILoopBracket):
    """
    RMatrixLoopBracket implements ILoopBracket with the tau kernel of the
    SL2 loop r-matrix, restricted to the lifted orbit of xi_0.

    Coefficients outside the stored window of an orbit point are zero; the
    Gaussian sums over orbit representatives stop at the context's level-k bound.
    """

    def __init__(self, ctx: NumericContext) -> None:
        """
        Initializes the bracket.

        Args:
            ctx (NumericContext): Supplies q, the tolerance and truncation bounds.
        """
        self._ctx = ctx

    @property
    def ctx(self) -> NumericContext:
        return self._ctx

    def _bound(self, k: int) -> int:
        return self._ctx.gaussian_bound(k, extra=1)

    def coeff_bracket_cc(self, pt: LoopOrbitPoint, m: int, n: int) -> complex:
        """
        {c_m, c_n} = 2 sum_{l != 0} tau_l c_{m-l} c_{n+l}.
        """
        first = pt.xcoeffs.exponents
        ls = m - first
        second = n + ls
        keep = ls != 0
        values = tau_values(ls[keep], self._ctx) * pt.c_at(first[keep]) * pt.c_at(second[keep])
        return complex(2.0 * np.sum(values))

    def coeff_bracket_ac(self, pt: LoopOrbitPoint, m: int, n: int) -> complex:
        """
        {a_m, c_n} = (3/2) a_m c_n - (1/2) sum_{l != 0} a_{m-l} c_{n+l}.

        With a supported at -k the sum keeps only l = m + k.
        """
        total = 1.5 * pt.a(m) * pt.c(n)
        l = m + pt.k
        if l != 0:
            total -= 0.5 * pt.a_minus_k * pt.c(n + l)
        return complex(total)

    def coeff_bracket_aa(self, pt: LoopOrbitPoint, m: int, n: int) -> complex:
        """
        {a_m, a_n} vanishes identically.
        """
        return 0j

    def _weights(self, pt: LoopOrbitPoint, n: int, ls: np.ndarray) -> np.ndarray:
        # q^(n l + k l^2) a_{-k}^(2l)
        return power_product(pt.a_minus_k, 2 * ls, self._ctx.q, n * ls + pt.k * ls * ls)

    def invariant_functional(self, pt: LoopOrbitPoint, n: int) -> complex:
        """
        theta_n = sum_l q^(n l) q^(k l^2) a_{-k}^(2l) c_{2kl+n}.
        """
        period = 2 * pt.k
        lo, hi = pt.xcoeffs.window
        ls = np.arange(-((n - lo) // period), (hi - n) // period + 1)
        return complex(np.sum(self._weights(pt, n, ls) * pt.c_at(period * ls + n)))

    def reduced_bracket(self, pt: LoopOrbitPoint, m: int, n: int) -> complex:
        """
        {theta_m, theta_n} = 2 sum_{s != 0} sum_{l, j} tau_s
            q^(n l + m j) q^(k (l^2 + j^2)) a_{-k}^(2(l + j)) c_{2kj+m-s} c_{2kl+n+s}.
        """
        k = pt.k
        L = self._bound(k)
        span = np.arange(-L, L + 1)
        js, ls, first = np.meshgrid(span, span, pt.xcoeffs.exponents, indexing="ij")
        js, ls, first = js.ravel(), ls.ravel(), first.ravel()
        ss = 2 * k * js + m - first
        second = 2 * k * ls + n + ss
        keep = ss != 0
        js, ls, first, ss, second = js[keep], ls[keep], first[keep], ss[keep], second[keep]
        weights = self._weights(pt, m, js) * self._weights(pt, n, ls)
        values = weights * tau_values(ss, self._ctx) * pt.c_at(first) * pt.c_at(second)
        return complex(2.0 * np.sum(values))

    def reduced_bracket_leibniz(self, pt: LoopOrbitPoint, m: int, n: int) -> complex:
        """
        The shorthand {theta_m(z), theta_n(w)} = 2 tau(w/z) theta_m(z) theta_n(w),
        expanded coefficientwise into c-brackets.

        Args:
            pt (LoopOrbitPoint): The point of the orbit lift.
            m (int): Index of the first functional.
            n (int): Index of the second functional.

        Returns:
            complex: The same value as reduced_bracket, summed in a different order.
        """
        k = pt.k
        span = np.arange(-self._bound(k), self._bound(k) + 1)
        left = self._weights(pt, m, span)
        right = self._weights(pt, n, span)
        total = 0j
        for J, wj in zip(span, left):
            if wj == 0:
                continue
            for L, wl in zip(span, right):
                if wl == 0:
                    continue
                total += wj * wl * self.coeff_bracket_cc(pt, 2 * k * J + m, 2 * k * L + n)
        return complex(total)
