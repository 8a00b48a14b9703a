"""Instability index and symplectic-leaf strata of Ext^1(xi_0, xi_0^*).

A line bundle L of degree j with multiplier c z^j maps into V exactly when
some a in Hom(L, xi_0) = H^0(eta^k / c, k - j) kills x, i.e. when the
pairing matrix

    M[r, s] = <a_r s_s, x>,   s_s in H^0(L (x) xi_0) = H^0(c eta^k, k + j),

has a nonzero left kernel. The search over c runs on the fundamental
annulus |q| < |c| <= 1 with a log-polar grid followed by Nelder-Mead
refinement of the scale-free ratio

    rho(c) = sigma_min(M) / (sigma_max(P) |x|),   M = P x.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import minimize

from .context import NumericContext
from .errors import DomainError, InternalConsistencyError, NonConvergenceError, ValidationError
from .laurent import constant_term, series_mul
from .multipliers import ExtensionClass
from .poisson import bracket_matrix
from .theta import LineBundle, h0_basis

# Set up logger
logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SearchSettings:
    """Knobs of the cParam search.

    Attributes:
        grid: Points per axis of the log-polar grid.
        candidates: Number of grid minima handed to the refinement.
        threshold: Witness acceptance bound on rho.
        max_iter: Nelder-Mead iteration budget per candidate.
    """

    grid: int = 64
    candidates: int = 6
    threshold: float = 1e-7
    max_iter: int = 2000

    def __post_init__(self) -> None:
        if self.grid < 4:
            raise ValidationError(f"grid must be at least 4, got {self.grid}")
        if self.candidates < 1:
            raise ValidationError(f"candidates must be positive, got {self.candidates}")
        if not 0.0 < self.threshold < 1.0:
            raise ValidationError(f"threshold must lie in (0, 1), got {self.threshold}")
        if self.max_iter < 1:
            raise ValidationError(f"max_iter must be positive, got {self.max_iter}")


def normalize_to_annulus(c: complex, q: complex) -> complex:
    """Multiply c by a power of q so that |q| < |c| <= 1."""
    c = complex(c)
    if c == 0:
        raise DomainError("cannot normalize c = 0")
    t = math.log(abs(c)) / math.log(abs(q))
    return c * complex(q) ** (-math.floor(t))


def same_modulo_q(c1: complex, c2: complex, q: complex, tol: float = 1e-8) -> bool:
    """True iff c1 / c2 is numerically a power of q."""
    a = normalize_to_annulus(c1, q)
    b = normalize_to_annulus(c2, q)
    # points near |c| = |q| may normalize to opposite edges of the annulus
    return any(abs(a - b * q**e) <= tol * abs(a) for e in (-1, 0, 1))


@dataclass(frozen=True)
class SubBundleProbe:
    """A candidate line sub-bundle L with multiplier c_param z^j."""

    j: int
    c_param: complex

    def __post_init__(self) -> None:
        c = complex(self.c_param)
        if c == 0 or not np.isfinite(c):
            raise DomainError(f"c_param must be finite and nonzero, got {self.c_param!r}")
        if self.j < 0:
            raise DomainError(f"probe degree must be non-negative, got {self.j}")
        object.__setattr__(self, "c_param", c)

    def hom_bundle(self, k: int, eta: complex) -> LineBundle:
        """Hom(L, xi_0) = (eta^k / c, k - j)."""
        return LineBundle(eta**k / self.c_param, k - self.j)

    def twist_bundle(self, k: int, eta: complex) -> LineBundle:
        """L (x) xi_0 = (c eta^k, k + j)."""
        return LineBundle(self.c_param * eta**k, k + self.j)


@dataclass(frozen=True)
class Witness:
    """A destabilizing line bundle found by the search."""

    c_param: complex
    kernel: np.ndarray = field(compare=False)
    residual: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "c_param": [self.c_param.real, self.c_param.imag],
            "kernel": [[z.real, z.imag] for z in self.kernel],
            "residual": self.residual,
        }


@dataclass(frozen=True)
class StratumReport:
    """Instability index of x with the derived leaf data."""

    x: ExtensionClass
    index_j: int
    witness: Optional[Witness]
    leaf_dim: int
    pi_rank: int

    @property
    def stratum(self) -> str:
        if self.index_j == self.x.k:
            return "split"
        return "semistable" if self.index_j == 0 else "unstable"

    def to_dict(self) -> dict[str, Any]:
        return {
            "k": self.x.k,
            "eta": [self.x.eta.real, self.x.eta.imag],
            "x": [[z.real, z.imag] for z in self.x.coords],
            "index_j": self.index_j,
            "leaf_dim": self.leaf_dim,
            "pi_rank": self.pi_rank,
            "stratum": self.stratum,
            "witness": self.witness.to_dict() if self.witness else None,
        }


def leaf_dimension(k: int, index_j: int) -> int:
    """2(k - j - 1) below the split stratum, 0 on it."""
    return 0 if index_j >= k else 2 * (k - index_j - 1)


def _probe_bases(k: int, eta: complex, probe: SubBundleProbe, ctx: NumericContext):
    if not probe.j < k:
        raise DomainError(f"pairing matrices need j < k, got j = {probe.j}, k = {k}")
    hom = h0_basis(probe.hom_bundle(k, eta), ctx)
    twist = h0_basis(probe.twist_bundle(k, eta), ctx)
    if not hom or not twist:
        raise DomainError(f"empty H0 basis for probe {probe}")
    return hom, twist


def pairing_tensor(k: int, eta: complex, probe: SubBundleProbe, ctx: NumericContext) -> np.ndarray:
    """P[r, s, jx] = [a_r s_s]_(-jx), so that M = P x."""
    hom, twist = _probe_bases(k, eta, probe, ctx)
    P = np.zeros((len(hom), len(twist), 2 * k), dtype=complex)
    for r, a in enumerate(hom):
        for s, sec in enumerate(twist):
            product = series_mul(a, sec)
            for jx in range(2 * k):
                if product.lo <= -jx:
                    P[r, s, jx] = product.coefficient(-jx)
    return P


def pairing_matrix(x: ExtensionClass, probe: SubBundleProbe, ctx: NumericContext) -> np.ndarray:
    """M[r, s] = <a_r s_s, x>, the Serre pairing of the product section with x.

    Raises:
        DomainError: If j >= k or a basis is empty.
    """
    hom, twist = _probe_bases(x.k, x.eta, probe, ctx)
    M = np.zeros((len(hom), len(twist)), dtype=complex)
    for r, a in enumerate(hom):
        for s, sec in enumerate(twist):
            product = series_mul(a, sec)
            M[r, s] = constant_term(series_mul(product, x.polynomial(product.window)))
    return M


def _ratio(P: np.ndarray, x: np.ndarray) -> float:
    M = np.tensordot(P, x, axes=([2], [0]))
    sigma_m = np.linalg.svd(M, compute_uv=False)
    sigma_p = np.linalg.norm(P.reshape(-1, P.shape[-1]), ord=2)
    return float(sigma_m[-1] / (sigma_p * np.linalg.norm(x)))


@dataclass(frozen=True)
class PairingTable:
    """Term table of P(c) for a fixed degree j, evaluated for many c at once.

    Each term is w c^p contributing to P[r, s, jx]; the c dependence of both
    theta bases collapses to the single power p = t - l.
    """

    k: int
    j: int
    powers: np.ndarray = field(compare=False)
    weights: np.ndarray = field(compare=False)
    slots: np.ndarray = field(compare=False)

    @classmethod
    def build(cls, k: int, eta: complex, j: int, ctx: NumericContext) -> "PairingTable":
        if not 0 <= j < k:
            raise DomainError(f"pairing tables need 0 <= j < k, got j = {j}")
        d_a, d_s = k - j, k + j
        reach = ctx.gaussian_bound(1, extra=2)
        ts = np.arange(-reach, reach + 1)
        span = (reach + 1) * d_s + 4 * k
        ls = np.arange(-span, span + 1)
        L, T, R, S = np.meshgrid(ls, ts, np.arange(d_a), np.arange(d_s), indexing="ij")
        L, T, R, S = L.ravel(), T.ravel(), R.ravel(), S.ravel()
        jx = -(d_a * L + R + d_s * T + S)
        keep = (jx >= 0) & (jx < 2 * k)
        L, T, R, S, jx = L[keep], T[keep], R[keep], S[keep], jx[keep]
        q_power = L * R + d_a * L * (L - 1) // 2 + T * S + d_s * T * (T - 1) // 2
        log_w = q_power * np.log(ctx.q) + k * (L + T) * np.log(complex(eta))
        powers = T - L
        # drop terms negligible for every |q| <= |c| <= 1
        envelope = log_w.real + np.maximum(0.0, powers * math.log(abs(ctx.q)))
        live = envelope > math.log(ctx.eps) - 10.0
        slots = (R * d_s + S) * (2 * k) + jx
        logger.debug(f"pairing table k={k} j={j}: {int(live.sum())} live terms")
        return cls(k, j, powers[live], np.exp(log_w[live]), slots[live])

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.k - self.j, self.k + self.j, 2 * self.k)

    def tensor(self, cs: np.ndarray) -> np.ndarray:
        """Return P(c) for every c, shape (len(cs), k - j, k + j, 2k)."""
        cs = np.asarray(cs, dtype=complex).reshape(-1)
        values = self.weights[None, :] * np.power(cs[:, None], self.powers[None, :])
        size = int(np.prod(self.shape))
        scatter = np.zeros((self.slots.size, size))
        scatter[np.arange(self.slots.size), self.slots] = 1.0
        out = values @ scatter
        return out.reshape((cs.size,) + self.shape)

    def ratios(self, x: np.ndarray, cs: np.ndarray) -> np.ndarray:
        """rho(c) for every c."""
        P = self.tensor(cs)
        M = np.einsum("grsj,j->grs", P, x)
        sigma_m = np.linalg.svd(M, compute_uv=False)[:, -1]
        sigma_p = np.linalg.norm(P.reshape(P.shape[0], -1, P.shape[-1]), ord=2, axis=(1, 2))
        return sigma_m / (sigma_p * np.linalg.norm(x))


def annulus_grid(q: complex, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Log-polar grid on |q| < |c| <= 1 as (log radius, angle) pairs."""
    log_r = math.log(abs(q)) * (np.arange(n) + 0.5) / n
    theta = 2.0 * math.pi * np.arange(n) / n
    R, A = np.meshgrid(log_r, theta, indexing="ij")
    return R.ravel(), A.ravel()


def _refine(
    table: PairingTable,
    x: np.ndarray,
    start: tuple[float, float],
    steps: tuple[float, float],
    max_iter: int,
) -> tuple[complex, float]:
    def objective(p: np.ndarray) -> float:
        c = np.exp(p[0] + 1j * p[1])
        return float(table.ratios(x, np.array([c]))[0] ** 2)

    p0 = np.array(start)
    simplex = np.array([p0, p0 + [steps[0], 0.0], p0 + [0.0, steps[1]]])
    result = minimize(
        objective,
        p0,
        method="Nelder-Mead",
        options={
            "initial_simplex": simplex,
            "xatol": 1e-10,
            "fatol": 1e-18,
            "maxiter": max_iter,
        },
    )
    c = complex(np.exp(result.x[0] + 1j * result.x[1]))
    return c, math.sqrt(max(float(result.fun), 0.0))


def _split_witness(x: ExtensionClass, ctx: NumericContext) -> Optional[Witness]:
    """Degree-k test: L = xi_0 exactly, and the extension must split."""
    c = normalize_to_annulus(x.eta**x.k, ctx.q)
    hom = h0_basis(LineBundle(x.eta**x.k / c, 0), ctx)
    if not hom or not x.vanishes:
        return None
    return Witness(c, np.ones(1, dtype=complex), 0.0)


def split_probe_matches(x: ExtensionClass, probe: SubBundleProbe, ctx: NumericContext) -> bool:
    """For j = k: True iff L = xi_0 (c = eta^k mod q^Z) and x = 0."""
    if probe.j != x.k:
        raise DomainError(f"split probes have degree k = {x.k}, got {probe.j}")
    return bool(h0_basis(probe.hom_bundle(x.k, x.eta), ctx)) and x.vanishes


def _witness_at(
    x: ExtensionClass, j: int, c: complex, rho: float, ctx: NumericContext, search: SearchSettings
) -> Witness:
    c = normalize_to_annulus(c, ctx.q)
    probe = SubBundleProbe(j, c)
    M = pairing_matrix(x, probe, ctx)
    P = pairing_tensor(x.k, x.eta, probe, ctx)
    check = _ratio(P, x.coords)
    if check > search.threshold * 1e3:
        raise InternalConsistencyError(
            f"grid ratio {rho:.2e} and series ratio {check:.2e} disagree at c = {c}"
        )
    u, _, _ = np.linalg.svd(M)
    return Witness(c, u[:, -1].conj(), check)


def detect_at_degree(
    x: ExtensionClass,
    j: int,
    ctx: NumericContext,
    search: SearchSettings | None = None,
) -> Optional[Witness]:
    """Search for a degree-j line bundle mapping into V.

    Raises:
        DomainError: If j is outside 0..k.
        NonConvergenceError: If the best ratio stays within a decade of the
            threshold after a second refinement pass.
    """
    search = search or SearchSettings()
    if not 0 <= j <= x.k:
        raise DomainError(f"degree must satisfy 0 <= j <= {x.k}, got {j}")
    if j == x.k:
        return _split_witness(x, ctx)
    if x.vanishes:
        c = normalize_to_annulus(x.eta**x.k, ctx.q)
        kernel = np.zeros(x.k - j, dtype=complex)
        kernel[0] = 1.0
        return Witness(c, kernel, 0.0)

    table = PairingTable.build(x.k, x.eta, j, ctx)
    log_r, angle = annulus_grid(ctx.q, search.grid)
    rho = table.ratios(x.coords, np.exp(log_r + 1j * angle))
    steps = (abs(math.log(abs(ctx.q))) / search.grid, 2.0 * math.pi / search.grid)

    best_c, best_rho = 0j, math.inf
    for idx in np.argsort(rho)[: search.candidates]:
        c, value = _refine(table, x.coords, (log_r[idx], angle[idx]), steps, search.max_iter)
        if value < best_rho:
            best_c, best_rho = c, value
        if best_rho < search.threshold:
            break
    logger.debug(f"degree {j}: grid min {rho.min():.3e}, refined {best_rho:.3e}")

    if search.threshold <= best_rho < 10 * search.threshold:
        logger.warning(f"borderline ratio {best_rho:.2e} at degree {j}; refining again")
        start = (math.log(abs(best_c)), math.atan2(best_c.imag, best_c.real))
        small = (steps[0] * 1e-3, steps[1] * 1e-3)
        c, value = _refine(table, x.coords, start, small, 4 * search.max_iter)
        if value < best_rho:
            best_c, best_rho = c, value
        if best_rho >= search.threshold:
            raise NonConvergenceError(
                f"degree {j} search ended at ratio {best_rho:.2e}, within a decade of "
                f"{search.threshold:.0e}",
                best_candidate=best_c,
            )
    if best_rho < search.threshold:
        return _witness_at(x, j, best_c, best_rho, ctx, search)
    return None


def instability_index(
    x: ExtensionClass, ctx: NumericContext, search: SearchSettings | None = None
) -> StratumReport:
    """Scan j = k down to 0 and report the first degree with a witness.

    Raises:
        NonConvergenceError: If a search is inconclusive, or no degree yields
            a witness at all.
    """
    search = search or SearchSettings()
    pi_rank = bracket_matrix(x, ctx).rank(ctx.tol * 1e3)
    for j in range(x.k, -1, -1):
        witness = detect_at_degree(x, j, ctx, search)
        if witness is not None:
            logger.debug(f"instability index {j} for x = {x.coords}")
            return StratumReport(x, j, witness, leaf_dimension(x.k, j), pi_rank)
    raise NonConvergenceError("no degree-0 witness found; the search grid is too coarse")


@dataclass(frozen=True)
class PlantedClass:
    """An extension class built to lie in im(ev_a^*) for a chosen probe."""

    x: ExtensionClass
    probe: SubBundleProbe
    kernel: np.ndarray = field(compare=False)


def plant_unstable_class(
    k: int,
    eta: complex,
    j: int,
    c_param: complex,
    ctx: NumericContext,
    rng: np.random.Generator | None = None,
) -> PlantedClass:
    """Construct x killed by a = sum_r v_r a_r for L = (c_param, j).

    With rng None the first basis vector of Hom(L, xi_0) and the first null
    vector are used; otherwise both are drawn at random.
    """
    probe = SubBundleProbe(j, c_param)
    P = pairing_tensor(k, eta, probe, ctx)
    if rng is None:
        v = np.zeros(P.shape[0], dtype=complex)
        v[0] = 1.0
    else:
        v = rng.normal(size=P.shape[0]) + 1j * rng.normal(size=P.shape[0])
        v /= np.linalg.norm(v)
    G = np.tensordot(v, P, axes=([0], [0]))
    basis = null_space(G)
    if basis.shape[1] == 0:
        raise InternalConsistencyError(f"no class is killed by {probe}")
    if rng is None:
        coords = basis[:, 0]
    else:
        weights = rng.normal(size=basis.shape[1]) + 1j * rng.normal(size=basis.shape[1])
        coords = basis @ weights
    return PlantedClass(ExtensionClass(k, eta, coords), probe, v)
