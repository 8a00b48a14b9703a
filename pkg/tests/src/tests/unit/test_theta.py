import numpy as np
import pytest

from qdiff_core import (
    ConditioningError,
    DomainError,
    H1Class,
    LaurentSeries,
    LineBundle,
    ThetaVector,
    coboundary_series,
    functional_residual,
    get_context,
    h0_basis,
    h1_reduce,
    index_factor,
    pairing_table,
    realize,
    serre_pair,
    serre_pair_series,
    theta_basis,
    theta_series,
)


@pytest.fixture(scope="module")
def ctx():
    return get_context(0.1)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
@pytest.mark.parametrize("q", [0.1, 0.3])
@pytest.mark.parametrize("eta", [0.8, 0.6 + 0.3j])
def test_duality_tables_are_identity(k, q, eta):
    """Serre pairing and theta functionals are dual to the monomial basis."""
    pairing, functional = pairing_table(k, eta, get_context(q))
    assert np.max(np.abs(pairing - np.eye(k))) < 1e-9
    assert np.max(np.abs(functional - np.eye(k))) < 1e-9


@pytest.mark.parametrize("n", [0, 1, 2])
def test_theta_basis_solves_functional_equation(ctx, n):
    """c z^d theta(qz) = theta for every basis section."""
    bundle = LineBundle(0.8**3, 3)
    assert functional_residual(bundle, theta_basis(bundle, n, ctx), ctx) < 1e-10


def test_negative_index_is_rescaled_basis(ctx):
    """theta_{-1} is index_factor times theta_{d-1}."""
    bundle = LineBundle(0.64, 2)
    literal = theta_series(bundle, -1, ctx).restrict(ctx.window)
    rescaled = theta_basis(bundle, 1, ctx).restrict(ctx.window).scale(index_factor(bundle, -1, ctx))
    assert (literal - rescaled).max_abs() < 1e-9 * max(1.0, literal.max_abs())


def test_theta_basis_domain():
    """Basis indices outside 0..d-1 and non-positive degrees are rejected."""
    ctx = get_context(0.1)
    with pytest.raises(DomainError):
        theta_basis(LineBundle(0.5, 2), 2, ctx)
    with pytest.raises(DomainError):
        theta_series(LineBundle(0.5, -2), 0, ctx)


def test_conditioning_annulus():
    """A multiplier scalar far outside the annulus is refused."""
    with pytest.raises(ConditioningError):
        theta_basis(LineBundle(1e-8, 1), 0, get_context(0.1))


def test_serre_pairing_kills_coboundaries(ctx):
    """Sections pair to zero with coboundaries, reduced or not."""
    rng = np.random.default_rng(7)
    for k in (1, 2, 3, 4):
        bundle = LineBundle(0.8**k, k)
        g = LaurentSeries.polynomial(rng.normal(size=6) + 1j * rng.normal(size=6), ctx.window, offset=-2)
        f = coboundary_series(bundle.dual(), g, ctx)
        assert h1_reduce(bundle.dual(), f, ctx).is_zero(1e-9, max(1.0, g.max_abs()))
        for n in range(k):
            value = serre_pair_series(ThetaVector.basis(bundle, n), f, ctx)
            assert abs(value) < 1e-9 * max(1.0, g.max_abs())


def test_reduction_matches_pairing(ctx):
    """Pairing a shifted monomial equals pairing its reduced class."""
    bundle = LineBundle(0.8**2, 2)
    dual = bundle.dual()
    f = LaurentSeries.monomial(5, ctx.window)
    cls = h1_reduce(dual, f, ctx)
    theta = ThetaVector(bundle, [0.3, -1.0j])
    assert serre_pair_series(theta, f, ctx) == pytest.approx(serre_pair(theta, cls, ctx), abs=1e-10)


def test_serre_pair_needs_dual_bundles(ctx):
    """Pairing with a non-dual class is rejected."""
    theta = ThetaVector.basis(LineBundle(0.64, 2), 0)
    cls = H1Class(LineBundle(2.0, -2), [1.0, 0.0])
    with pytest.raises(DomainError):
        serre_pair(theta, cls, ctx)


def test_degree_zero_sections(ctx):
    """H0 of (q^-2, 0) is spanned by z^2; a generic scalar has none."""
    basis = h0_basis(LineBundle(0.1**-2, 0), ctx)
    assert len(basis) == 1
    assert basis[0].terms(1e-12) == {2: 1.0}
    assert h0_basis(LineBundle(0.5, 0), ctx) == []
    assert h0_basis(LineBundle(0.5, -1), ctx) == []


def test_realize_is_linear(ctx):
    """realize sums the scaled basis series."""
    bundle = LineBundle(0.64, 2)
    series = realize(ThetaVector(bundle, [2.0, 0.0]), ctx)
    expected = theta_basis(bundle, 0, ctx).restrict(series.window).scale(2.0)
    assert (series - expected).max_abs() < 1e-12


@pytest.mark.parametrize("d", [1, 2, 3, 5])
def test_theta_basis_is_independent(ctx, d):
    """The d basis sections are linearly independent."""
    bundle = LineBundle(0.8**d, d)
    stacked = np.array([theta_basis(bundle, n, ctx).restrict(ctx.window).coefficients for n in range(d)])
    assert np.linalg.matrix_rank(stacked, tol=1e-10 * np.max(np.abs(stacked))) == d
