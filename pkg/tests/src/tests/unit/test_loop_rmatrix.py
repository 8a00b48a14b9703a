import json
from pathlib import Path
from unittest.mock import Mock

import numpy as np
import pytest

from moduli_api import BracketSource
from loop_rmatrix import (
    ComparisonFailureError,
    ILoopBracket,
    KernelKind,
    LoopBracketSource,
    LoopOrbitPoint,
    RKernels,
    RMatrixLoopBracket,
    compare_brackets,
    get_loop_bracket,
    tau_values,
)
from qdiff_core import (
    ClosedFormBracket,
    ExtensionClass,
    LaurentSeries,
    coboundary_series,
    get_context,
    theta_functional,
)

GOLDEN = json.loads((Path(__file__).parents[1] / "golden" / "loop_compare.json").read_text())


@pytest.fixture(scope="module")
def ctx():
    return get_context(0.1)


@pytest.fixture(scope="module")
def bracket(ctx):
    return RMatrixLoopBracket(ctx)


def random_class(k: int, seed: int) -> ExtensionClass:
    rng = np.random.default_rng(seed)
    return ExtensionClass(k, 0.8, rng.normal(size=2 * k) + 1j * rng.normal(size=2 * k))


def test_kernels(ctx):
    """tau is odd and equals phi(z) - phi(1/z); delta has unit coefficients."""
    kernels = RKernels(ctx)
    assert kernels.tau_residual() < 1e-10
    assert kernels.oddness_residual() < 1e-10
    assert np.all(kernels.kernel(KernelKind.DELTA).coefficients == 1.0)
    assert kernels.rphi.coefficient(0) == 0.5
    assert set(kernels.to_dict()) == {"rphi", "tau", "delta"}


def test_tau_values(ctx):
    """tau_0 = 0 and tau_l = (1 + q^l) / (1 - q^l)."""
    values = tau_values(np.array([0, 1, -1]), ctx)
    assert values[0] == 0
    assert values[1] == pytest.approx(1.1 / 0.9)
    assert values[2] == pytest.approx(-1.1 / 0.9)


def test_interface_is_abstract(ctx):
    """The bracket interface cannot be instantiated; the factory returns the r-matrix bracket."""
    with pytest.raises(TypeError):
        ILoopBracket()  # type: ignore[abstract]
    assert isinstance(get_loop_bracket(ctx), ILoopBracket)


def test_lift_places_class_in_corner(ctx):
    """c_(k+j) = eta^k x_j and a_(-k) = eta^-k."""
    x = ExtensionClass(2, 0.8, [1.0, 2.0, 3.0, 4.0])
    pt = LoopOrbitPoint.from_extension(x, ctx)
    assert pt.c(2) == pytest.approx(0.64)
    assert pt.c(5) == pytest.approx(2.56)
    assert pt.c(1) == 0 and pt.c(6) == 0
    assert pt.a(-2) == pytest.approx(1 / 0.64)
    assert pt.a(0) == 0
    assert LoopOrbitPoint.from_dict(pt.to_dict()) == pt


@pytest.mark.parametrize("k", [1, 2])
def test_functionals_recover_coordinates(ctx, k):
    """The rescaled loop functionals read off the class coordinates."""
    x = random_class(k, seed=k)
    assert np.allclose(LoopBracketSource(ctx).functionals(x), x.coords, atol=1e-12)


@pytest.mark.parametrize("k,l", [(1, 1), (1, -2), (2, 3), (2, -1), (2, 0)])
def test_functionals_are_invariant(ctx, bracket, k, l):
    """The LN_- action leaves every invariant functional unchanged."""
    pt = LoopOrbitPoint.from_extension(random_class(k, seed=10 + k), ctx)
    moved = pt.act(l, ctx, strength=0.3 - 0.1j)
    for n in range(-2 * k, 4 * k):
        before = bracket.invariant_functional(pt, n)
        after = bracket.invariant_functional(moved, n)
        assert abs(after - before) < 1e-9 * max(1.0, abs(before))


def test_single_support_coefficient_brackets(ctx, bracket):
    """With c supported at i, {c_m, c_n} vanishes unless m + n = 2i."""
    series = LaurentSeries.monomial(3, ctx.window, 2.0)
    pt = LoopOrbitPoint(1, 0.8, series)
    assert bracket.coeff_bracket_cc(pt, 4, 2) == pytest.approx(2 * tau_values(np.array([1]), ctx)[0] * 4.0)
    assert bracket.coeff_bracket_cc(pt, 4, 3) == 0
    assert bracket.coeff_bracket_cc(pt, 3, 3) == 0


def test_diagonal_brackets(ctx, bracket):
    """{a, c} follows the r-matrix formula and {a, a} vanishes."""
    series = LaurentSeries.from_terms({1: 1.0, 2: 3.0}, ctx.window)
    pt = LoopOrbitPoint(1, 0.8, series)
    a = pt.a_minus_k
    assert bracket.coeff_bracket_ac(pt, -1, 1) == pytest.approx(1.5 * a)
    assert bracket.coeff_bracket_ac(pt, 0, 1) == pytest.approx(-0.5 * a * 3.0)
    assert bracket.coeff_bracket_aa(pt, -1, -1) == 0


@pytest.mark.parametrize("k", [1, 2])
def test_leibniz_path_matches_reduced_bracket(ctx, bracket, k):
    """Expanding into coefficient brackets gives the same reduced bracket."""
    pt = LoopOrbitPoint.from_extension(random_class(k, seed=20 + k), ctx)
    for m, n in [(k, k + 1), (2 * k - 1, k), (k + 1, 3 * k - 1)]:
        direct = bracket.reduced_bracket(pt, m, n)
        expanded = bracket.reduced_bracket_leibniz(pt, m, n)
        assert abs(direct - expanded) < 1e-10 * max(1.0, abs(direct))


@pytest.mark.parametrize("k", [1, 2])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_loop_bracket_is_constant_multiple(ctx, k, seed):
    """The reduced loop bracket is a fixed multiple of the moduli bracket."""
    report = compare_brackets(random_class(k, seed), ctx)
    expected = complex(*GOLDEN["ratio"])
    assert abs(report.ratio - expected) < GOLDEN["rtol"] * abs(expected)
    assert report.entries_compared > 0
    assert not report.skipped


def test_loop_source_protocol(ctx):
    """The loop adapter is a bracket source whose entries match its matrix."""
    source = LoopBracketSource(ctx)
    x = random_class(1, seed=5)
    assert isinstance(source, BracketSource)
    assert source.entry(x, 0, 1) == pytest.approx(source.matrix(x)[0, 1])


def test_zero_class_is_skipped(ctx):
    """Both brackets vanish at x = 0, so no ratio is reported."""
    report = compare_brackets(ExtensionClass.zero(2, 0.8), ctx)
    assert report.skipped
    assert report.to_dict()["ratio"] is None


def test_injected_sources(ctx):
    """Any pair of bracket sources can be compared."""
    x = random_class(2, seed=6)
    reference = ClosedFormBracket(ctx).matrix(x)
    loop = Mock(spec=BracketSource)
    loop.name = "scaled"
    loop.matrix.return_value = -3.0 * reference
    report = compare_brackets(x, ctx, loop=loop)
    assert report.ratio == pytest.approx(-3.0)
    loop.matrix.assert_called_once_with(x)


def test_inconsistent_sources_fail(ctx):
    """Entry ratios that are not one constant raise."""
    x = random_class(2, seed=7)
    reference = ClosedFormBracket(ctx).matrix(x)
    loop = Mock(spec=BracketSource)
    loop.name = "noisy"
    loop.matrix.return_value = reference * np.arange(1, 17).reshape(4, 4)
    with pytest.raises(ComparisonFailureError) as info:
        compare_brackets(x, ctx, loop=loop)
    assert info.value.ratios.shape == (4, 4)


@pytest.mark.parametrize("k", [1, 2])
def test_loop_functionals_match_theta_functionals(ctx, bracket, k):
    """eta^-k theta^loop_(n+k) at c = (eta z)^k f equals theta_n(f) for any representative f."""
    x = random_class(k, seed=70 + k)
    window = ctx.window
    g = LaurentSeries.from_terms({-2: 0.4, 1: -1.1j, 2 * k + 1: 0.6}, window)
    f = x.polynomial(window) + coboundary_series(x.bundle, g, ctx).restrict(window)
    pt = LoopOrbitPoint(k, x.eta, f.shift(k).scale(x.eta**k).restrict(window))
    square = x.bundle.dual()
    for n in range(2 * k):
        loop = x.eta ** (-k) * bracket.invariant_functional(pt, n + k)
        assert abs(loop - theta_functional(square, n, f, ctx)) < 1e-10
        assert abs(loop - x.coords[n]) < 1e-10


def test_tiny_class_is_compared(ctx):
    """A nonzero class far below tol still has a ratio; only x = 0 is skipped."""
    report = compare_brackets(random_class(2, seed=0).scaled(1e-13), ctx)
    expected = complex(*GOLDEN["ratio"])
    assert not report.skipped
    assert abs(report.ratio - expected) < GOLDEN["rtol"] * abs(expected)
