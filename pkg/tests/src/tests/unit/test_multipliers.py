import numpy as np
import pytest

from qdiff_core import (
    DomainError,
    ExtensionClass,
    InvalidSectionError,
    LaurentSeries,
    LineBundle,
    Multiplier,
    ParabolicSection,
    SingularMultiplierError,
    ThetaVector,
    ValidationError,
    coboundary,
    coboundary_series,
    dual_multiplier,
    end_multiplier,
    extension_class,
    extension_multiplier,
    get_context,
    parabolic_aut_dim,
    theta_basis,
)


@pytest.fixture(scope="module")
def ctx():
    return get_context(0.1)


def random_class(k: int, eta: complex = 0.8, seed: int = 0) -> ExtensionClass:
    rng = np.random.default_rng(seed)
    return ExtensionClass(k, eta, rng.normal(size=2 * k) + 1j * rng.normal(size=2 * k))


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("eta", [0.8, 0.6 + 0.3j])
def test_extension_class_round_trip(ctx, k, eta):
    """Reading the class off its multiplier gives back x and eta."""
    x = random_class(k, eta, seed=k)
    recovered = extension_class(extension_multiplier(x, ctx), ctx)
    assert recovered.k == k
    assert recovered.eta == pytest.approx(eta)
    assert np.max(np.abs(recovered.coords - x.coords)) < 1e-9


def test_extension_multiplier_shape(ctx):
    """The corner carries (eta z)^k x and the diagonal (eta z)^-k, (eta z)^k."""
    x = ExtensionClass(1, 0.8, [1.0, 2.0])
    m = extension_multiplier(x, ctx)
    assert m[0, 0].terms() == {-1: pytest.approx(1.25)}
    assert m[1, 1].terms() == {1: pytest.approx(0.8)}
    assert m[1, 0].terms() == {1: pytest.approx(0.8), 2: pytest.approx(1.6)}
    assert m[0, 1].max_abs() == 0.0


@pytest.mark.parametrize("k", [1, 2])
def test_end_multiplier_is_tensor_of_dual_and_extension(ctx, k):
    """The explicit End(V) multiplier equals dual (x) extension."""
    x = random_class(k, seed=10 + k)
    ext = extension_multiplier(x, ctx)
    expected = dual_multiplier(ext, ctx).kron(ext)
    assert end_multiplier(x, ctx).max_deviation(expected) < 1e-9


def test_inverse_times_multiplier_is_identity(ctx):
    """A unit-determinant multiplier times its inverse is the identity."""
    ext = extension_multiplier(random_class(2, seed=3), ctx)
    identity = Multiplier.identity(2, ext.window)
    assert (ext @ ext.inverse(ctx)).max_deviation(identity) < 1e-12
    assert (ext.determinant() - LaurentSeries.monomial(0, ext.window)).max_abs() < 1e-12


def test_singular_multiplier(ctx):
    """A zero determinant cannot be inverted."""
    zero = LaurentSeries.zero(ctx.window)
    with pytest.raises(SingularMultiplierError):
        Multiplier([[zero, zero], [zero, zero]]).inverse(ctx)


def test_multiplier_validation(ctx):
    """Entries must form a square matrix on a single window."""
    one = LaurentSeries.monomial(0, ctx.window)
    with pytest.raises(ValidationError):
        Multiplier([[one, one]])
    with pytest.raises(ValidationError):
        Multiplier([[one, LaurentSeries.monomial(0, (-2, 2))], [one, one]])


def test_multiplier_serialization(ctx):
    """from_dict(to_dict(m)) reproduces m."""
    m = extension_multiplier(random_class(1, seed=4), ctx)
    assert Multiplier.from_dict(m.to_dict()).max_deviation(m) == 0.0


def test_extension_class_requires_lower_triangular(ctx):
    """An upper-triangular entry is not an extension."""
    window = ctx.window
    up = LaurentSeries.monomial(1, window, 0.8)
    down = LaurentSeries.monomial(-1, window, 1.25)
    one = LaurentSeries.monomial(0, window)
    with pytest.raises(DomainError):
        extension_class(Multiplier([[down, one], [one, up]]), ctx)


@pytest.mark.parametrize("k", [1, 2])
def test_parabolic_aut_dim(ctx, k):
    """Flag-preserving automorphisms: 2 at x = 0, 1 for generic x; one less trace-free."""
    zero = ExtensionClass.zero(k, 0.8)
    x = random_class(k, seed=20 + k)
    assert parabolic_aut_dim(zero, ctx) == 2
    assert parabolic_aut_dim(zero, ctx, trace_free=True) == 1
    assert parabolic_aut_dim(x, ctx) == 1
    assert parabolic_aut_dim(x, ctx, trace_free=True) == 0


def test_scalar_section_is_flat(ctx):
    """The identity endomorphism solves the End(V) functional equation."""
    x = random_class(2, seed=5)
    one = LaurentSeries.monomial(0, ctx.window)
    zero = LaurentSeries.zero(ctx.window)
    section = ParabolicSection(one, zero, zero, one, parabolic=True)
    assert section.residual(x, ctx) < 1e-12


def test_parabolic_section_flags(ctx):
    """Flags that the entries contradict are rejected."""
    one = LaurentSeries.monomial(0, ctx.window)
    zero = LaurentSeries.zero(ctx.window)
    with pytest.raises(InvalidSectionError):
        ParabolicSection(one, zero, zero, one, trace_free=True)
    with pytest.raises(InvalidSectionError):
        ParabolicSection(one, one, zero, one, parabolic=True)


def test_coboundary_of_zero_class(ctx):
    """The split extension has zero connecting map."""
    x = ExtensionClass.zero(2, 0.8)
    assert coboundary(x, ThetaVector.basis(x.xi0, 1), ctx).is_zero(1e-15)


def test_coboundary_series_and_vector_agree(ctx):
    """A theta vector and its series give the same class."""
    x = random_class(2, seed=6)
    from_vector = coboundary(x, ThetaVector.basis(x.xi0, 1), ctx)
    from_series = coboundary(x, theta_basis(x.xi0, 1, ctx), ctx)
    assert np.max(np.abs(from_vector.coords - from_series.coords)) < 1e-9


def test_coboundary_is_linear(ctx):
    """The connecting map is linear in the section."""
    x = random_class(2, seed=8)
    b0 = ThetaVector.basis(x.xi0, 0)
    b1 = ThetaVector.basis(x.xi0, 1)
    total = coboundary(x, b0.scale(2.0) + b1, ctx).coords
    parts = 2.0 * coboundary(x, b0, ctx).coords + coboundary(x, b1, ctx).coords
    assert np.max(np.abs(total - parts)) < 1e-9


def test_coboundary_rejects_non_sections(ctx):
    """Wrong bundles and non-solutions are refused."""
    x = random_class(2, seed=9)
    with pytest.raises(DomainError):
        coboundary(x, ThetaVector.basis(LineBundle(0.5, 2), 0), ctx)
    with pytest.raises(InvalidSectionError):
        coboundary(x, LaurentSeries.monomial(0, ctx.window), ctx)


def test_extension_class_validation():
    """Wrong coordinate counts and eta = 0 are rejected."""
    with pytest.raises(ValidationError):
        ExtensionClass(2, 0.8, [1.0, 2.0])
    with pytest.raises(ValidationError):
        ExtensionClass(1, 0.0, [1.0, 2.0])
    with pytest.raises(ValidationError):
        ExtensionClass.from_dict({"k": 1, "x": []})


def test_extension_class_serialization():
    """to_dict and from_dict keep k, eta and the coordinates."""
    x = random_class(2, 0.6 + 0.3j, seed=11)
    back = ExtensionClass.from_dict(x.to_dict())
    assert back.k == 2 and back.eta == x.eta
    assert np.array_equal(back.coords, x.coords)


@pytest.mark.parametrize("k", [1, 2])
def test_extension_class_ignores_coboundaries_in_corner(ctx, k):
    """Changing the corner by (eta z)^k (phi - 1) g leaves the class unchanged."""
    x = random_class(k, seed=30 + k)
    m = extension_multiplier(x, ctx)
    g = LaurentSeries.from_terms({-1: 0.7, 1: -0.2 + 0.4j, 2 * k: 1.3}, m.window)
    change = coboundary_series(x.bundle, g, ctx).shift(k).scale(x.eta**k).restrict(m.window)
    moved = Multiplier([[m[0, 0], m[0, 1]], [m[1, 0] + change, m[1, 1]]])
    assert change.max_abs() > 0.1
    assert np.allclose(extension_class(moved, ctx).coords, x.coords, atol=1e-10)


@pytest.mark.parametrize("k", [1, 2])
def test_parabolic_aut_dim_is_upper_semicontinuous(ctx, k):
    """Small perturbations never raise the automorphism dimension."""
    rng = np.random.default_rng(50 + k)
    for base in (ExtensionClass.zero(k, 0.8), random_class(k, seed=60 + k)):
        dim = parabolic_aut_dim(base, ctx)
        for _ in range(3):
            nudge = 1e-3 * (rng.normal(size=2 * k) + 1j * rng.normal(size=2 * k))
            near = base.with_coords(base.coords + nudge)
            assert 1 <= parabolic_aut_dim(near, ctx) <= dim
