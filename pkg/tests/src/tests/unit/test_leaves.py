import numpy as np
import pytest

from qdiff_core import (
    DomainError,
    ExtensionClass,
    PairingTable,
    SearchSettings,
    SubBundleProbe,
    ValidationError,
    detect_at_degree,
    get_context,
    instability_index,
    leaf_dimension,
    normalize_to_annulus,
    pairing_matrix,
    pairing_tensor,
    plant_unstable_class,
    same_modulo_q,
    split_probe_matches,
)


@pytest.fixture(scope="module")
def ctx():
    return get_context(0.1)


@pytest.fixture(scope="module")
def search():
    return SearchSettings(grid=32)


def test_normalize_to_annulus():
    """Scalars are moved into |q| < |c| <= 1 by powers of q."""
    assert normalize_to_annulus(0.005, 0.1) == pytest.approx(0.5)
    assert normalize_to_annulus(3.0, 0.1) == pytest.approx(0.3)
    assert normalize_to_annulus(1.0, 0.1) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        normalize_to_annulus(0.0, 0.1)


def test_same_modulo_q():
    """Scalars differing by a power of q name the same point."""
    assert same_modulo_q(0.5, 0.005, 0.1)
    assert same_modulo_q(0.5j, 50j, 0.1)
    assert not same_modulo_q(0.5, 0.6, 0.1)


@pytest.mark.parametrize("k,j,expected", [(2, 2, 0), (2, 1, 0), (2, 0, 2), (3, 0, 4), (3, 1, 2)])
def test_leaf_dimension(k, j, expected):
    """Leaves below the split stratum have dimension 2(k - j - 1)."""
    assert leaf_dimension(k, j) == expected


def test_search_settings_validation():
    """Degenerate search settings are rejected."""
    with pytest.raises(ValidationError):
        SearchSettings(grid=2)
    with pytest.raises(ValidationError):
        SearchSettings(threshold=2.0)


def test_split_class_has_index_k(ctx, search):
    """x = 0 is the split extension."""
    report = instability_index(ExtensionClass.zero(2, 0.8), ctx, search)
    assert report.index_j == 2
    assert report.leaf_dim == 0
    assert report.stratum == "split"
    assert report.pi_rank == 0


def test_planted_class_is_maximally_unstable(ctx, search):
    """A class killed by a degree-1 map is detected at index 1 with that line bundle."""
    planted = plant_unstable_class(2, 0.8, 1, 0.5, ctx)
    report = instability_index(planted.x, ctx, search)
    assert report.index_j == 1
    assert report.leaf_dim == 0
    assert report.stratum == "unstable"
    assert same_modulo_q(report.witness.c_param, 0.5, ctx.q, tol=1e-5)


def test_planted_kernel_kills_class(ctx):
    """The planted map annihilates the class through the pairing matrix."""
    planted = plant_unstable_class(2, 0.8, 1, 0.4 + 0.2j, ctx, rng=np.random.default_rng(1))
    M = pairing_matrix(planted.x, planted.probe, ctx)
    assert np.max(np.abs(planted.kernel @ M)) < 1e-9 * max(1.0, np.max(np.abs(M)))


@pytest.mark.parametrize("k", [1, 2])
def test_generic_class_is_semistable(ctx, search, k):
    """A random class only admits degree-0 line bundles."""
    rng = np.random.default_rng(40 + k)
    x = ExtensionClass(k, 0.8, rng.normal(size=2 * k) + 1j * rng.normal(size=2 * k))
    report = instability_index(x, ctx, search)
    assert report.index_j == 0
    assert report.leaf_dim == 2 * (k - 1)
    assert report.stratum == "semistable"
    assert report.witness is not None and report.witness.residual < search.threshold * 1e3


def test_pairing_table_matches_scalar_path(ctx):
    """The vectorized table, the pairing tensor and the direct pairing agree."""
    rng = np.random.default_rng(2)
    x = ExtensionClass(2, 0.8, rng.normal(size=4) + 1j * rng.normal(size=4))
    c = 0.35 * np.exp(0.7j)
    probe = SubBundleProbe(1, c)
    table = PairingTable.build(2, 0.8, 1, ctx)
    from_table = table.tensor(np.array([c]))[0]
    P = pairing_tensor(2, 0.8, probe, ctx)
    scale = np.max(np.abs(P))
    assert table.shape == P.shape
    assert np.max(np.abs(from_table - P)) < 1e-9 * scale
    M = pairing_matrix(x, probe, ctx)
    assert np.max(np.abs(np.tensordot(P, x.coords, axes=([2], [0])) - M)) < 1e-9 * scale


def test_degree_range(ctx):
    """Probe degrees outside 0..k are rejected."""
    x = ExtensionClass(2, 0.8, [1.0, 0.0, 0.0, 0.0])
    with pytest.raises(DomainError):
        detect_at_degree(x, 3, ctx)
    with pytest.raises(DomainError):
        pairing_matrix(x, SubBundleProbe(2, 0.5), ctx)


def test_split_probe(ctx):
    """Degree-k probes match only xi_0 itself, and only when x = 0."""
    zero = ExtensionClass.zero(2, 0.8)
    assert split_probe_matches(zero, SubBundleProbe(2, 0.64), ctx)
    assert split_probe_matches(zero, SubBundleProbe(2, 0.0064), ctx)
    assert not split_probe_matches(zero, SubBundleProbe(2, 0.5), ctx)
    assert not split_probe_matches(zero.with_coords([1.0, 0, 0, 0]), SubBundleProbe(2, 0.64), ctx)
    with pytest.raises(DomainError):
        split_probe_matches(zero, SubBundleProbe(1, 0.64), ctx)


def test_report_serialization(ctx, search):
    """Reports serialize with their stratum label and witness."""
    payload = instability_index(ExtensionClass.zero(1, 0.8), ctx, search).to_dict()
    assert payload["stratum"] == "split"
    assert payload["index_j"] == 1
    assert payload["witness"]["residual"] == 0.0


@pytest.mark.parametrize("scale", [1.0, 1e-6, 1e-13, 1e6, -2.5j])
def test_index_is_invariant_under_scaling(ctx, search, scale):
    """Nonzero multiples of a class lie in the same stratum, however small."""
    rng = np.random.default_rng(42)
    x = ExtensionClass(2, 0.8, rng.normal(size=4) + 1j * rng.normal(size=4))
    report = instability_index(x.scaled(scale), ctx, search)
    assert report.index_j == 0
    assert report.stratum == "semistable"


def test_tiny_planted_class_keeps_its_index(ctx, search):
    """A planted unstable class scaled far below tol is still unstable, not split."""
    planted = plant_unstable_class(2, 0.8, 1, 0.5, ctx)
    report = instability_index(planted.x.scaled(1e-13), ctx, search)
    assert report.index_j == 1
    assert same_modulo_q(report.witness.c_param, 0.5, ctx.q, tol=1e-5)
    assert not split_probe_matches(planted.x.scaled(1e-13), SubBundleProbe(2, 0.64), ctx)
