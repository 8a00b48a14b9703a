"""Truncated q-difference modules on E_q: series, theta cohomology, rank-two
extensions, the parabolic Poisson bracket and the leaf stratification."""

from moduli_api import BracketSource, Series

from .context import NumericContext, default_window_for
from .errors import (
    ComparisonFailureError,
    ConditioningError,
    DomainError,
    InternalConsistencyError,
    InvalidCovectorError,
    InvalidSectionError,
    NonConvergenceError,
    NumericalError,
    QModuliError,
    SingularMultiplierError,
    ValidationError,
    WindowUnderflowError,
)
from .laurent import (
    LaurentSeries,
    constant_term,
    leading_exponent,
    q_shift,
    series_inverse,
    series_mul,
)
from .leaves import (
    PairingTable,
    PlantedClass,
    SearchSettings,
    StratumReport,
    SubBundleProbe,
    Witness,
    detect_at_degree,
    instability_index,
    leaf_dimension,
    normalize_to_annulus,
    pairing_matrix,
    pairing_tensor,
    plant_unstable_class,
    same_modulo_q,
    split_probe_matches,
)
from .multipliers import (
    ExtensionClass,
    Multiplier,
    ParabolicSection,
    coboundary,
    dual_multiplier,
    end_multiplier,
    extension_class,
    extension_multiplier,
    parabolic_aut_dim,
)
from .poisson import (
    BracketMatrix,
    BracketTensor,
    ClosedFormBracket,
    SeriesPathBracket,
    bivector_apply_series,
    bracket_entry_closed,
    bracket_entry_succinct,
    bracket_gradient,
    bracket_matrix,
    bracket_tensor,
    jacobi_scale,
    jacobiator,
    series_path_matrix,
    truncation_bound,
)
from .theta import (
    H1Class,
    LineBundle,
    ThetaVector,
    coboundary_series,
    dual_theta,
    duality_tables,
    functional_residual,
    h0_basis,
    h1_reduce,
    index_factor,
    pairing_table,
    power_product,
    realize,
    serre_pair,
    serre_pair_series,
    theta_basis,
    theta_functional,
    theta_series,
)


# Factory function implementation
def get_context(q: complex, tol: float = 1e-12, window: int | None = None) -> NumericContext:
    """Return a numeric context.

    Args:
        q: Modular parameter, 0 < |q| < 1
        tol: Relative tolerance for residual and rank decisions
        window: Half-width of the default window; chosen from q and tol if omitted

    Returns:
        A validated NumericContext
    """
    return NumericContext(q, tol=tol, default_window=window)


def get_bracket_source(ctx: NumericContext, path: str = "closed") -> BracketSource:
    """Return a moduli bracket implementation of the BracketSource interface.

    Args:
        ctx: Numeric context
        path: "closed" for the double sum, "series" for the series construction

    Returns:
        A bracket source
    """
    if path == "closed":
        return ClosedFormBracket(ctx)
    if path == "series":
        return SeriesPathBracket(ctx)
    raise ValidationError(f"unknown bracket path {path!r}; expected 'closed' or 'series'")


__all__ = [
    "BracketMatrix",
    "BracketSource",
    "BracketTensor",
    "ClosedFormBracket",
    "ComparisonFailureError",
    "ConditioningError",
    "DomainError",
    "ExtensionClass",
    "H1Class",
    "InternalConsistencyError",
    "InvalidCovectorError",
    "InvalidSectionError",
    "LaurentSeries",
    "LineBundle",
    "Multiplier",
    "NonConvergenceError",
    "NumericContext",
    "NumericalError",
    "PairingTable",
    "ParabolicSection",
    "PlantedClass",
    "QModuliError",
    "SearchSettings",
    "Series",
    "SeriesPathBracket",
    "SingularMultiplierError",
    "StratumReport",
    "SubBundleProbe",
    "ThetaVector",
    "ValidationError",
    "WindowUnderflowError",
    "Witness",
    "bivector_apply_series",
    "bracket_entry_closed",
    "bracket_entry_succinct",
    "bracket_gradient",
    "bracket_matrix",
    "bracket_tensor",
    "coboundary",
    "coboundary_series",
    "constant_term",
    "default_window_for",
    "detect_at_degree",
    "dual_multiplier",
    "dual_theta",
    "duality_tables",
    "end_multiplier",
    "extension_class",
    "extension_multiplier",
    "functional_residual",
    "get_bracket_source",
    "get_context",
    "h0_basis",
    "h1_reduce",
    "index_factor",
    "instability_index",
    "jacobi_scale",
    "jacobiator",
    "leading_exponent",
    "leaf_dimension",
    "normalize_to_annulus",
    "pairing_matrix",
    "pairing_table",
    "pairing_tensor",
    "parabolic_aut_dim",
    "plant_unstable_class",
    "power_product",
    "q_shift",
    "realize",
    "same_modulo_q",
    "serre_pair",
    "serre_pair_series",
    "series_inverse",
    "series_mul",
    "series_path_matrix",
    "split_probe_matches",
    "theta_basis",
    "theta_functional",
    "theta_series",
    "truncation_bound",
]
