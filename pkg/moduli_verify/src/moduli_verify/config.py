"""Run configuration: command-line flags, then QMODULI_* environment, then defaults."""

import logging
import os
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

import numpy as np
from dotenv import load_dotenv

from qdiff_core import NumericContext, SearchSettings, ValidationError, default_window_for
from .codec import parse_complex

# Set up logger
logger = logging.getLogger(__name__)

ENV_PREFIX = "QMODULI_"
FORMATS = ("json", "csv")


@dataclass(frozen=True)
class RunConfig:
    """Parameters of one command run.

    Attributes:
        q: Modular parameter, 0 < |q| < 1.
        eta: Multiplier scalar of xi_0.
        k: Degree of xi_0.
        window: Half-width of the truncation window; at least 4k. None picks it from q and tol.
        tol: Relative tolerance in (0, 1e-3].
        seed: Seed for random classes.
        output: Output path; stdout when None.
        format: "json" or "csv".
        workers: Worker processes for sweeps.
        verbose: Debug logging.
        grid: Log-polar grid size of the leaf search.
    """

    q: complex = 0.1
    eta: complex = 0.8
    k: int = 2
    window: Optional[int] = None
    tol: float = 1e-12
    seed: int = 0
    output: Optional[str] = None
    format: str = "json"
    workers: int = 1
    verbose: bool = False
    grid: int = field(default=64)

    def __post_init__(self) -> None:
        object.__setattr__(self, "q", complex(self.q))
        object.__setattr__(self, "eta", complex(self.eta))
        if not 0.0 < abs(self.q) < 1.0:
            raise ValidationError(f"q must satisfy 0 < |q| < 1, got {self.q}")
        if self.eta == 0:
            raise ValidationError("eta must be nonzero")
        if self.k < 1:
            raise ValidationError(f"k must be at least 1, got {self.k}")
        if not 0.0 < self.tol <= 1e-3:
            raise ValidationError(f"tol must lie in (0, 1e-3], got {self.tol}")
        if self.window is not None and self.window < 4 * self.k:
            raise ValidationError(f"window must be at least 4k = {4 * self.k}, got {self.window}")
        if self.format not in FORMATS:
            raise ValidationError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.workers < 1:
            raise ValidationError(f"workers must be positive, got {self.workers}")

    def context(self) -> NumericContext:
        """Numeric context with a window of at least 4k."""
        window = self.window or max(default_window_for(self.q, self.tol), 4 * self.k)
        return NumericContext(self.q, tol=self.tol, default_window=window)

    def search(self) -> SearchSettings:
        return SearchSettings(grid=self.grid)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def to_dict(self) -> dict[str, Any]:
        return {
            "q": [self.q.real, self.q.imag],
            "eta": [self.eta.real, self.eta.imag],
            "k": self.k,
            "window": self.context().default_window,
            "tol": self.tol,
            "seed": self.seed,
        }


def _pick(flag: Any, environ: Mapping[str, str], name: str, default: Any, parse: Any) -> Any:
    # flags arrive typed from argparse, except q and eta which are strings
    if flag is not None and not isinstance(flag, str):
        return flag
    source = f"--{name}" if flag is not None else f"{ENV_PREFIX}{name.upper()}"
    raw = flag if flag is not None else environ.get(ENV_PREFIX + name.upper())
    if raw is None or raw == "":
        return default
    try:
        return parse(raw)
    except (ValueError, ValidationError) as e:
        raise ValidationError(f"{source}={raw!r} is invalid: {e}") from e


def load_run_config(
    flags: Mapping[str, Any], environ: Optional[Mapping[str, str]] = None
) -> RunConfig:
    """Build a RunConfig from parsed flags, falling back to the environment.

    A ``.env`` file is loaded first when reading the process environment.

    Args:
        flags: Flag values by name; None means "not given"
        environ: Environment mapping; os.environ when omitted

    Returns:
        The validated configuration
    """
    if environ is None:
        load_dotenv()
        environ = os.environ

    def get(name: str, default: Any, parse: Any) -> Any:
        return _pick(flags.get(name), environ, name, default, parse)

    def as_bool(raw: str) -> bool:
        return raw.strip().lower() in ("1", "true", "yes", "on")

    defaults = RunConfig()
    config = RunConfig(
        q=get("q", defaults.q, parse_complex),
        eta=get("eta", defaults.eta, parse_complex),
        k=get("k", defaults.k, int),
        window=get("window", defaults.window, int),
        tol=get("tol", defaults.tol, float),
        seed=get("seed", defaults.seed, int),
        output=get("output", defaults.output, str),
        format=get("format", defaults.format, str),
        workers=get("workers", defaults.workers, int),
        verbose=bool(flags.get("verbose")) or get("verbose", False, as_bool),
        grid=get("grid", defaults.grid, int),
    )
    logger.debug(f"run config: {config}")
    return config
