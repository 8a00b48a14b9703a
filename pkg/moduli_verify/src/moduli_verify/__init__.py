"""Command-line verification tools for the q-difference moduli space."""

from .codec import load_class, parse_complex, parse_vector, random_class
from .config import RunConfig, load_run_config
from .sweep import StratumSweeper, index_histogram

__all__ = [
    "RunConfig",
    "StratumSweeper",
    "index_histogram",
    "load_class",
    "load_run_config",
    "parse_complex",
    "parse_vector",
    "random_class",
]
