"""Parsing of command-line values and JSON encoding of reports."""

import json
import logging
from pathlib import Path
from typing import Any, Optional

import numpy as np

from qdiff_core import ExtensionClass, ValidationError

# Set up logger
logger = logging.getLogger(__name__)


def parse_complex(text: str) -> complex:
    """Parse "re,im" or a bare real number.

    Raises:
        ValidationError: If the text is not one or two numbers.
    """
    parts = [p.strip() for p in str(text).split(",")]
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError as e:
        raise ValidationError(f"cannot parse complex number {text!r}: {e}") from e
    raise ValidationError(f"cannot parse complex number {text!r}; expected 're,im'")


def parse_vector(text: str) -> np.ndarray:
    """Parse semicolon-separated complex values, e.g. "1,0;0.5,-0.2"."""
    items = [item for item in str(text).split(";") if item.strip()]
    if not items:
        raise ValidationError("empty vector")
    return np.array([parse_complex(item) for item in items], dtype=complex)


def parse_indices(text: str) -> tuple[int, ...]:
    """Parse comma-separated integers."""
    try:
        return tuple(int(item) for item in str(text).split(",") if item.strip())
    except ValueError as e:
        raise ValidationError(f"cannot parse indices {text!r}: {e}") from e


def encode_complex(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def encode_matrix(matrix: np.ndarray) -> list[list[list[float]]]:
    return [[encode_complex(z) for z in row] for row in np.asarray(matrix)]


def random_class(k: int, eta: complex, rng: np.random.Generator) -> ExtensionClass:
    """A class with independent standard complex normal coordinates."""
    coords = rng.normal(size=2 * k) + 1j * rng.normal(size=2 * k)
    return ExtensionClass(k, eta, coords)


def load_class(path: str) -> ExtensionClass:
    """Read an extension class from a JSON file holding k, eta and x.

    Raises:
        ValidationError: If the file is missing or malformed.
    """
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ValidationError(f"cannot read input {path!r}: {e}") from e
    if isinstance(payload, dict) and "x" in payload and "k" in payload and "eta" in payload:
        return ExtensionClass.from_dict(payload)
    raise ValidationError(f"input {path!r} must be an object with keys k, eta and x")


def dumps(payload: Any) -> str:
    return json.dumps(payload, indent=2, sort_keys=True)


def write_output(text: str, output: Optional[str]) -> None:
    """Write to ``output`` or print to stdout."""
    if output is None:
        print(text)
        return
    Path(output).write_text(text + "\n", encoding="utf-8")
    logger.info(f"wrote {output}")
