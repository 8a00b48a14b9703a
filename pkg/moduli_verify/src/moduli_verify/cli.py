#!/usr/bin/env python3
"""
Command-line interface for the qmoduli verification tools.

Every subcommand prints a JSON report (the sweep can also write CSV) and
exits with 0 on success, 2 on rejected input and 3 on numerical failure.
"""

import argparse
import io
import logging
import sys
from dataclasses import replace
from typing import Any, Optional, Sequence

import numpy as np

from loop_rmatrix import compare_brackets
from qdiff_core import (
    ComparisonFailureError,
    ExtensionClass,
    LineBundle,
    NumericalError,
    QModuliError,
    ThetaVector,
    ValidationError,
    bracket_matrix,
    bracket_tensor,
    coboundary,
    end_multiplier,
    extension_class,
    extension_multiplier,
    functional_residual,
    instability_index,
    jacobi_scale,
    jacobiator,
    pairing_table,
    parabolic_aut_dim,
    theta_basis,
)
from .codec import (
    dumps,
    encode_complex,
    encode_matrix,
    load_class,
    parse_indices,
    parse_vector,
    random_class,
    write_output,
)
from .config import RunConfig, load_run_config
from .sweep import StratumSweeper, index_histogram

# Set up logger
logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def resolve_class(config: RunConfig, x_text: Optional[str], input_path: Optional[str]) -> tuple[RunConfig, ExtensionClass]:
    """
    Pick the class to work on: --x, then --input, then a seeded random draw.

    A class read from a file brings its own k and eta, which replace the configured ones.
    """
    if x_text is not None:
        return config, ExtensionClass(config.k, config.eta, parse_vector(x_text))
    if input_path is not None:
        x = load_class(input_path)
        return replace(config, k=x.k, eta=x.eta), x
    return config, random_class(config.k, config.eta, config.rng())


def cmd_theta(config: RunConfig, n: int) -> dict[str, Any]:
    """
    Basis section theta_n of xi_0 with its functional-equation residual.
    """
    ctx = config.context()
    if not 0 <= n < config.k:
        raise ValidationError(f"--n must satisfy 0 <= n < k = {config.k}, got {n}")
    bundle = LineBundle(config.eta**config.k, config.k)
    series = theta_basis(bundle, n, ctx)
    return {
        "config": config.to_dict(),
        "bundle": bundle.to_dict(),
        "n": n,
        "series": series.to_dict(threshold=ctx.eps),
        "residual": functional_residual(bundle, series, ctx),
    }


def cmd_pair(config: RunConfig) -> dict[str, Any]:
    """
    Serre pairing and theta-functional tables for xi_0 with their deviation from identity.
    """
    ctx = config.context()
    pairing, functional = pairing_table(config.k, config.eta, ctx)
    eye = np.eye(config.k)
    return {
        "config": config.to_dict(),
        "pairing": encode_matrix(pairing),
        "functional": encode_matrix(functional),
        "pairing_deviation": float(np.max(np.abs(pairing - eye))),
        "functional_deviation": float(np.max(np.abs(functional - eye))),
    }


def cmd_qdiff(config: RunConfig, x: ExtensionClass) -> dict[str, Any]:
    """
    Multipliers of the extension and of End(V), the class read back, automorphism
    dimensions and the coboundary of every theta basis section.
    """
    ctx = config.context()
    ext = extension_multiplier(x, ctx)
    recovered = extension_class(ext, ctx)
    cobound = [
        [encode_complex(z) for z in coboundary(x, ThetaVector.basis(x.xi0, n), ctx).coords]
        for n in range(x.k)
    ]
    return {
        "config": config.to_dict(),
        "x": x.to_dict(),
        "extension_multiplier": ext.to_dict(threshold=ctx.eps),
        "end_multiplier": end_multiplier(x, ctx).to_dict(threshold=ctx.eps),
        "class_residual": float(np.max(np.abs(recovered.coords - x.coords))),
        "aut_dim": parabolic_aut_dim(x, ctx),
        "aut_dim_trace_free": parabolic_aut_dim(x, ctx, trace_free=True),
        "coboundary": cobound,
    }


def cmd_bracket(config: RunConfig, x: ExtensionClass) -> dict[str, Any]:
    """
    The bracket matrix with its skew residual and truncation bound.
    """
    report = bracket_matrix(x, config.context()).to_dict()
    report["config"] = config.to_dict()
    return report


def cmd_jacobi(config: RunConfig, x: ExtensionClass, indices: Sequence[int]) -> dict[str, Any]:
    """
    Jacobiator at a triple of covectors; the three coordinates of x are zeroed first.
    """
    ctx = config.context()
    if len(indices) != 3:
        raise ValidationError(f"--indices needs three values, got {len(indices)}")
    m, n, s = indices
    admissible = x.with_zeroed(indices)
    tensor = bracket_tensor(x.k, x.eta, ctx)
    value = jacobiator(admissible, m, n, s, ctx, tensor=tensor)
    scale = jacobi_scale(admissible, tensor)
    return {
        "config": config.to_dict(),
        "x": admissible.to_dict(),
        "indices": [m, n, s],
        "value": encode_complex(value),
        "scale": scale,
        "relative": abs(value) / scale if scale > 0 else 0.0,
    }


def cmd_leaf(config: RunConfig, x: ExtensionClass) -> dict[str, Any]:
    """
    Instability index, leaf dimension and bracket rank of one class.
    """
    report = instability_index(x, config.context(), config.search()).to_dict()
    report["config"] = config.to_dict()
    return report


def cmd_sweep(config: RunConfig, samples: int) -> str:
    """
    Classify seeded random classes; CSV with a versioned header, or a JSON summary.
    """
    if samples < 1:
        raise ValidationError(f"--samples must be positive, got {samples}")
    sweeper = StratumSweeper(config)
    reports = sweeper.classify(sweeper.sample(samples))
    if config.format == "csv":
        buffer = io.StringIO()
        sweeper.write_csv(reports, buffer)
        return buffer.getvalue().rstrip("\n")
    return dumps(
        {
            "config": config.to_dict(),
            "histogram": {str(j): c for j, c in index_histogram(reports).items()},
            "reports": [r.to_dict() for r in reports],
        }
    )


def cmd_loop_compare(config: RunConfig, classes: Sequence[ExtensionClass]) -> dict[str, Any]:
    """
    Loop-versus-moduli bracket ratio over one or more classes, required to be one constant.
    """
    ctx = config.context()
    reports = [compare_brackets(x, ctx) for x in classes]
    done = [r for r in reports if not r.skipped]
    if not done:
        logger.warning("every class was zero; nothing to compare")
        return {
            "config": config.to_dict(),
            "ratio": None,
            "max_residual": 0.0,
            "entries_compared": 0,
            "samples": len(classes),
            "skipped": len(classes),
            "notice": "x = 0: both brackets vanish, comparison skipped",
        }
    ratios = np.array([r.ratio for r in done], dtype=complex)
    ratio = complex(np.mean(ratios))
    spread = float(np.max(np.abs(ratios - ratio)) / abs(ratio))
    if spread > ctx.tol * 1e4:
        raise ComparisonFailureError(
            f"ratio differs across samples by {spread:.2e}: {ratios}", ratios=ratios
        )
    return {
        "config": config.to_dict(),
        "ratio": encode_complex(ratio),
        "max_residual": max(spread, max(r.max_residual for r in done)),
        "entries_compared": sum(r.entries_compared for r in done),
        "samples": len(classes),
        "skipped": len(classes) - len(done),
    }


def build_parser() -> argparse.ArgumentParser:
    """
    Parser with one subcommand per verification tool; shared flags live on every subcommand.
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--q", help="modular parameter as 're,im'")
    common.add_argument("--eta", help="multiplier scalar of xi_0 as 're,im'")
    common.add_argument("--k", type=int, help="degree of xi_0")
    common.add_argument("--window", type=int, help="truncation half-width, at least 4k")
    common.add_argument("--tol", type=float, help="relative tolerance")
    common.add_argument("--seed", type=int, help="seed for random classes")
    common.add_argument("--output", help="output file; stdout by default")
    common.add_argument("--format", choices=["json", "csv"], help="output format")
    common.add_argument("--workers", type=int, help="worker processes for sweeps")
    common.add_argument("--grid", type=int, help="log-polar grid size of the leaf search")
    common.add_argument("--verbose", action="store_true", default=None, help="debug logging")

    with_x = argparse.ArgumentParser(add_help=False)
    with_x.add_argument("--x", help="class coordinates as 're,im;re,im;...'")
    with_x.add_argument("--input", help="JSON file with k, eta and x")

    parser = argparse.ArgumentParser(prog="qmoduli", description="q-difference moduli verification CLI")
    subparsers = parser.add_subparsers(dest="command")

    theta_parser = subparsers.add_parser("theta", parents=[common], help="theta basis series")
    theta_parser.add_argument("--n", type=int, default=0, help="basis index, 0 <= n < k")

    subparsers.add_parser("pair", parents=[common], help="Serre pairing duality tables")
    subparsers.add_parser("qdiff", parents=[common, with_x], help="extension and End(V) multipliers")
    subparsers.add_parser("bracket", parents=[common, with_x], help="Poisson bracket matrix")

    jacobi_parser = subparsers.add_parser("jacobi", parents=[common, with_x], help="Jacobiator")
    jacobi_parser.add_argument("--indices", default=None, help="three covector indices 'm,n,s'")

    subparsers.add_parser("leaf", parents=[common, with_x], help="instability index of one class")

    sweep_parser = subparsers.add_parser("sweep", parents=[common], help="classify random classes")
    sweep_parser.add_argument("--samples", type=int, default=200, help="number of classes")

    compare_parser = subparsers.add_parser(
        "loop-compare", parents=[common, with_x], help="loop versus moduli bracket ratio"
    )
    compare_parser.add_argument("--samples", type=int, default=1, help="number of random classes")
    return parser


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING, format=LOG_FORMAT)


def run_command(args: argparse.Namespace, config: RunConfig) -> str:
    """
    Dispatch a parsed command and return its serialized report.
    """
    if config.format == "csv" and args.command != "sweep":
        raise ValidationError("csv output is only available for the sweep command")

    if args.command == "theta":
        return dumps(cmd_theta(config, args.n))
    elif args.command == "pair":
        return dumps(cmd_pair(config))
    elif args.command == "sweep":
        return cmd_sweep(config, args.samples)

    config, x = resolve_class(config, args.x, args.input)
    if args.command == "qdiff":
        return dumps(cmd_qdiff(config, x))
    elif args.command == "bracket":
        return dumps(cmd_bracket(config, x))
    elif args.command == "jacobi":
        indices = parse_indices(args.indices) if args.indices else tuple(
            i % (2 * config.k) for i in range(3)
        )
        return dumps(cmd_jacobi(config, x, indices))
    elif args.command == "leaf":
        return dumps(cmd_leaf(config, x))
    elif args.command == "loop-compare":
        if args.x is None and args.input is None and args.samples > 1:
            rng = config.rng()
            classes = [random_class(config.k, config.eta, rng) for _ in range(args.samples)]
        else:
            classes = [x]
        return dumps(cmd_loop_compare(config, classes))
    raise ValidationError(f"unknown command {args.command!r}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse command-line arguments, run the command and map failures to exit codes.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2

    flags = {
        name: getattr(args, name, None)
        for name in ("q", "eta", "k", "window", "tol", "seed", "output", "format", "workers", "grid", "verbose")
    }
    try:
        config = load_run_config(flags)
        _configure_logging(config.verbose)
        logger.info(f"running {args.command}")
        text = run_command(args, config)
        write_output(text, config.output)
        logger.info(f"{args.command} finished")
        return 0
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return ValidationError.exit_code
    except NumericalError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"numerical failure: {e}", file=sys.stderr)
        return NumericalError.exit_code
    except QModuliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
