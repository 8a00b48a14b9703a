"""Leaf classification of many sampled classes, written as CSV."""

import csv
import logging
from multiprocessing import Pool
from typing import IO, Optional, Sequence

import numpy as np

from qdiff_core import ExtensionClass, NumericContext, SearchSettings, StratumReport, instability_index
from .codec import random_class
from .config import RunConfig

# Set up logger
logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


def _classify(job: tuple[ExtensionClass, NumericContext, SearchSettings]) -> StratumReport:
    x, ctx, search = job
    return instability_index(x, ctx, search)


def csv_fieldnames(k: int) -> list[str]:
    names = []
    for j in range(2 * k):
        names += [f"x{j}_re", f"x{j}_im"]
    return names + ["index_j", "leaf_dim", "pi_rank", "witness_re", "witness_im"]


def report_row(report: StratumReport) -> dict[str, float | int | str]:
    row: dict[str, float | int | str] = {}
    for j, z in enumerate(report.x.coords):
        row[f"x{j}_re"] = float(z.real)
        row[f"x{j}_im"] = float(z.imag)
    row["index_j"] = report.index_j
    row["leaf_dim"] = report.leaf_dim
    row["pi_rank"] = report.pi_rank
    witness = report.witness.c_param if report.witness else None
    row["witness_re"] = "" if witness is None else float(witness.real)
    row["witness_im"] = "" if witness is None else float(witness.imag)
    return row


class StratumSweeper:
    """Sweeper that samples classes, classifies them and writes a CSV table."""

    def __init__(self, config: RunConfig, search: Optional[SearchSettings] = None) -> None:
        self.config = config
        self.ctx = config.context()
        self.search = search or config.search()

    def sample(self, count: int) -> list[ExtensionClass]:
        """Draw ``count`` classes from the seeded generator."""
        rng = self.config.rng()
        return [random_class(self.config.k, self.config.eta, rng) for _ in range(count)]

    def classify(self, classes: Sequence[ExtensionClass]) -> list[StratumReport]:
        """Run the instability scan on every class, in input order."""
        jobs = [(x, self.ctx, self.search) for x in classes]
        if self.config.workers > 1 and len(jobs) > 1:
            with Pool(self.config.workers) as pool:
                reports = pool.map(_classify, jobs)
        else:
            reports = []
            for i, job in enumerate(jobs):
                reports.append(_classify(job))
                if (i + 1) % 20 == 0:
                    logger.info(f"classified {i + 1}/{len(jobs)}")
        return reports

    def header(self) -> str:
        c = self.config
        return (
            f"# qmoduli-sweep v{SCHEMA_VERSION} k={c.k} q={c.q.real},{c.q.imag} "
            f"eta={c.eta.real},{c.eta.imag} seed={c.seed} grid={self.search.grid}"
        )

    def write_csv(self, reports: Sequence[StratumReport], stream: IO[str]) -> None:
        """Write the versioned header comment and one row per report."""
        stream.write(self.header() + "\n")
        writer = csv.DictWriter(stream, fieldnames=csv_fieldnames(self.config.k))
        writer.writeheader()
        writer.writerows(report_row(r) for r in reports)

    def run(self, samples: int, output_csv: str) -> list[StratumReport]:
        """Sample, classify and save results to a CSV file."""
        reports = self.classify(self.sample(samples))
        with open(output_csv, mode="w", newline="", encoding="utf-8") as f:
            self.write_csv(reports, f)
        logger.info(f"wrote {len(reports)} rows to {output_csv}")
        return reports


def index_histogram(reports: Sequence[StratumReport]) -> dict[int, int]:
    """Count reports per instability index."""
    values, counts = np.unique([r.index_j for r in reports], return_counts=True)
    return {int(v): int(c) for v, c in zip(values, counts)}
