"""Sweep tables and deterministic CSV / manifest emission.

A sweep is a grid of (kernel, parameter, horizon) configurations evaluated
in a fixed lexicographic order: kernels as listed, parameters as listed,
horizon radii innermost.  Each configuration becomes one CSV row; a failed
configuration keeps its row with the error category in the status column so
a sweep never dies halfway.  Data rows are formatted with repr() of the
float values, which round-trips exactly and makes re-runs byte-identical.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .kernels import Kernel, KernelError, make_kernel

__all__ = [
    "ALPHA_FLOOR",
    "KernelSpec",
    "SweepResult",
    "check_sweep_grids",
    "run_grid",
    "format_value",
    "write_manifest",
]

# The admissibility floor for the power-law exponent.  The constitutive
# model degrades below roughly 0.4; sweeps stay above 0.5 with margin.
# Analysis entry points (dispersion closed forms) accept any exponent in
# (0, 1) so the breakdown itself remains observable.
ALPHA_FLOOR = 0.5


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family name plus its single shape parameter (None for local)."""

    kind: str
    param: float | None = None

    def build(self) -> Kernel:
        if self.kind == "exponential":
            return make_kernel(self.kind, l0=self.param)
        if self.kind == "power_law":
            return make_kernel(self.kind, alpha=self.param)
        if self.kind == "local":
            return make_kernel(self.kind)
        raise KernelError(f"unknown kernel kind {self.kind!r}")

    @property
    def label(self) -> str:
        if self.param is None:
            return self.kind
        name = "l0" if self.kind == "exponential" else "alpha"
        return f"{name}={format_value(self.param)}"


def check_sweep_grids(kernel_grid, l_f_grid) -> None:
    """Shared sweep preconditions: nonempty grids, admissible parameters."""
    if not len(kernel_grid) or not len(l_f_grid):
        raise ValueError("sweep grids must be nonempty")
    for spec in kernel_grid:
        if spec.kind == "power_law" and spec.param is not None and spec.param < ALPHA_FLOOR:
            raise ValueError(
                f"power-law exponent {spec.param} below the admissibility floor {ALPHA_FLOOR}"
            )
    for l_f in l_f_grid:
        if not l_f > 0.0:
            raise ValueError(f"horizon radius must be positive (got {l_f!r})")


@dataclass(frozen=True)
class SweepResult:
    """Ordered rows of configuration plus metrics, ready for CSV emission."""

    columns: tuple[str, ...]
    rows: list[tuple]
    metadata: dict[str, str]

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self.columns)
            for row in self.rows:
                writer.writerow([format_value(v) for v in row])

    def column(self, name: str) -> list:
        idx = self.columns.index(name)
        return [row[idx] for row in self.rows]


def format_value(value) -> str:
    """Stable text form: repr for floats (round-trips), plain str otherwise."""
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


def run_grid(evaluate, configurations, threads: int = 1) -> list[tuple]:
    """Evaluate each configuration, preserving order; errors become rows.

    evaluate(config) returns the metric tuple for one configuration or
    raises; a raised error is folded into the row as an error status by the
    caller-supplied function, so this stays a thin deterministic scheduler.
    """
    if threads < 1:
        raise ValueError(f"thread count must be at least 1 (got {threads!r})")
    if threads == 1 or len(configurations) <= 1:
        return [evaluate(c) for c in configurations]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(evaluate, configurations))


def write_manifest(path, entries: dict[str, str]) -> None:
    """Flat key-value JSON document describing one run."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({k: str(v) for k, v in entries.items()}, fh, indent=2, sort_keys=True)
        fh.write("\n")
