"""Lossless parsing of aggregate convergence CSVs.

Input files follow the harness convention
``agg__<label>__<optimizer>.csv`` with the fixed column set in
:data:`COLUMNS`.  Float cells are written with ``repr`` by the producer, so
parsing and re-serializing reproduces the file numerically exactly.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

COLUMNS = ["round", "loss_mean", "loss_se", "esterr_mean", "esterr_se",
           "comm", "gw", "gb"]

_NAME_RE = re.compile(r"^agg__(?P<label>.+)__(?P<optimizer>[^_].*?)\.csv$")
_SIGMA_RE = re.compile(r"_sigma(?P<sigma>[0-9.eE+-]+)$")


class SchemaError(ValueError):
    """CSV does not match the aggregate schema; message names the columns."""


@dataclass
class Series:
    """One optimizer's aggregated curve: per-round means, SEs, and counters."""

    label: str
    optimizer: str
    data: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def sigma(self) -> float | None:
        """Heterogeneity level parsed from a ``..._sigma<val>`` label, if any."""
        match = _SIGMA_RE.search(self.label)
        return float(match.group("sigma")) if match else None

    def column(self, name: str) -> np.ndarray:
        return self.data[name]


def _identity(path: Path) -> tuple[str, str]:
    match = _NAME_RE.match(path.name)
    if match:
        return match.group("label"), match.group("optimizer")
    return path.stem, path.stem


def parse_csv(path) -> Series:
    """Parse one aggregate CSV; raises :class:`SchemaError` on a column mismatch."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected columns {COLUMNS}")
        if header != COLUMNS:
            missing = [c for c in COLUMNS if c not in header]
            extra = [c for c in header if c not in COLUMNS]
            raise SchemaError(
                f"{path}: columns {header} do not match the aggregate schema "
                f"{COLUMNS} (missing {missing}, unexpected {extra})"
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(COLUMNS):
                raise SchemaError(f"{path}: line {lineno} has {len(row)} fields, "
                                  f"expected {len(COLUMNS)}")
            try:
                rows.append([float(cell) for cell in row])
            except ValueError as exc:
                raise SchemaError(f"{path}: line {lineno}: {exc}")
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    table = np.array(rows, dtype=np.float64)
    label, optimizer = _identity(path)
    data = {name: table[:, i] for i, name in enumerate(COLUMNS)}
    data["round"] = data["round"].astype(np.int64)
    return Series(label=label, optimizer=optimizer, data=data)


def serialize_csv(series: Series, path) -> None:
    """Write a series back out in the producer's format (repr floats)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(COLUMNS)
        for i in range(series.data["round"].shape[0]):
            writer.writerow(
                [int(series.data["round"][i])]
                + [repr(float(series.data[name][i])) for name in COLUMNS[1:]]
            )
