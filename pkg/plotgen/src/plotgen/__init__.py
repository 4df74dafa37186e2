"""Figure renderer for the harness's aggregate convergence CSVs."""

from .parse import COLUMNS, Series, parse_csv, serialize_csv
from .render import render

__all__ = ["COLUMNS", "Series", "parse_csv", "serialize_csv", "render"]
