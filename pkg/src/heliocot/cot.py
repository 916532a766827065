"""MODIS cloud optical thickness grids: CSV ingestion and 9-pixel means."""
import logging
import math
from dataclasses import dataclass
from datetime import datetime

import numpy as np

from .errors import EmptyGridError, HeliocotError, OrderingError, ParseError, RangeError
from .fileio import csv_text, fmt_float, read_csv_rows, write_csv
from .times import format_utc, parse_utc

log = logging.getLogger(__name__)

CELLS = tuple(f"c{i}{j}" for i in range(3) for j in range(3))
COT_HEADER = ("timestamp_utc",) + CELLS
COT_MEAN_HEADER = ("timestamp_utc", "cot_mean", "n_valid")
FILL_TOKEN = "NA"
COT_MIN, COT_MAX = 0.0, 100.0


@dataclass(frozen=True, eq=False)
class CotGrid:
    """One observation's 3x3 block; fill cells hold NaN and are flagged in ``fill_mask``."""

    timestamp: datetime
    values: np.ndarray
    fill_mask: np.ndarray

    def __post_init__(self):
        if self.values.shape != (3, 3) or self.fill_mask.shape != (3, 3):
            raise HeliocotError("COT grid must be 3x3")
        valid = self.values[~self.fill_mask]
        if np.any(np.isnan(valid)) or np.any((valid < COT_MIN) | (valid > COT_MAX)):
            raise RangeError("COT grid values must lie in [0, 100]")

    @classmethod
    def from_cells(cls, timestamp, cells):
        """Build from 9 row-major cells, ``None`` marking fill."""
        mask = np.array([c is None for c in cells]).reshape(3, 3)
        values = np.array([np.nan if c is None else float(c) for c in cells]).reshape(3, 3)
        return cls(timestamp, values, mask)

    @property
    def n_valid(self):
        return int((~self.fill_mask).sum())


@dataclass(frozen=True)
class CotMean:
    timestamp: datetime
    cot_mean: float
    n_valid: int


def _parse_cell(text, line, name):
    text = text.strip()
    if text == FILL_TOKEN:
        return None
    try:
        v = float(text)
    except ValueError:
        raise ParseError(f"{name}: not a number: {text!r}", line=line) from None
    if not (COT_MIN <= v <= COT_MAX):
        raise RangeError(f"line {line}: cell {name} value {text} outside [0, 100]")
    return v


def parse_cot_csv(source):
    """Parse a COT CSV (path or text stream) into grids with strictly increasing timestamps."""
    grids = []
    for line, row in read_csv_rows(source, COT_HEADER):
        try:
            t = parse_utc(row[0])
        except HeliocotError as exc:
            raise ParseError(str(exc), line=line) from None
        cells = [_parse_cell(text, line, name) for text, name in zip(row[1:], CELLS)]
        if grids and t <= grids[-1].timestamp:
            raise OrderingError(f"line {line}: timestamp {row[0]} not after {format_utc(grids[-1].timestamp)}")
        grids.append(CotGrid.from_cells(t, cells))
    return grids


def serialize_cot_csv(grids):
    rows = []
    for g in grids:
        cells = [FILL_TOKEN if f else fmt_float(v) for v, f in zip(g.values.ravel(), g.fill_mask.ravel())]
        rows.append([format_utc(g.timestamp)] + cells)
    return csv_text(COT_HEADER, rows)


def mean_cot(grid, min_valid=1):
    """Mean over the non-fill cells of ``grid``."""
    valid = [float(v) for v in grid.values[~grid.fill_mask]]
    if len(valid) < max(1, min_valid):
        raise EmptyGridError(
            f"{format_utc(grid.timestamp)}: {len(valid)} valid cells, need {max(1, min_valid)}"
        )
    # fsum is exactly rounded, so the result does not depend on cell order
    m = math.fsum(valid) / len(valid)
    return min(max(valid), max(min(valid), m))


def grid_means(grids, min_valid=1):
    """Mean COT per grid; grids without enough valid cells are dropped with a warning."""
    out = []
    for g in grids:
        try:
            out.append(CotMean(g.timestamp, mean_cot(g, min_valid), g.n_valid))
        except EmptyGridError as exc:
            log.warning("dropping COT observation: %s", exc)
    return out


def write_cot_means(path, means):
    write_csv(path, COT_MEAN_HEADER, [(format_utc(m.timestamp), fmt_float(m.cot_mean), str(m.n_valid)) for m in means])


def read_cot_means(path):
    out = []
    for line, row in read_csv_rows(path, COT_MEAN_HEADER):
        try:
            out.append(CotMean(parse_utc(row[0]), float(row[1]), int(row[2])))
        except (HeliocotError, ValueError) as exc:
            raise ParseError(str(exc), line=line) from None
    return out
