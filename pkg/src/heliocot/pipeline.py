"""Luminance difference series, MODIS-time window alignment, normalization."""
import bisect
import logging
import math
from dataclasses import dataclass, replace
from datetime import datetime, timedelta

import numpy as np

from .clearsky import clear_sky_luminance
from .errors import DegenerateRangeError, HeliocotError, InsufficientDataError, OrderingError, ParseError
from .fileio import fmt_float, parse_float, read_csv_rows, write_csv
from .times import format_utc, parse_utc

log = logging.getLogger(__name__)

PAIRS_HEADER = ("timestamp_utc", "cot_mean", "lum_diff_mean", "n_samples", "cot_norm", "lum_norm")
DIFF_HEADER = ("timestamp_utc", "l_norm", "g_c", "l_clear", "lum_diff")
ANCHORS = ("centered", "trailing", "leading")
NORMALIZATION_MODES = ("signed", "absolute")


@dataclass(frozen=True)
class DiffSample:
    timestamp: datetime
    l_norm: float
    g_c: float
    l_clear: float
    lum_diff: float


@dataclass(frozen=True)
class AlignedPair:
    """One scatter point: MODIS COT mean against windowed luminance difference."""

    timestamp: datetime
    cot_mean: float
    lum_diff_mean: float
    n_samples: int
    cot_norm: float = None
    lum_norm: float = None


def luminance_difference(l_actual, l_clear):
    return l_actual - l_clear


def _by_timestamp(records, what):
    out = {}
    for r in records:
        if r.timestamp in out:
            raise OrderingError(f"duplicate {what} timestamp {format_utc(r.timestamp)}")
        out[r.timestamp] = r
    return out


def clear_fit_pairs(samples, irradiance, labels):
    """``(g_c, l_norm)`` for samples labeled clear; unlabeled frames count as cloudy."""
    irr = _by_timestamp(irradiance, "irradiance")
    pairs = []
    for s in samples:
        if not labels.get(s.timestamp, False):
            continue
        if s.timestamp not in irr:
            raise HeliocotError(f"no irradiance record for {format_utc(s.timestamp)}")
        pairs.append((irr[s.timestamp].g_c, s.l_norm))
    return pairs


def difference_series(samples, irradiance, lmap):
    """Actual minus clear-sky luminance for each sample."""
    irr = _by_timestamp(irradiance, "irradiance")
    out = []
    for s in samples:
        rec = irr.get(s.timestamp)
        if rec is None:
            raise HeliocotError(f"no irradiance record for {format_utc(s.timestamp)}")
        l_clear = clear_sky_luminance(rec.g_c, lmap)
        out.append(DiffSample(s.timestamp, s.l_norm, rec.g_c, l_clear, luminance_difference(s.l_norm, l_clear)))
    return out


def _window(t, window_min, anchor):
    w = timedelta(minutes=window_min)
    if anchor == "centered":
        return t - w / 2, t + w / 2
    if anchor == "trailing":
        return t - w, t
    if anchor == "leading":
        return t, t + w
    raise HeliocotError(f"unknown window anchor {anchor!r}; expected one of {', '.join(ANCHORS)}")


def align(diff_series, cot_list, window_min=15.0, min_samples=3, anchor="centered"):
    """Average luminance differences in a closed window around each COT timestamp.

    ``diff_series`` holds ``(timestamp, lum_diff)`` pairs (non-decreasing in
    time); ``cot_list`` holds ``(timestamp, cot_mean)`` pairs (strictly
    increasing). A pair is emitted only if the window holds at least
    ``min_samples`` samples.
    """
    if window_min <= 0:
        raise HeliocotError("window must be positive")
    times = [t for t, _ in diff_series]
    values = [float(v) for _, v in diff_series]
    if any(b < a for a, b in zip(times, times[1:])):
        raise OrderingError("luminance-difference series is not sorted by timestamp")
    cot_times = [t for t, _ in cot_list]
    if any(b <= a for a, b in zip(cot_times, cot_times[1:])):
        raise OrderingError("COT series is not strictly increasing in time")

    pairs = []
    for t, cot in cot_list:
        lo, hi = _window(t, window_min, anchor)
        i, j = bisect.bisect_left(times, lo), bisect.bisect_right(times, hi)
        n = j - i
        if n < min_samples:
            log.info("%s: %d samples in window, need %d; skipped", format_utc(t), n, min_samples)
            continue
        # fsum keeps the mean independent of the order of tied samples
        pairs.append(AlignedPair(t, float(cot), math.fsum(values[i:j]) / n, n))
    return pairs


def minmax_normalize(xs):
    """Affine rescale onto [0, 1] by the series extremes."""
    x = np.asarray(xs, dtype=np.float64)
    if x.size < 2:
        raise InsufficientDataError(f"need at least 2 values to normalize, got {x.size}")
    lo, hi = float(x.min()), float(x.max())
    if not hi > lo:
        raise DegenerateRangeError("cannot normalize a constant series")
    return np.clip((x - lo) / (hi - lo), 0.0, 1.0)


def normalize_pairs(pairs, mode="signed"):
    """Fill ``cot_norm`` and ``lum_norm`` by min-max over the whole set.

    ``mode='absolute'`` normalizes ``|lum_diff_mean|`` instead of the signed value.
    """
    if mode not in NORMALIZATION_MODES:
        raise HeliocotError(f"unknown normalization {mode!r}; expected signed or absolute")
    cot = minmax_normalize([p.cot_mean for p in pairs])
    diffs = np.array([p.lum_diff_mean for p in pairs])
    lum = minmax_normalize(np.abs(diffs) if mode == "absolute" else diffs)
    return [replace(p, cot_norm=float(c), lum_norm=float(v)) for p, c, v in zip(pairs, cot, lum)]


def write_pairs_csv(path, pairs):
    def opt(v):
        return "" if v is None else fmt_float(v)

    rows = [
        (format_utc(p.timestamp), fmt_float(p.cot_mean), fmt_float(p.lum_diff_mean), str(p.n_samples),
         opt(p.cot_norm), opt(p.lum_norm))
        for p in pairs
    ]
    write_csv(path, PAIRS_HEADER, rows)


def read_pairs_csv(path):
    pairs = []
    for line, row in read_csv_rows(path, PAIRS_HEADER):
        try:
            t = parse_utc(row[0])
            n = int(row[3])
        except (HeliocotError, ValueError) as exc:
            raise ParseError(str(exc), line=line) from None
        norms = [None if v == "" else parse_float(v, line, k) for v, k in zip(row[4:], PAIRS_HEADER[4:])]
        pairs.append(AlignedPair(t, parse_float(row[1], line, "cot_mean"), parse_float(row[2], line, "lum_diff_mean"), n, *norms))
    return pairs


def write_diff_csv(path, diffs):
    rows = [
        (format_utc(d.timestamp), fmt_float(d.l_norm), fmt_float(d.g_c), fmt_float(d.l_clear), fmt_float(d.lum_diff))
        for d in diffs
    ]
    write_csv(path, DIFF_HEADER, rows)
