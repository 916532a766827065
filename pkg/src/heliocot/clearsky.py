"""Clear-sky irradiance model and the irradiance -> luminance linear map."""
import math
from dataclasses import dataclass
from datetime import datetime

import numpy as np

from .errors import HeliocotError, InsufficientDataError, ParseError, SingularFitError
from .fileio import fmt_float, parse_float, read_csv_rows, write_csv
from .geometry import solar_position
from .stats import centered, ols
from .times import day_of_year, format_utc, parse_utc

MAP_HEADER = ("m", "q", "r2", "n")
IRRADIANCE_HEADER = ("timestamp_utc", "zenith_deg", "azimuth_deg", "g_c")
LABELS_HEADER = ("timestamp_utc", "is_clear")


@dataclass(frozen=True)
class ClearSkyParams:
    """Coefficients of ``g = e0 * ecc * a * cos(z)**b * exp(c * z_deg)``.

    Defaults follow the single-term equatorial model tuned for Singapore.
    """

    a: float = 0.8277
    b: float = 1.3644
    c: float = -0.0013
    e0_wm2: float = 1361.1

    def __post_init__(self):
        if not self.a > 0:
            raise HeliocotError(f"clear-sky a must be > 0, got {self.a}")
        if not self.b > 0:
            raise HeliocotError(f"clear-sky b must be > 0, got {self.b}")
        if not self.c <= 0:
            raise HeliocotError(f"clear-sky c must be <= 0, got {self.c}")
        if not self.e0_wm2 > 0:
            raise HeliocotError(f"clear-sky e0_wm2 must be > 0, got {self.e0_wm2}")


@dataclass(frozen=True)
class LinearMap:
    m: float
    q: float
    fit_r2: float
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise HeliocotError("linear map needs n >= 2")
        if not 0.0 <= self.fit_r2 <= 1.0:
            raise HeliocotError(f"fit_r2 {self.fit_r2} outside [0, 1]")


def eccentricity_correction(day_of_year):
    """Earth-Sun distance factor 1 + 0.033 cos(2 pi d / 365).

    ``day_of_year`` may be fractional (e.g. day + hour / 24).
    """
    if not 1 <= day_of_year <= 366:
        raise HeliocotError(f"day of year {day_of_year} outside 1-366")
    return 1.0 + 0.033 * math.cos(2.0 * math.pi * day_of_year / 365.0)


def clear_sky_irradiance(sp, params, day_of_year):
    """Global horizontal clear-sky irradiance in W/m^2 (0 with the sun down)."""
    if sp.elevation_deg <= 0.0:
        return 0.0
    cos_z = math.cos(math.radians(sp.zenith_deg))
    return (
        params.e0_wm2
        * eccentricity_correction(day_of_year)
        * params.a
        * cos_z**params.b
        * math.exp(params.c * (90.0 - sp.elevation_deg))
    )


def fit_linear_map(pairs, intercept=True):
    """Least-squares map ``l_norm = m * g_c + q`` from clear-frame pairs.

    ``pairs`` is a sequence of ``(g_c, l_norm)``. With ``intercept=False``
    the line is forced through the origin.
    """
    data = np.asarray(list(pairs), dtype=np.float64).reshape(-1, 2)
    n = data.shape[0]
    if n < 2:
        raise InsufficientDataError(f"need at least 2 clear-sky pairs, got {n}")
    g, lum = data[:, 0], data[:, 1]
    if np.all(g == g[0]):
        raise SingularFitError("all clear-sky irradiance values are identical")
    if intercept:
        m, q = ols(g, lum)
    else:
        m, q = float(np.dot(g, lum) / np.dot(g, g)), 0.0
    resid = lum - (m * g + q)
    ss_tot = float(np.sum(centered(lum) ** 2))
    r2 = 1.0 - float(np.dot(resid, resid)) / ss_tot if ss_tot > 0 else 1.0
    return LinearMap(m, q, min(1.0, max(0.0, r2)), n)


def clear_sky_luminance(g_c, lmap):
    """Baseline luminance ``max(0, m * g_c + q)``."""
    return max(0.0, lmap.m * g_c + lmap.q)


def write_map_csv(path, lmap):
    write_csv(path, MAP_HEADER, [(fmt_float(lmap.m), fmt_float(lmap.q), fmt_float(lmap.fit_r2), str(lmap.n))])


def read_map_csv(path):
    rows = list(read_csv_rows(path, MAP_HEADER))
    if len(rows) != 1:
        raise ParseError(f"expected exactly one map row, got {len(rows)}")
    line, (m, q, r2, n) = rows[0]
    try:
        count = int(n)
    except ValueError:
        raise ParseError(f"n: not an integer: {n!r}", line=line) from None
    return LinearMap(parse_float(m, line, "m"), parse_float(q, line, "q"), parse_float(r2, line, "r2"), count)


@dataclass(frozen=True)
class IrradianceRecord:
    timestamp: datetime
    zenith_deg: float
    azimuth_deg: float
    g_c: float


def irradiance_records(timestamps, loc, params):
    """Solar geometry and modeled clear-sky irradiance at each instant."""
    out = []
    for t in timestamps:
        sp = solar_position(t, loc)
        out.append(IrradianceRecord(t, sp.zenith_deg, sp.azimuth_deg, clear_sky_irradiance(sp, params, day_of_year(t))))
    return out


def write_irradiance_csv(path, records):
    rows = [
        (format_utc(r.timestamp), fmt_float(r.zenith_deg), fmt_float(r.azimuth_deg), fmt_float(r.g_c))
        for r in records
    ]
    write_csv(path, IRRADIANCE_HEADER, rows)


def read_irradiance_csv(path):
    out = []
    for line, row in read_csv_rows(path, IRRADIANCE_HEADER):
        try:
            t = parse_utc(row[0])
        except HeliocotError as exc:
            raise ParseError(str(exc), line=line) from None
        out.append(IrradianceRecord(t, *(parse_float(v, line, k) for v, k in zip(row[1:], IRRADIANCE_HEADER[1:]))))
    return out


def read_clear_labels(path):
    """``{timestamp: is_clear}`` from an operator-supplied labels CSV."""
    labels = {}
    for line, row in read_csv_rows(path, LABELS_HEADER):
        flag = row[1].strip()
        if flag not in ("0", "1"):
            raise ParseError(f"is_clear must be 0 or 1, got {flag!r}", line=line)
        try:
            labels[parse_utc(row[0])] = flag == "1"
        except HeliocotError as exc:
            raise ParseError(str(exc), line=line) from None
    return labels


def write_clear_labels(path, labels):
    write_csv(path, LABELS_HEADER, [(format_utc(t), "1" if v else "0") for t, v in sorted(labels.items())])
