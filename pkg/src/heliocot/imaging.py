"""Sky image loading and exposure-normalized circumsolar luminance."""
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import EmptyRegionError, HeliocotError, MetadataError, ParseError
from .fileio import atomic_write_text, csv_text, fmt_float, parse_float, read_csv_rows, write_csv
from .geometry import solar_position, sun_pixel
from .times import format_utc, parse_utc, utc_instant

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = {".jpg", ".jpeg", ".png"}
SIDECAR_HEADER = ("filename", "timestamp_utc", "exposure_s", "iso", "f_number")
LUMINANCE_HEADER = ("timestamp_utc", "y_raw", "l_norm", "n_pixels")

# BT.709 / sRGB primaries
LUMA_WEIGHTS = (0.2126, 0.7152, 0.0722)


def srgb_to_linear(c):
    """Undo the sRGB transfer curve; ``c`` in [0, 1], scalar or array."""
    c = np.asarray(c, dtype=np.float64)
    return np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)


_LINEAR_LUT = srgb_to_linear(np.arange(256) / 255.0)
_Y_LUT = np.stack([w * _LINEAR_LUT for w in LUMA_WEIGHTS])


def relative_luminance(r, g, b):
    """Relative luminance in [0, 1] of 8-bit sRGB channel values."""
    for v in (r, g, b):
        if np.any(np.asarray(v) < 0) or np.any(np.asarray(v) > 255):
            raise HeliocotError("channel values must be within [0, 255]")
    y = _Y_LUT[0][r] + _Y_LUT[1][g] + _Y_LUT[2][b]
    return float(y) if np.ndim(y) == 0 else y


def luminance_map(pixels):
    """Per-pixel relative luminance of an ``(H, W, 3)`` uint8 array."""
    return _Y_LUT[0][pixels[..., 0]] + _Y_LUT[1][pixels[..., 1]] + _Y_LUT[2][pixels[..., 2]]


@dataclass(frozen=True, eq=False)
class SkyImage:
    pixels: np.ndarray
    timestamp: datetime
    exposure_time_s: float
    iso: float
    f_number: float

    def __post_init__(self):
        if self.timestamp is None:
            raise MetadataError("timestamp")
        object.__setattr__(self, "timestamp", utc_instant(self.timestamp))
        for name in ("exposure_time_s", "iso", "f_number"):
            v = getattr(self, name)
            if v is None:
                raise MetadataError(name)
            if not (math.isfinite(v) and v > 0):
                raise MetadataError(name, f"must be positive, got {v}")
        px = self.pixels
        if px.dtype != np.uint8 or px.ndim != 3 or px.shape[2] != 3:
            raise HeliocotError("pixels must be an (H, W, 3) uint8 array")


@dataclass(frozen=True)
class LuminanceSample:
    timestamp: datetime
    y_raw: float
    l_norm: float
    n_pixels: int


def circumsolar_luminance(pixels, sun, radius_px, mask_saturated=False):
    """Mean relative luminance of pixels whose centers lie within ``radius_px`` of ``sun``.

    Returns ``(y_mean, n_pixels)``. The disk is clipped to the frame. With
    ``mask_saturated`` pixels having any channel at 255 are skipped.
    """
    if radius_px <= 0:
        raise HeliocotError("radius_px must be positive")
    h, w = pixels.shape[:2]
    sx, sy = sun
    x0, x1 = max(0, math.ceil(sx - radius_px)), min(w - 1, math.floor(sx + radius_px))
    y0, y1 = max(0, math.ceil(sy - radius_px)), min(h - 1, math.floor(sy + radius_px))
    if x0 > x1 or y0 > y1:
        raise EmptyRegionError(f"no pixels within {radius_px} px of ({sx:.2f}, {sy:.2f})")
    rows = np.arange(y0, y1 + 1, dtype=np.float64)[:, None]
    cols = np.arange(x0, x1 + 1, dtype=np.float64)[None, :]
    inside = (cols - sx) ** 2 + (rows - sy) ** 2 <= radius_px * radius_px
    crop = pixels[y0 : y1 + 1, x0 : x1 + 1]
    if mask_saturated:
        inside &= ~(crop == 255).any(axis=2)
    n = int(inside.sum())
    if n == 0:
        raise EmptyRegionError(f"no pixels within {radius_px} px of ({sx:.2f}, {sy:.2f})")
    y = luminance_map(crop)[inside]
    return float(y.mean()), n


def normalize_exposure(y, img):
    """Scale luminance by the reflected-light exposure equation N^2 / (t * S / 100)."""
    return y * img.f_number**2 / (img.exposure_time_s * img.iso / 100.0)


def default_radius(cam):
    """About 9 degrees of sky around the sun."""
    return max(1, round(0.1 * cam.radius_90deg_px))


def extract_sample(img, loc, cam, radius_px=None, mask_saturated=False):
    """Circumsolar luminance sample for one image, or ``None`` at night."""
    sp = solar_position(img.timestamp, loc)
    sun = sun_pixel(sp, cam)
    if sun is None:
        return None
    if radius_px is None:
        radius_px = default_radius(cam)
    y, n = circumsolar_luminance(img.pixels, sun, radius_px, mask_saturated)
    return LuminanceSample(img.timestamp, y, normalize_exposure(y, img), n)


# --- metadata -----------------------------------------------------------------

_EXIF_IFD = 0x8769
_TAG_DATETIME = 0x0132
_TAG_EXPOSURE = 0x829A
_TAG_FNUMBER = 0x829D
_TAG_ISO = 0x8827
_TAG_DATETIME_ORIGINAL = 0x9003
_TAG_OFFSET_ORIGINAL = 0x9011


@dataclass(frozen=True)
class ExposureRecord:
    """Image metadata fields; any may be ``None`` when unknown."""

    timestamp: datetime = None
    exposure_time_s: float = None
    iso: float = None
    f_number: float = None

    def merged(self, fallback):
        if fallback is None:
            return self
        return ExposureRecord(
            *(a if a is not None else b for a, b in zip(
                (self.timestamp, self.exposure_time_s, self.iso, self.f_number),
                (fallback.timestamp, fallback.exposure_time_s, fallback.iso, fallback.f_number),
            ))
        )


def read_sidecar(path):
    """Parse an ``exif.csv`` sidecar into ``{filename: ExposureRecord}``."""
    records = {}
    for line, row in read_csv_rows(path, SIDECAR_HEADER):
        name, ts, exp, iso, fnum = row
        try:
            t = parse_utc(ts)
        except HeliocotError as exc:
            raise ParseError(str(exc), line=line) from None
        records[name] = ExposureRecord(
            t,
            parse_float(exp, line, "exposure_s"),
            parse_float(iso, line, "iso"),
            parse_float(fnum, line, "f_number"),
        )
    return records


def write_sidecar(path, items):
    """``items``: iterable of ``(filename, ExposureRecord)``."""
    rows = [
        (name, format_utc(r.timestamp), fmt_float(r.exposure_time_s), fmt_float(r.iso), fmt_float(r.f_number))
        for name, r in items
    ]
    write_csv(path, SIDECAR_HEADER, rows)


def _exif_number(v):
    if v is None:
        return None
    if isinstance(v, tuple):
        v = v[0]
    try:
        return float(v)
    except (TypeError, ValueError, ZeroDivisionError):
        return None


def exif_record(im, utc_offset_hours=None):
    """Exposure metadata embedded in a Pillow image (EXIF), possibly partial."""
    exif = im.getexif()
    if not exif:
        return ExposureRecord()
    sub = exif.get_ifd(_EXIF_IFD)
    stamp = sub.get(_TAG_DATETIME_ORIGINAL) or exif.get(_TAG_DATETIME)
    t = None
    if stamp:
        try:
            naive = datetime.strptime(stamp.strip("\x00 "), "%Y:%m:%d %H:%M:%S")
        except ValueError:
            naive = None
        if naive is not None:
            offset = sub.get(_TAG_OFFSET_ORIGINAL)
            if offset:
                t = parse_utc(naive.isoformat() + offset.strip("\x00 "))
            elif utc_offset_hours is not None:
                t = utc_instant(naive, utc_offset_hours)
    return ExposureRecord(
        t,
        _exif_number(sub.get(_TAG_EXPOSURE)),
        _exif_number(sub.get(_TAG_ISO)),
        _exif_number(sub.get(_TAG_FNUMBER)),
    )


def load_sky_image(path, sidecar=None, utc_offset_hours=None):
    """Load an image and its exposure metadata.

    EXIF fields take precedence; missing ones fall back to the sidecar record
    for the file name. ``utc_offset_hours`` applies to EXIF timestamps that
    carry no offset tag.
    """
    path = Path(path)
    with Image.open(path) as im:
        record = exif_record(im, utc_offset_hours)
        pixels = np.asarray(im.convert("RGB"))
    if sidecar is not None:
        record = record.merged(sidecar.get(path.name))
    return SkyImage(pixels, record.timestamp, record.exposure_time_s, record.iso, record.f_number)


def list_images(directory):
    return sorted(p for p in Path(directory).iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)


def _extract_path(args):
    path, sidecar, loc, cam, radius_px, mask_saturated, utc_offset_hours = args
    img = load_sky_image(path, sidecar, utc_offset_hours)
    return extract_sample(img, loc, cam, radius_px, mask_saturated)


def extract_directory(directory, loc, cam, radius_px=None, mask_saturated=False,
                      sidecar_path=None, jobs=None, utc_offset_hours=None):
    """Luminance samples for every image in ``directory``, sorted by timestamp.

    Night frames are dropped. ``sidecar_path`` defaults to ``exif.csv`` inside
    the directory when that file exists.
    """
    directory = Path(directory)
    if sidecar_path is None and (directory / "exif.csv").exists():
        sidecar_path = directory / "exif.csv"
    sidecar = read_sidecar(sidecar_path) if sidecar_path is not None else None
    paths = list_images(directory)
    args = [(p, sidecar, loc, cam, radius_px, mask_saturated, utc_offset_hours) for p in paths]
    jobs = jobs or os.cpu_count() or 1
    if jobs > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_extract_path, args, chunksize=16))
    else:
        results = [_extract_path(a) for a in args]
    samples = [s for s in results if s is not None]
    log.info("%d images, %d daytime samples", len(paths), len(samples))
    samples.sort(key=lambda s: s.timestamp)
    return samples


def luminance_csv_text(samples):
    rows = [
        (format_utc(s.timestamp), fmt_float(s.y_raw), fmt_float(s.l_norm), str(s.n_pixels))
        for s in samples
    ]
    return csv_text(LUMINANCE_HEADER, rows)


def write_luminance_csv(path, samples):
    atomic_write_text(path, luminance_csv_text(samples))


def read_luminance_csv(source):
    samples = []
    for line, row in read_csv_rows(source, LUMINANCE_HEADER):
        try:
            t = parse_utc(row[0])
        except HeliocotError as exc:
            raise ParseError(str(exc), line=line) from None
        try:
            n = int(row[3])
        except ValueError:
            raise ParseError(f"n_pixels: not an integer: {row[3]!r}", line=line) from None
        samples.append(LuminanceSample(t, parse_float(row[1], line, "y_raw"), parse_float(row[2], line, "l_norm"), n))
    return samples
