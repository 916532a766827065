"""Synthetic end-to-end dataset with a planted COT -> luminance-difference relation.

Each frame's circumsolar disk is rendered with a fixed gray level and the
exposure time is solved so that the exposure-normalized luminance equals the
planted value exactly:

    l_true = m * g_clear + q + slope * cot / 100

where ``g_clear`` is the modeled clear-sky irradiance, ``(m, q)`` the true
irradiance -> luminance map and ``cot`` the mean of the overpass grid the
frame belongs to. Overpasses with zero COT are labeled clear so the pipeline
can refit ``(m, q)``.
"""
import io
import json
import logging
from dataclasses import asdict, dataclass, field
from datetime import date, datetime, time, timedelta, timezone
from pathlib import Path

import numpy as np
from PIL import Image

from .clearsky import ClearSkyParams, clear_sky_irradiance, write_clear_labels
from .config import PipelineConfig, config_to_toml
from .cot import CotGrid, mean_cot, serialize_cot_csv
from .errors import ConfigError, OutOfFrameError
from .fileio import atomic_write_bytes, atomic_write_text, csv_text, fmt_float
from .geometry import DEFAULT_SITE, CameraModel, GeoLocation, solar_position, sun_pixel
from .imaging import ExposureRecord, default_radius, relative_luminance, write_sidecar
from .times import day_of_year, format_utc

log = logging.getLogger(__name__)

TRUTH_HEADER = ("timestamp_utc", "true_l_norm", "true_lum_diff")


def _default_camera():
    return CameraModel(1024, 1024, 511.5, 511.5, 490.0)


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    site: GeoLocation = DEFAULT_SITE
    camera: CameraModel = field(default_factory=_default_camera)
    clear_sky: ClearSkyParams = field(default_factory=ClearSkyParams)
    start_date: date = date(2015, 1, 1)
    n_days: int = 30
    # nominal MODIS overpasses, UTC hours
    overpass_hours: tuple = (4, 7)
    overpass_jitter_min: int = 5
    frame_interval_min: int = 2
    frame_span_min: int = 20
    map_m: float = 0.05
    map_q: float = 2.0
    planted_slope: float = -20.0
    clear_fraction: float = 0.25
    fill_probability: float = 0.1
    all_fill_overpasses: int = 1
    cell_jitter: float = 5.0
    # every overpass gets this COT when set (no jitter, no fill)
    constant_cot: float = None
    disk_gray: int = 180
    sky_rgb: tuple = (60, 90, 150)
    f_number: float = 2.8
    iso: float = 100.0
    noise_sigma: float = 0.0

    def __post_init__(self):
        if self.n_days < 1:
            raise ConfigError("n_days must be >= 1")
        if self.frame_interval_min <= 0 or self.frame_span_min < 0:
            raise ConfigError("frame interval must be positive and span non-negative")
        if not 0 < self.disk_gray < 255:
            raise ConfigError("disk_gray must keep the disk away from 0 and saturation")
        if not 0.0 <= self.clear_fraction <= 1.0 or not 0.0 <= self.fill_probability < 1.0:
            raise ConfigError("fractions must lie in [0, 1]")
        if self.constant_cot is not None and not 0.0 <= self.constant_cot <= 100.0:
            raise ConfigError("constant_cot must lie in [0, 100]")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be >= 0")


@dataclass(frozen=True)
class Overpass:
    nominal: datetime
    timestamp: datetime
    grid: CotGrid
    cot: float  # COT driving the frames; the grid mean unless the grid is all fill
    clear: bool


@dataclass(frozen=True)
class Frame:
    index: int
    timestamp: datetime
    overpass: int
    g_clear: float
    l_clear: float
    lum_diff: float
    l_true: float
    sun: tuple
    exposure_time_s: float

    @property
    def filename(self):
        return self.timestamp.strftime("%Y%m%dT%H%M%SZ.png")


@dataclass(frozen=True)
class SynthTruth:
    config: SynthConfig
    overpasses: list
    frames: list

    def to_json(self):
        cfg = asdict(self.config)
        cfg["start_date"] = self.config.start_date.isoformat()
        doc = {
            "config": cfg,
            "radius_px": default_radius(self.config.camera),
            "overpasses": [
                {
                    "timestamp_utc": format_utc(o.timestamp),
                    "cot": o.cot,
                    "clear": o.clear,
                    "n_valid": o.grid.n_valid,
                }
                for o in self.overpasses
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _schedule(cfg):
    rng = np.random.default_rng([cfg.seed, 0])
    overpasses = []
    n_total = cfg.n_days * len(cfg.overpass_hours)
    # deterministic placement of the special overpasses
    order = rng.permutation(n_total)
    n_clear = int(round(cfg.clear_fraction * n_total)) if cfg.constant_cot is None else 0
    clear_idx = set(order[:n_clear].tolist())
    fill_idx = set(order[n_clear : n_clear + cfg.all_fill_overpasses].tolist()) if cfg.constant_cot is None else set()
    k = 0
    for d in range(cfg.n_days):
        day = cfg.start_date + timedelta(days=d)
        for hour in cfg.overpass_hours:
            nominal = datetime.combine(day, time(hour), tzinfo=timezone.utc)
            jitter = int(rng.integers(-cfg.overpass_jitter_min, cfg.overpass_jitter_min + 1))
            t = nominal + timedelta(minutes=jitter)
            if cfg.constant_cot is not None:
                cells = [float(cfg.constant_cot)] * 9
            elif k in clear_idx:
                cells = [0.0] * 9
            else:
                base = rng.uniform(0.0, 100.0)
                jit = rng.uniform(-cfg.cell_jitter, cfg.cell_jitter, 9)
                cells = [round(float(np.clip(base + j, 0.0, 100.0)), 2) for j in jit]
                fill = rng.random(9) < cfg.fill_probability
                if fill.all():
                    fill[4] = False
                cells = [None if f else c for c, f in zip(cells, fill)]
            if k in fill_idx:
                true_cot = float(np.mean([c for c in cells if c is not None]))
                cells = [None] * 9
            grid = CotGrid.from_cells(t, cells)
            cot = true_cot if k in fill_idx else mean_cot(grid)
            overpasses.append(Overpass(nominal, t, grid, cot, cot == 0.0))
            k += 1
    return overpasses


def _frames(cfg, overpasses):
    y_disk = relative_luminance(cfg.disk_gray, cfg.disk_gray, cfg.disk_gray)
    half = cfg.frame_span_min // cfg.frame_interval_min
    frames = []
    for k, o in enumerate(overpasses):
        for j in range(-half, half + 1):
            t = o.nominal + timedelta(minutes=j * cfg.frame_interval_min)
            sp = solar_position(t, cfg.site)
            try:
                sun = sun_pixel(sp, cfg.camera)
            except OutOfFrameError as exc:
                raise ConfigError(f"{format_utc(t)}: {exc}") from None
            if sun is None:
                raise ConfigError(f"{format_utc(t)}: sun below the horizon in a scheduled window")
            g = clear_sky_irradiance(sp, cfg.clear_sky, day_of_year(t))
            l_clear = cfg.map_m * g + cfg.map_q
            diff = cfg.planted_slope * o.cot / 100.0
            l_true = l_clear + diff
            if not l_true > 0:
                raise ConfigError(f"{format_utc(t)}: planted luminance {l_true:.3g} is not positive")
            # solve y * N^2 / (t * S / 100) = l_true for the exposure time
            exposure = y_disk * cfg.f_number**2 / (l_true * cfg.iso / 100.0)
            frames.append(Frame(len(frames), t, k, g, l_clear, diff, l_true, sun, exposure))
    return frames


def _template(cfg):
    cam = cfg.camera
    rows = np.arange(cam.image_height_px)[:, None]
    cols = np.arange(cam.image_width_px)[None, :]
    sky = (cols - cam.center_x_px) ** 2 + (rows - cam.center_y_px) ** 2 <= cam.radius_90deg_px**2
    img = np.zeros((cam.image_height_px, cam.image_width_px, 3), dtype=np.uint8)
    img[sky] = cfg.sky_rgb
    return img


def render_frame(cfg, frame, template, radius_px):
    """Pixels for one frame: sky template plus a uniform disk around the sun."""
    img = template.copy()
    sx, sy = frame.sun
    # a margin keeps the averaging disk inside the uniform region
    r = radius_px + 3
    h, w = img.shape[:2]
    x0, x1 = max(0, int(np.floor(sx - r))), min(w - 1, int(np.ceil(sx + r)))
    y0, y1 = max(0, int(np.floor(sy - r))), min(h - 1, int(np.ceil(sy + r)))
    rows = np.arange(y0, y1 + 1)[:, None]
    cols = np.arange(x0, x1 + 1)[None, :]
    disk = (cols - sx) ** 2 + (rows - sy) ** 2 <= r * r
    img[y0 : y1 + 1, x0 : x1 + 1][disk] = cfg.disk_gray
    if cfg.noise_sigma > 0:
        rng = np.random.default_rng([cfg.seed, 1, frame.index])
        noisy = img.astype(np.float64) + rng.normal(0.0, cfg.noise_sigma, img.shape)
        img = np.clip(np.rint(noisy), 0, 255).astype(np.uint8)
    return img


def png_bytes(pixels):
    buf = io.BytesIO()
    Image.fromarray(pixels).save(buf, format="PNG", compress_level=1)
    return buf.getvalue()


def build_truth(cfg):
    overpasses = _schedule(cfg)
    return SynthTruth(cfg, overpasses, _frames(cfg, overpasses))


def pipeline_config(cfg):
    """Pipeline settings matching the synthetic camera and site."""
    return PipelineConfig(site=cfg.site, camera=cfg.camera, clear_sky=cfg.clear_sky)


def synth_dataset(cfg, out_dir):
    """Write the dataset to ``out_dir`` and return its ``SynthTruth``.

    Layout: ``images/*.png`` + ``images/exif.csv``, ``cot.csv``,
    ``clear_frames.csv``, ``truth.csv``, ``truth.json``, ``heliocot.toml``.
    """
    out = Path(out_dir)
    img_dir = out / "images"
    img_dir.mkdir(parents=True, exist_ok=True)
    truth = build_truth(cfg)
    template = _template(cfg)
    radius = default_radius(cfg.camera)
    for fr in truth.frames:
        atomic_write_bytes(img_dir / fr.filename, png_bytes(render_frame(cfg, fr, template, radius)))
    write_sidecar(
        img_dir / "exif.csv",
        [(fr.filename, ExposureRecord(fr.timestamp, fr.exposure_time_s, cfg.iso, cfg.f_number)) for fr in truth.frames],
    )
    atomic_write_text(out / "cot.csv", serialize_cot_csv([o.grid for o in truth.overpasses]))
    write_clear_labels(
        out / "clear_frames.csv", {fr.timestamp: truth.overpasses[fr.overpass].clear for fr in truth.frames}
    )
    rows = [(format_utc(fr.timestamp), fmt_float(fr.l_true), fmt_float(fr.lum_diff)) for fr in truth.frames]
    atomic_write_text(out / "truth.csv", csv_text(TRUTH_HEADER, rows))
    atomic_write_text(out / "truth.json", truth.to_json())
    atomic_write_text(out / "heliocot.toml", config_to_toml(pipeline_config(cfg)))
    log.info("synth: %d frames, %d overpasses -> %s", len(truth.frames), len(truth.overpasses), out)
    return truth
