"""Pipeline configuration: one TOML file holding every tunable constant.

Precedence is command-line flag > config file > built-in default. Unknown
sections or keys are rejected so typos do not silently fall back to defaults.
"""
from dataclasses import dataclass, field, fields, replace

import tomli

from .clearsky import ClearSkyParams
from .errors import ConfigError, HeliocotError
from .geometry import DEFAULT_SITE, CameraModel, GeoLocation
from .pipeline import ANCHORS, NORMALIZATION_MODES

CONFIG_ENV = "HELIOCOT_CONFIG"


@dataclass(frozen=True)
class PipelineConfig:
    site: GeoLocation = DEFAULT_SITE
    # UTC+8 at the default site; used only when a local-time flag is given
    utc_offset_hours: float = 8.0
    camera: CameraModel = None
    clear_sky: ClearSkyParams = field(default_factory=ClearSkyParams)
    circumsolar_radius_px: float = None
    mask_saturated: bool = False
    min_valid_cells: int = 1
    window_min: float = 15.0
    window_anchor: str = "centered"
    min_samples: int = 3
    normalization: str = "signed"
    fit_intercept: bool = True

    def __post_init__(self):
        if self.circumsolar_radius_px is not None and not self.circumsolar_radius_px > 0:
            raise ConfigError("circumsolar_radius_px must be positive")
        if not 1 <= self.min_valid_cells <= 9:
            raise ConfigError("min_valid_cells must be within 1-9")
        if not self.window_min > 0:
            raise ConfigError("window_min must be positive")
        if self.window_anchor not in ANCHORS:
            raise ConfigError(f"window_anchor must be one of {', '.join(ANCHORS)}")
        if self.min_samples < 1:
            raise ConfigError("min_samples must be >= 1")
        if self.normalization not in NORMALIZATION_MODES:
            raise ConfigError(f"normalization must be one of {', '.join(NORMALIZATION_MODES)}")
        if not -14 <= self.utc_offset_hours <= 14:
            raise ConfigError("utc_offset_hours must be within [-14, 14]")

    def require_camera(self):
        if self.camera is None:
            raise ConfigError("a [camera] section is required for this command")
        return self.camera

    def radius_px(self):
        from .imaging import default_radius

        if self.circumsolar_radius_px is not None:
            return self.circumsolar_radius_px
        return default_radius(self.require_camera())


_NUMBER = "number"
_INT = "int"
_BOOL = "bool"
_STR = "str"

# section -> key -> expected TOML type
SCHEMA = {
    "site": {
        "latitude_deg": _NUMBER,
        "longitude_deg": _NUMBER,
        "altitude_m": _NUMBER,
        "utc_offset_hours": _NUMBER,
    },
    "camera": {
        "image_width_px": _INT,
        "image_height_px": _INT,
        "center_x_px": _NUMBER,
        "center_y_px": _NUMBER,
        "radius_90deg_px": _NUMBER,
        "azimuth_offset_deg": _NUMBER,
        "mirror": _BOOL,
    },
    "clear_sky": {"a": _NUMBER, "b": _NUMBER, "c": _NUMBER, "e0_wm2": _NUMBER},
    "imaging": {"circumsolar_radius_px": _NUMBER, "mask_saturated": _BOOL},
    "cot": {"min_valid_cells": _INT},
    "align": {"window_min": _NUMBER, "window_anchor": _STR, "min_samples": _INT, "normalization": _STR},
    "fit": {"intercept": _BOOL},
}

_CAMERA_REQUIRED = ("image_width_px", "image_height_px", "center_x_px", "center_y_px", "radius_90deg_px")


def _check_type(section, key, value, kind):
    where = f"[{section}] {key}"
    if kind == _BOOL:
        ok = isinstance(value, bool)
    elif kind == _INT:
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif kind == _NUMBER:
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    else:
        ok = isinstance(value, str)
    if not ok:
        raise ConfigError(f"{where}: expected {kind}, got {value!r}")
    return float(value) if kind == _NUMBER else value


def config_from_dict(doc):
    """Validate a parsed TOML document and build a ``PipelineConfig``."""
    clean = {}
    for section, table in doc.items():
        if section not in SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        if not isinstance(table, dict):
            raise ConfigError(f"[{section}] must be a table")
        for key, value in table.items():
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown config key [{section}] {key}")
            clean.setdefault(section, {})[key] = _check_type(section, key, value, SCHEMA[section][key])

    try:
        kw = {}
        site = dict(clean.get("site", {}))
        if "utc_offset_hours" in site:
            kw["utc_offset_hours"] = site.pop("utc_offset_hours")
        if site:
            base = {f.name: getattr(DEFAULT_SITE, f.name) for f in fields(GeoLocation)}
            kw["site"] = GeoLocation(**{**base, **site})
        if "camera" in clean:
            missing = [k for k in _CAMERA_REQUIRED if k not in clean["camera"]]
            if missing:
                raise ConfigError(f"[camera] missing {', '.join(missing)}")
            kw["camera"] = CameraModel(**clean["camera"])
        if "clear_sky" in clean:
            kw["clear_sky"] = ClearSkyParams(**clean["clear_sky"])
        kw.update(clean.get("imaging", {}))
        kw.update(clean.get("cot", {}))
        kw.update(clean.get("align", {}))
        if "intercept" in clean.get("fit", {}):
            kw["fit_intercept"] = clean["fit"]["intercept"]
        return PipelineConfig(**kw)
    except ConfigError:
        raise
    except HeliocotError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path):
    """Read and validate a config file. ``OSError`` propagates for missing files."""
    with open(path, "rb") as fh:
        try:
            doc = tomli.load(fh)
        except tomli.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(doc)


def _toml_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    return repr(v)


def config_to_toml(cfg):
    """Serialize ``cfg`` so that ``config_from_dict(tomli.loads(text)) == cfg``."""
    sections = {
        "site": {
            "latitude_deg": cfg.site.latitude_deg,
            "longitude_deg": cfg.site.longitude_deg,
            "altitude_m": cfg.site.altitude_m,
            "utc_offset_hours": cfg.utc_offset_hours,
        },
        "clear_sky": {f.name: getattr(cfg.clear_sky, f.name) for f in fields(ClearSkyParams)},
        "imaging": {"mask_saturated": cfg.mask_saturated},
        "cot": {"min_valid_cells": cfg.min_valid_cells},
        "align": {
            "window_min": cfg.window_min,
            "window_anchor": cfg.window_anchor,
            "min_samples": cfg.min_samples,
            "normalization": cfg.normalization,
        },
        "fit": {"intercept": cfg.fit_intercept},
    }
    if cfg.circumsolar_radius_px is not None:
        sections["imaging"]["circumsolar_radius_px"] = cfg.circumsolar_radius_px
    if cfg.camera is not None:
        sections["camera"] = {f.name: getattr(cfg.camera, f.name) for f in fields(CameraModel)}
    lines = []
    for name in ("site", "camera", "clear_sky", "imaging", "cot", "align", "fit"):
        if name not in sections:
            continue
        lines.append(f"[{name}]")
        lines.extend(f"{k} = {_toml_value(v)}" for k, v in sections[name].items())
        lines.append("")
    return "\n".join(lines)


def with_overrides(cfg, **overrides):
    """Apply non-``None`` overrides (command-line flags)."""
    changes = {k: v for k, v in overrides.items() if v is not None}
    return replace(cfg, **changes) if changes else cfg
