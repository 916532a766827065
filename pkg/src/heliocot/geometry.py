"""Solar geometry and fisheye projection.

Solar position uses the Astronomical Almanac low-precision solar coordinates
(mean longitude and anomaly -> ecliptic longitude -> right ascension and
declination; sidereal time -> hour angle), good to about 0.01 deg for
1950-2050. Atmospheric refraction is not applied.
"""
import math
from dataclasses import dataclass

from .errors import HeliocotError, OutOfFrameError, ValidityError
from .times import utc_instant

MIN_YEAR = 1950
MAX_YEAR = 2050


@dataclass(frozen=True)
class GeoLocation:
    latitude_deg: float
    longitude_deg: float
    altitude_m: float = 0.0

    def __post_init__(self):
        if not -90.0 <= self.latitude_deg <= 90.0:
            raise HeliocotError(f"latitude {self.latitude_deg} outside [-90, 90]")
        if not -180.0 <= self.longitude_deg <= 180.0:
            raise HeliocotError(f"longitude {self.longitude_deg} outside [-180, 180]")


# Rooftop camera site, Nanyang Technological University.
DEFAULT_SITE = GeoLocation(1.3483, 103.6831)


@dataclass(frozen=True)
class SolarPosition:
    zenith_deg: float
    azimuth_deg: float

    @property
    def elevation_deg(self):
        return 90.0 - self.zenith_deg


@dataclass(frozen=True)
class CameraModel:
    """Equidistant fisheye camera.

    Pixel ``(col, row)`` has its center at ``(x, y) = (col, row)``; north with
    zero offset points to decreasing ``y`` (image up) and bearings increase
    toward ``+x`` unless ``mirror`` is set.
    """

    image_width_px: int
    image_height_px: int
    center_x_px: float
    center_y_px: float
    radius_90deg_px: float
    azimuth_offset_deg: float = 0.0
    mirror: bool = False

    def __post_init__(self):
        if self.image_width_px <= 0 or self.image_height_px <= 0:
            raise HeliocotError("image dimensions must be positive")
        if self.radius_90deg_px <= 0:
            raise HeliocotError("radius_90deg_px must be positive")
        if not self.contains(self.center_x_px, self.center_y_px):
            raise HeliocotError(
                f"principal point ({self.center_x_px}, {self.center_y_px}) outside image"
            )

    def contains(self, x, y):
        return 0.0 <= x <= self.image_width_px - 1 and 0.0 <= y <= self.image_height_px - 1


def julian_day(t):
    """Julian day of a UTC instant (Gregorian calendar)."""
    y, m = t.year, t.month
    if m <= 2:
        y -= 1
        m += 12
    a = y // 100
    b = 2 - a + a // 4
    day = t.day + (t.hour + t.minute / 60.0 + t.second / 3600.0) / 24.0
    return math.floor(365.25 * (y + 4716)) + math.floor(30.6001 * (m + 1)) + day + b - 1524.5


def solar_position(t, loc):
    """Unrefracted sun position at UTC instant ``t`` for ``loc``."""
    t = utc_instant(t)
    if not MIN_YEAR <= t.year <= MAX_YEAR:
        raise ValidityError(f"year {t.year} outside {MIN_YEAR}-{MAX_YEAR}")

    n = julian_day(t) - 2451545.0
    mean_long = (280.460 + 0.9856474 * n) % 360.0
    mean_anom = math.radians((357.528 + 0.9856003 * n) % 360.0)
    ecl_long = math.radians(mean_long + 1.915 * math.sin(mean_anom) + 0.020 * math.sin(2 * mean_anom))
    obliquity = math.radians(23.439 - 0.0000004 * n)

    ra = math.atan2(math.cos(obliquity) * math.sin(ecl_long), math.cos(ecl_long))
    decl = math.asin(math.sin(obliquity) * math.sin(ecl_long))

    hour = t.hour + t.minute / 60.0 + t.second / 3600.0
    gmst_h = (6.697375 + 0.0657098242 * n + hour) % 24.0
    lmst_deg = (gmst_h * 15.0 + loc.longitude_deg) % 360.0
    hour_angle = math.radians((lmst_deg - math.degrees(ra) + 180.0) % 360.0 - 180.0)

    lat = math.radians(loc.latitude_deg)
    cos_zen = math.sin(lat) * math.sin(decl) + math.cos(lat) * math.cos(decl) * math.cos(hour_angle)
    zenith = math.degrees(math.acos(min(1.0, max(-1.0, cos_zen))))
    azimuth = math.degrees(
        math.atan2(
            -math.sin(hour_angle) * math.cos(decl),
            math.sin(decl) * math.cos(lat) - math.cos(decl) * math.sin(lat) * math.cos(hour_angle),
        )
    )
    return SolarPosition(zenith, azimuth % 360.0)


def project_equidistant(zenith_deg, azimuth_deg, cam):
    """Pixel coordinates of a sky direction; no horizon or frame checks."""
    r = zenith_deg / 90.0 * cam.radius_90deg_px
    bearing = math.radians(azimuth_deg + cam.azimuth_offset_deg)
    dx = r * math.sin(bearing)
    if cam.mirror:
        dx = -dx
    return cam.center_x_px + dx, cam.center_y_px - r * math.cos(bearing)


def sun_pixel(sp, cam):
    """Sun location in the image, or ``None`` when the sun is below the horizon.

    Raises ``OutOfFrameError`` when the projected point is outside the image.
    """
    if sp.elevation_deg <= 0.0:
        return None
    x, y = project_equidistant(sp.zenith_deg, sp.azimuth_deg, cam)
    if not cam.contains(x, y):
        raise OutOfFrameError(f"sun projects to ({x:.1f}, {y:.1f}), outside the image")
    return x, y
