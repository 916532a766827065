import csv
import math
from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heliocot.errors import HeliocotError, OutOfFrameError, ValidityError
from heliocot.geometry import (
    DEFAULT_SITE,
    CameraModel,
    GeoLocation,
    SolarPosition,
    project_equidistant,
    solar_position,
    sun_pixel,
)
from heliocot.times import parse_utc

from conftest import DATA


def utc(*args):
    return datetime(*args, tzinfo=timezone.utc)


def angle_diff(a, b):
    return (a - b + 180.0) % 360.0 - 180.0


def load_reference():
    with open(DATA / "noaa_reference.csv") as fh:
        return [
            (parse_utc(r["timestamp_utc"]), float(r["zenith_deg"]), float(r["azimuth_deg"]))
            for r in csv.DictReader(fh)
        ]


class TestGeoLocation:
    def test_default_site(self):
        assert DEFAULT_SITE.latitude_deg == 1.3483
        assert DEFAULT_SITE.longitude_deg == 103.6831

    @pytest.mark.parametrize("lat,lon", [(91, 0), (-90.5, 0), (0, 180.1), (0, -181)])
    def test_rejects_out_of_range(self, lat, lon):
        with pytest.raises(HeliocotError):
            GeoLocation(lat, lon)


class TestSolarPosition:
    def test_equator_june_evening(self):
        # NOAA calculator (unrefracted) elevation 66.5616 deg
        sp = solar_position(utc(2015, 6, 21, 12), GeoLocation(0.0, 0.0))
        assert sp.elevation_deg == pytest.approx(66.5616, abs=0.5)

    def test_site_near_solar_noon(self):
        sp = solar_position(utc(2015, 1, 1, 5, 4), DEFAULT_SITE)
        assert sp.zenith_deg < 25.0

    @pytest.mark.parametrize("t,zen,az", load_reference(), ids=lambda v: str(v))
    def test_against_noaa_reference(self, t, zen, az):
        sp = solar_position(t, DEFAULT_SITE)
        assert abs(sp.zenith_deg - zen) <= 0.3
        assert abs(angle_diff(sp.azimuth_deg, az)) <= 0.3

    def test_oracle_table_is_what_the_oracle_produces(self):
        from noaa_calculator import noaa_zenith_azimuth

        for t, zen, az in load_reference():
            z, a = noaa_zenith_azimuth(t, DEFAULT_SITE.latitude_deg, DEFAULT_SITE.longitude_deg)
            assert z == pytest.approx(zen, abs=1e-4)
            assert a == pytest.approx(az, abs=1e-4)

    @pytest.mark.parametrize("year", [1949, 2051])
    def test_validity_window(self, year):
        with pytest.raises(ValidityError):
            solar_position(utc(year, 6, 1, 4), DEFAULT_SITE)

    def test_naive_time_rejected(self):
        with pytest.raises(HeliocotError):
            solar_position(datetime(2015, 6, 1, 4), DEFAULT_SITE)

    def test_offset_time_equals_utc(self):
        local = datetime(2015, 6, 1, 12, tzinfo=timezone(timedelta(hours=8)))
        assert solar_position(local, DEFAULT_SITE) == solar_position(utc(2015, 6, 1, 4), DEFAULT_SITE)

    def test_midnight_below_horizon(self):
        # 16 UTC is local midnight in Singapore
        assert solar_position(utc(2015, 3, 1, 16), DEFAULT_SITE).elevation_deg < -60

    @settings(max_examples=300)
    @given(
        st.datetimes(min_value=datetime(1950, 1, 1), max_value=datetime(2050, 12, 31)),
        st.floats(-90, 90),
        st.floats(-180, 180),
    )
    def test_ranges_and_identity(self, t, lat, lon):
        sp = solar_position(t.replace(tzinfo=timezone.utc), GeoLocation(lat, lon))
        assert sp.zenith_deg + sp.elevation_deg == 90.0
        assert 0.0 <= sp.zenith_deg <= 180.0
        assert 0.0 <= sp.azimuth_deg < 360.0


@pytest.fixture
def cam():
    return CameraModel(1000, 800, 500.0, 400.0, 380.0)


class TestProjection:
    @pytest.mark.parametrize("az", [0.0, 45.0, 123.4, 359.9])
    def test_zenith_maps_to_principal_point(self, cam, az):
        assert sun_pixel(SolarPosition(0.0, az), cam) == (500.0, 400.0)

    def test_horizon_north_is_image_up(self, cam):
        x, y = project_equidistant(90.0, 0.0, cam)
        assert x == pytest.approx(500.0, abs=1e-9)
        assert y == pytest.approx(400.0 - 380.0, abs=1e-9)

    def test_offset_rotates_bearing(self):
        cam = CameraModel(1000, 1000, 500.0, 500.0, 400.0, azimuth_offset_deg=-90.0)
        x, y = project_equidistant(90.0, 90.0, cam)
        assert (x, y) == pytest.approx((500.0, 100.0))

    def test_mirror_flips_east_west(self):
        plain = CameraModel(1000, 1000, 500.0, 500.0, 400.0)
        mirrored = CameraModel(1000, 1000, 500.0, 500.0, 400.0, mirror=True)
        xp, yp = project_equidistant(45.0, 90.0, plain)
        xm, ym = project_equidistant(45.0, 90.0, mirrored)
        assert xp == pytest.approx(700.0)
        assert xm == pytest.approx(300.0)
        assert yp == pytest.approx(ym)

    def test_below_horizon(self, cam):
        assert sun_pixel(SolarPosition(95.0, 10.0), cam) is None

    def test_out_of_frame(self):
        cam = CameraModel(100, 100, 50.0, 50.0, 200.0)
        with pytest.raises(OutOfFrameError):
            sun_pixel(SolarPosition(60.0, 0.0), cam)

    @given(st.floats(0, 89.9), st.floats(0, 89.9), st.floats(0, 360))
    def test_radius_monotone_in_zenith(self, z1, z2, az):
        cam = CameraModel(1000, 1000, 500.0, 500.0, 400.0)
        r1 = math.dist(project_equidistant(z1, az, cam), (500.0, 500.0))
        r2 = math.dist(project_equidistant(z2, az, cam), (500.0, 500.0))
        if z1 < z2:
            assert r1 <= r2 + 1e-9

    @given(st.floats(0, 89.9), st.floats(0, 360), st.floats(0, 360))
    def test_azimuth_preserves_radius(self, z, a1, a2):
        cam = CameraModel(1000, 1000, 500.0, 500.0, 400.0, azimuth_offset_deg=17.0)
        r1 = math.dist(project_equidistant(z, a1, cam), (500.0, 500.0))
        r2 = math.dist(project_equidistant(z, a2, cam), (500.0, 500.0))
        assert r1 == pytest.approx(r2, abs=1e-9)

    @pytest.mark.parametrize(
        "kw",
        [
            dict(image_width_px=0),
            dict(radius_90deg_px=0.0),
            dict(center_x_px=-1.0),
            dict(center_y_px=100.0),
        ],
    )
    def test_camera_validation(self, kw):
        base = dict(image_width_px=100, image_height_px=100, center_x_px=50.0, center_y_px=50.0, radius_90deg_px=40.0)
        with pytest.raises(HeliocotError):
            CameraModel(**{**base, **kw})
