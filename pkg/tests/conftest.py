import sys
from pathlib import Path

import pytest

from heliocot.geometry import CameraModel
from heliocot.synth import SynthConfig, synth_dataset

sys.path.insert(0, str(Path(__file__).parent / "oracles"))

DATA = Path(__file__).parent / "data"

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or (report.when != "call" and not report.failed):
        return
    number, text = marker.args
    ok = report.passed if report.when == "call" else False
    prev = _criteria.get(number, (text, True))
    _criteria[number] = (text, prev[1] and ok)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        text, ok = _criteria[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {text}")


@pytest.fixture(scope="session")
def small_cam():
    return CameraModel(256, 256, 127.5, 127.5, 120.0)


@pytest.fixture(scope="session")
def small_synth(tmp_path_factory, small_cam):
    """Four days of 256x256 frames; quick enough for per-module tests."""
    cfg = SynthConfig(seed=7, camera=small_cam, n_days=4, clear_fraction=0.25)
    out = tmp_path_factory.mktemp("small_synth")
    truth = synth_dataset(cfg, out)
    return out, truth
