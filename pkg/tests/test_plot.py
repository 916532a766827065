import csv
import xml.etree.ElementTree as ET
from datetime import datetime, timedelta, timezone

import pytest

from heliocot.errors import HeliocotError
from heliocot.pipeline import AlignedPair
from heliocot.plot import PLOT_LEFT, PLOT_SIZE, PLOT_TOP, X_LABEL, Y_LABEL, emit_scatter, render_svg, to_viewport
from heliocot.stats import fit_line

NS = "{http://www.w3.org/2000/svg}"
T = datetime(2015, 2, 1, 4, 0, tzinfo=timezone.utc)


def pair(i, x, y):
    return AlignedPair(T + timedelta(hours=i), 100 * x, -10 * y, 7, x, y)


def parse(path):
    return ET.parse(path).getroot()


def markers(root):
    return [c for c in root.iter(NS + "circle") if "point" in c.get("class", "").split()]


def test_single_pair(tmp_path):
    csv_path = emit_scatter([pair(0, 0.5, 0.5)], None, tmp_path / "s.svg")
    assert len(markers(parse(tmp_path / "s.svg"))) == 1
    assert csv_path.name == "s_points.csv"
    with open(csv_path) as fh:
        assert len(list(csv.DictReader(fh))) == 1


def test_markers_inside_viewport(tmp_path):
    corners = [(0, 0), (0, 1), (1, 0), (1, 1), (0.3, 0.7)]
    emit_scatter([pair(i, x, y) for i, (x, y) in enumerate(corners)], None, tmp_path / "s.svg")
    ms = markers(parse(tmp_path / "s.svg"))
    assert len(ms) == len(corners)
    for m in ms:
        assert PLOT_LEFT <= float(m.get("cx")) <= PLOT_LEFT + PLOT_SIZE
        assert PLOT_TOP <= float(m.get("cy")) <= PLOT_TOP + PLOT_SIZE


def test_fit_line_endpoints(tmp_path):
    pts = [(0.0, 0.9), (0.25, 0.7), (0.5, 0.62), (0.8, 0.3), (1.0, 0.15)]
    pairs = [pair(i, x, y) for i, (x, y) in enumerate(pts)]
    fit = fit_line([x for x, _ in pts], [y for _, y in pts])
    emit_scatter(pairs, fit, tmp_path / "s.svg")
    (line,) = [e for e in parse(tmp_path / "s.svg").iter(NS + "line") if e.get("class") == "fit"]
    tol = 0.005 * PLOT_SIZE
    for x, attr in ((0.0, "1"), (1.0, "2")):
        ex, ey = to_viewport(x, fit.slope * x + fit.intercept)
        assert float(line.get("x" + attr)) == pytest.approx(ex, abs=tol)
        assert float(line.get("y" + attr)) == pytest.approx(ey, abs=tol)


def test_axis_labels(tmp_path):
    emit_scatter([pair(0, 0.5, 0.5)], None, tmp_path / "s.svg")
    texts = {e.text for e in parse(tmp_path / "s.svg").iter(NS + "text")}
    assert {X_LABEL, Y_LABEL} <= texts


def test_outlier_column(tmp_path):
    pairs = [pair(i, i / 3, 1 - i / 3) for i in range(4)]
    csv_path = emit_scatter(pairs, None, tmp_path / "s.svg", outliers=[2])
    with open(csv_path) as fh:
        assert [r["outlier"] for r in csv.DictReader(fh)] == ["0", "0", "1", "0"]


def test_byte_deterministic(tmp_path):
    pairs = [pair(i, i / 9, (i * 7 % 10) / 9) for i in range(10)]
    fit = fit_line([p.cot_norm for p in pairs], [p.lum_norm for p in pairs])
    assert render_svg(pairs, fit) == render_svg(list(pairs), fit)
    emit_scatter(pairs, fit, tmp_path / "a.svg")
    emit_scatter(pairs, fit, tmp_path / "b.svg")
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()
    assert (tmp_path / "a_points.csv").read_bytes() == (tmp_path / "b_points.csv").read_bytes()


def test_empty_rejected(tmp_path):
    with pytest.raises(HeliocotError):
        emit_scatter([], None, tmp_path / "s.svg")


def test_unwritable_path(tmp_path):
    with pytest.raises(OSError):
        emit_scatter([pair(0, 0.5, 0.5)], None, tmp_path / "missing" / "s.svg")
