"""Deterministic SVG scatter of normalized COT against luminance difference."""
from pathlib import Path

from .errors import HeliocotError
from .fileio import atomic_write_text, csv_text, fmt_float
from .times import format_utc

WIDTH = HEIGHT = 500
PLOT_LEFT, PLOT_TOP, PLOT_SIZE = 70.0, 30.0, 400.0
X_LABEL = "Normalized cloud optical thickness (MODIS)"
Y_LABEL = "Normalized luminance difference (sky camera)"
POINTS_HEADER = ("timestamp_utc", "cot_norm", "lum_norm", "cot_mean", "lum_diff_mean", "outlier")


def to_viewport(x, y):
    """Map normalized data coordinates to SVG user units (y grows downward)."""
    return PLOT_LEFT + PLOT_SIZE * x, PLOT_TOP + PLOT_SIZE * (1.0 - y)


def _n(v):
    return f"{v:.3f}"


def points_path(svg_path):
    svg_path = Path(svg_path)
    return svg_path.with_name(svg_path.stem + "_points.csv")


def render_svg(pairs, fit=None, outliers=()):
    outliers = set(outliers)
    x0, y0 = PLOT_LEFT, PLOT_TOP
    x1, y1 = PLOT_LEFT + PLOT_SIZE, PLOT_TOP + PLOT_SIZE
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        "<defs>",
        f'<clipPath id="plot-area"><rect x="{_n(x0)}" y="{_n(y0)}" width="{_n(PLOT_SIZE)}" height="{_n(PLOT_SIZE)}"/></clipPath>',
        "</defs>",
        '<rect x="0" y="0" width="100%" height="100%" fill="white"/>',
        f'<rect class="frame" x="{_n(x0)}" y="{_n(y0)}" width="{_n(PLOT_SIZE)}" height="{_n(PLOT_SIZE)}" '
        'fill="none" stroke="black"/>',
    ]
    for k in range(6):
        v = k / 5
        tx, ty = to_viewport(v, v)
        out.append(f'<line class="tick" x1="{_n(tx)}" y1="{_n(y1)}" x2="{_n(tx)}" y2="{_n(y1 + 5)}" stroke="black"/>')
        out.append(f'<text x="{_n(tx)}" y="{_n(y1 + 18)}" font-size="11" text-anchor="middle">{v:.1f}</text>')
        out.append(f'<line class="tick" x1="{_n(x0 - 5)}" y1="{_n(ty)}" x2="{_n(x0)}" y2="{_n(ty)}" stroke="black"/>')
        out.append(f'<text x="{_n(x0 - 8)}" y="{_n(ty + 4)}" font-size="11" text-anchor="end">{v:.1f}</text>')
    out.append(
        f'<text class="xlabel" x="{_n((x0 + x1) / 2)}" y="{_n(y1 + 40)}" font-size="13" '
        f'text-anchor="middle">{X_LABEL}</text>'
    )
    cy = (y0 + y1) / 2
    out.append(
        f'<text class="ylabel" x="20" y="{_n(cy)}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 20 {_n(cy)})">{Y_LABEL}</text>'
    )
    out.append('<g clip-path="url(#plot-area)">')
    for i, p in enumerate(pairs):
        px, py = to_viewport(p.cot_norm, p.lum_norm)
        cls, color = ("point outlier", "crimson") if i in outliers else ("point", "steelblue")
        out.append(f'<circle class="{cls}" cx="{_n(px)}" cy="{_n(py)}" r="3" fill="{color}"/>')
    if fit is not None:
        fx0, fy0 = to_viewport(0.0, fit.intercept)
        fx1, fy1 = to_viewport(1.0, fit.slope + fit.intercept)
        out.append(
            f'<line class="fit" x1="{_n(fx0)}" y1="{_n(fy0)}" x2="{_n(fx1)}" y2="{_n(fy1)}" '
            'stroke="black" stroke-dasharray="6 3"/>'
        )
    out.append("</g>")
    if fit is not None:
        out.append(
            f'<text class="legend" x="{_n(x1 - 5)}" y="{_n(y0 + 15)}" font-size="11" text-anchor="end">'
            f"y = {fit.slope:.3f} x + {fit.intercept:.3f}, r = {fit.r:.3f}, n = {fit.n}</text>"
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_scatter(pairs, fit, path, outliers=()):
    """Write the scatter SVG to ``path`` and its point table to ``<stem>_points.csv``.

    Returns the CSV path.
    """
    if not pairs:
        raise HeliocotError("no pairs to plot")
    if any(p.cot_norm is None or p.lum_norm is None for p in pairs):
        raise HeliocotError("pairs must be normalized before plotting")
    outliers = set(outliers)
    rows = [
        (format_utc(p.timestamp), fmt_float(p.cot_norm), fmt_float(p.lum_norm), fmt_float(p.cot_mean),
         fmt_float(p.lum_diff_mean), "1" if i in outliers else "0")
        for i, p in enumerate(pairs)
    ]
    csv_path = points_path(path)
    atomic_write_text(path, render_svg(pairs, fit, outliers))
    atomic_write_text(csv_path, csv_text(POINTS_HEADER, rows))
    return csv_path
