"""``heliocot`` command-line driver.

Exit codes: 0 success, 1 validation or usage error, 2 I/O error.
"""
import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import clearsky, cot, imaging, pipeline, stats
from .config import CONFIG_ENV, PipelineConfig, load_config, with_overrides
from .errors import HeliocotError
from .fileio import atomic_write_text, csv_text, fmt_float
from .geometry import GeoLocation, solar_position
from .plot import emit_scatter
from .times import format_utc, parse_utc

log = logging.getLogger("heliocot")

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


class UsageError(HeliocotError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --- stages: each reads and writes files so run-all is their exact composition


def stage_luminance(cfg, images, out, sidecar=None, jobs=None, local_time=False):
    samples = imaging.extract_directory(
        images,
        cfg.site,
        cfg.require_camera(),
        radius_px=cfg.radius_px(),
        mask_saturated=cfg.mask_saturated,
        sidecar_path=sidecar,
        jobs=jobs,
        utc_offset_hours=cfg.utc_offset_hours if local_time else None,
    )
    imaging.write_luminance_csv(out, samples)
    return samples


def stage_clearsky(cfg, luminance, out):
    samples = imaging.read_luminance_csv(luminance)
    records = clearsky.irradiance_records([s.timestamp for s in samples], cfg.site, cfg.clear_sky)
    clearsky.write_irradiance_csv(out, records)
    return records


def stage_fit_map(cfg, luminance, irradiance, labels, out):
    pairs = pipeline.clear_fit_pairs(
        imaging.read_luminance_csv(luminance),
        clearsky.read_irradiance_csv(irradiance),
        clearsky.read_clear_labels(labels),
    )
    lmap = clearsky.fit_linear_map(pairs, intercept=cfg.fit_intercept)
    log.info("linear map: m=%g q=%g r2=%.6f n=%d", lmap.m, lmap.q, lmap.fit_r2, lmap.n)
    clearsky.write_map_csv(out, lmap)
    return lmap


def stage_cot(cfg, cot_csv, out):
    means = cot.grid_means(cot.parse_cot_csv(cot_csv), cfg.min_valid_cells)
    cot.write_cot_means(out, means)
    return means


def stage_align(cfg, luminance, irradiance, lmap_csv, cot_means, out, diff_out=None):
    diffs = pipeline.difference_series(
        imaging.read_luminance_csv(luminance),
        clearsky.read_irradiance_csv(irradiance),
        clearsky.read_map_csv(lmap_csv),
    )
    if diff_out is not None:
        pipeline.write_diff_csv(diff_out, diffs)
    pairs = pipeline.align(
        [(d.timestamp, d.lum_diff) for d in diffs],
        [(m.timestamp, m.cot_mean) for m in cot.read_cot_means(cot_means)],
        cfg.window_min,
        cfg.min_samples,
        cfg.window_anchor,
    )
    pairs = pipeline.normalize_pairs(pairs, cfg.normalization)
    pipeline.write_pairs_csv(out, pairs)
    return pairs


def correlation_report(pairs):
    """Normalized-space fit of luminance difference on COT plus supporting statistics."""
    xs = [p.cot_norm for p in pairs]
    ys = [p.lum_norm for p in pairs]
    fit = stats.fit_line(xs, ys)
    raw = stats.fit_line([p.cot_mean / 100.0 for p in pairs], [p.lum_diff_mean for p in pairs])
    outliers = stats.outlier_indices(xs, ys, fit)
    report = {
        "pearson_r": fit.r,
        "spearman_r": stats.spearman(xs, ys),
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r2": fit.r2,
        "n": fit.n,
        "outlier_indices": outliers,
        # luminance difference per unit of COT/100, in exposure-normalized units
        "raw_slope": raw.slope,
        "raw_intercept": raw.intercept,
    }
    return report, fit, outliers


def stage_correlate(cfg, pairs_csv, out_dir):
    pairs = pipeline.read_pairs_csv(pairs_csv)
    if any(p.cot_norm is None or p.lum_norm is None for p in pairs):
        pairs = pipeline.normalize_pairs(pairs, cfg.normalization)
    report, fit, outliers = correlation_report(pairs)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out_dir / "report.json", json.dumps(report, indent=2, sort_keys=True) + "\n")
    emit_scatter(pairs, fit, out_dir / "scatter.svg", outliers)
    return report


def run_all(cfg, images, cot_csv, labels, out_dir, sidecar=None, jobs=None, local_time=False):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stage_luminance(cfg, images, out / "luminance.csv", sidecar, jobs, local_time)
    stage_clearsky(cfg, out / "luminance.csv", out / "irradiance.csv")
    stage_fit_map(cfg, out / "luminance.csv", out / "irradiance.csv", labels, out / "clearsky_map.csv")
    stage_cot(cfg, cot_csv, out / "cot_mean.csv")
    stage_align(cfg, out / "luminance.csv", out / "irradiance.csv", out / "clearsky_map.csv",
                out / "cot_mean.csv", out / "aligned_pairs.csv")
    return stage_correlate(cfg, out / "aligned_pairs.csv", out)


# --- argument handling


def _add_common(p):
    p.add_argument("--config", metavar="PATH", help=f"TOML config (falls back to ${CONFIG_ENV})")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging on stderr")


def _add_align_flags(p):
    p.add_argument("--window", type=float, dest="window_min", help="window length in minutes (default 15)")
    p.add_argument("--window-anchor", choices=pipeline.ANCHORS)
    p.add_argument("--min-samples", type=int)
    p.add_argument("--normalization", choices=pipeline.NORMALIZATION_MODES)


def build_parser():
    parser = _Parser(prog="heliocot", description="COT vs. sky-camera luminance-difference pipeline")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solarpos", help="sun zenith/azimuth for instants at the site")
    _add_common(p)
    p.add_argument("--time", action="append", required=True, help="ISO-8601 instant; repeatable")
    p.add_argument("--lat", type=float)
    p.add_argument("--lon", type=float)
    p.add_argument("--local", action="store_true", help="read offset-less times as site local time")

    p = sub.add_parser("luminance", help="circumsolar luminance per image")
    _add_common(p)
    p.add_argument("--images", required=True)
    p.add_argument("--sidecar", help="exif.csv fallback (default: <images>/exif.csv if present)")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int)
    p.add_argument("--radius", type=float, dest="circumsolar_radius_px")
    p.add_argument("--local", action="store_true", help="read offset-less EXIF times as site local time")

    p = sub.add_parser("clearsky", help="clear-sky irradiance per luminance sample")
    _add_common(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("fit-map", help="fit the irradiance -> luminance linear map on clear frames")
    _add_common(p)
    p.add_argument("--luminance", required=True)
    p.add_argument("--irradiance", required=True)
    p.add_argument("--labels", required=True, help="CSV timestamp_utc,is_clear")
    p.add_argument("--out", required=True)
    p.add_argument("--no-intercept", action="store_true")

    p = sub.add_parser("cot", help="9-pixel COT means")
    _add_common(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--min-valid", type=int, dest="min_valid_cells")

    p = sub.add_parser("align", help="windowed luminance difference at COT timestamps")
    _add_common(p)
    p.add_argument("--luminance", required=True)
    p.add_argument("--irradiance", required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--cot", required=True, help="cot_mean.csv")
    p.add_argument("--out", required=True)
    p.add_argument("--diff-out", help="also write the per-frame difference series")
    _add_align_flags(p)

    p = sub.add_parser("correlate", help="regression, correlation and scatter plot")
    _add_common(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset with known truth")
    _add_common(p)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--days", type=int, default=30)
    p.add_argument("--size", type=int, default=1024, help="image width/height in pixels")
    p.add_argument("--noise", type=float, default=0.0, help="Gaussian pixel noise sigma (DN)")
    p.add_argument("--constant-cot", type=float)

    p = sub.add_parser("run-all", help="luminance -> clearsky -> fit-map -> cot -> align -> correlate")
    _add_common(p)
    p.add_argument("--images", required=True)
    p.add_argument("--sidecar")
    p.add_argument("--cot", required=True, help="COT grid CSV")
    p.add_argument("--labels", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--jobs", type=int)
    p.add_argument("--radius", type=float, dest="circumsolar_radius_px")
    p.add_argument("--min-valid", type=int, dest="min_valid_cells")
    p.add_argument("--no-intercept", action="store_true")
    p.add_argument("--local", action="store_true")
    _add_align_flags(p)
    return parser


def resolve_config(args):
    path = args.config or os.environ.get(CONFIG_ENV)
    cfg = load_config(path) if path else PipelineConfig()
    overrides = {
        k: getattr(args, k, None)
        for k in ("circumsolar_radius_px", "min_valid_cells", "window_min", "window_anchor", "min_samples",
                  "normalization")
    }
    if getattr(args, "no_intercept", False):
        overrides["fit_intercept"] = False
    return with_overrides(cfg, **overrides)


def _solarpos(cfg, args):
    site = cfg.site
    if args.lat is not None or args.lon is not None:
        site = GeoLocation(
            args.lat if args.lat is not None else site.latitude_deg,
            args.lon if args.lon is not None else site.longitude_deg,
        )
    offset = cfg.utc_offset_hours if args.local else None
    rows = []
    for text in args.time:
        t = parse_utc(text, offset)
        sp = solar_position(t, site)
        rows.append((format_utc(t), fmt_float(sp.zenith_deg), fmt_float(sp.azimuth_deg), fmt_float(sp.elevation_deg)))
    sys.stdout.write(csv_text(("timestamp_utc", "zenith_deg", "azimuth_deg", "elevation_deg"), rows))


def _synth(cfg, args):
    from .geometry import CameraModel
    from .synth import SynthConfig, synth_dataset

    size = args.size
    cam = CameraModel(size, size, (size - 1) / 2, (size - 1) / 2, 0.48 * size)
    scfg = SynthConfig(seed=args.seed, site=cfg.site, camera=cam, clear_sky=cfg.clear_sky, n_days=args.days,
                       noise_sigma=args.noise, constant_cot=args.constant_cot)
    truth = synth_dataset(scfg, args.out)
    print(f"{len(truth.frames)} frames, {len(truth.overpasses)} overpasses written to {args.out}")


def dispatch(args):
    cfg = resolve_config(args)
    cmd = args.command
    if cmd == "solarpos":
        _solarpos(cfg, args)
    elif cmd == "luminance":
        stage_luminance(cfg, args.images, args.out, args.sidecar, args.jobs, args.local)
    elif cmd == "clearsky":
        stage_clearsky(cfg, args.input, args.out)
    elif cmd == "fit-map":
        stage_fit_map(cfg, args.luminance, args.irradiance, args.labels, args.out)
    elif cmd == "cot":
        stage_cot(cfg, args.input, args.out)
    elif cmd == "align":
        stage_align(cfg, args.luminance, args.irradiance, args.map, args.cot, args.out, args.diff_out)
    elif cmd == "correlate":
        stage_correlate(cfg, args.input, args.out_dir)
    elif cmd == "synth":
        _synth(cfg, args)
    elif cmd == "run-all":
        run_all(cfg, args.images, args.cot, args.labels, args.out_dir, args.sidecar, args.jobs, args.local)


def main(argv=None):
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(getattr(args, "verbose", 0), 2)]
        logging.getLogger("heliocot").setLevel(level)
        dispatch(args)
    except HeliocotError as exc:
        print(f"heliocot: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"heliocot: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
