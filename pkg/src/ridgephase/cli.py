"""
Command-line front end.

    ridgephase [--config PATH] [--out DIR] [--seed N] [--threads N] COMMAND

Commands: simulate, extract, sweep, gauge.

Exit codes: 0 ok, 1 report produced but a criterion failed or nothing ran,
2 configuration or usage error, 3 physics-domain error, 4 file-format
error, 5 internal error.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from . import io as rio
from .config import RunConfig, format_config, load_config
from .errors import ConfigError, FormatError, PhysicsDomainError
from .experiments import emit_report, run_gauge_shift, run_theta_sweep, synthesize
from .interferometer import check_paraxial_validity
from .ridges import extract

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_PHYSICS, EXIT_FORMAT, EXIT_INTERNAL = 0, 1, 2, 3, 4, 5

log = logging.getLogger("ridgephase")


def _global_flags(parser, suppress):
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", metavar="PATH", default=d,
                        help="key=value run configuration (defaults mirror the reference setup)")
    parser.add_argument("--out", metavar="DIR", default=d, help="output directory (overrides 'output')")
    parser.add_argument("--seed", metavar="N", type=int, default=d, help="noise seed (overrides 'noise_seed')")
    parser.add_argument("--threads", metavar="N", type=int, default=argparse.SUPPRESS if suppress else 1,
                        help="worker threads for sweeps, 0 = one per CPU (default 1)")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ridgephase",
        description="Three-pinhole interferometer: synthesize interferograms and read the "
                    "Pancharatnam phase off ridge-triangle areas.",
    )
    _global_flags(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    s = sub.add_parser("simulate", help="write an interferogram (PGM + binary) and a validity report")
    _global_flags(s, suppress=True)
    s.add_argument("--csv", action="store_true", help="also write the interferogram as x,y,intensity CSV")

    e = sub.add_parser("extract", help="recover ridge lines, triangles and Delta3 from an interferogram")
    _global_flags(e, suppress=True)
    e.add_argument("input", help="RPHASE01 binary (.rph) or P5 PGM written by 'simulate'")

    w = sub.add_parser("sweep", help="polarizer-angle sweep of the reference states")
    _global_flags(w, suppress=True)

    g = sub.add_parser("gauge", help="local phase-shift experiment at fixed polarizer angle")
    _global_flags(g, suppress=True)
    return p


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.out is not None:
        cfg = cfg.with_(output=args.out)
    if args.seed is not None:
        cfg = cfg.with_(noise_seed=args.seed)
    return cfg


def cmd_simulate(cfg: RunConfig, args) -> int:
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    geom = cfg.geometry()
    # the binary and CSV hold the detector readout, i.e. what extraction sees
    readout, raster = synthesize(cfg)
    rio.write_pgm(raster, out / "interferogram.pgm", wavenumber=cfg.wavenumber)
    rio.write_interferogram_binary(readout, out / "interferogram.rph", cfg.wavenumber, geom)
    if getattr(args, "csv", False):
        rio.write_interferogram_csv(readout, out / "interferogram.csv")
    report = check_paraxial_validity(geom, cfg.grid(), cfg.wavenumber, cfg.validity_threshold)
    (out / "validity.txt").write_text("\n".join(report.lines()) + "\n")
    (out / "config.txt").write_text(format_config(cfg))
    print(f"wrote {out / 'interferogram.pgm'} ({cfg.nx}x{cfg.ny}) and {out / 'interferogram.rph'}")
    return EXIT_OK


def _load_input(path: str):
    p = Path(path)
    try:
        head = p.read_bytes()[:8]
    except OSError as exc:
        raise FormatError(f"{p}: {exc.strerror}") from exc
    if head.startswith(b"P5"):
        raster, k = rio.read_pgm(p)
        return raster.to_interferogram(), k, None
    return rio.read_interferogram_binary(p)


def cmd_extract(cfg: RunConfig, args) -> int:
    img, k, geom = _load_input(args.input)
    if not math.isfinite(k):
        k = cfg.wavenumber
    if geom is None:
        geom = cfg.geometry()
    ex = extract(img, geom, k, on_zero="warn")
    for w in ex.warnings:
        print(f"warning: {w}", file=sys.stderr)
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    rio.write_families_csv(ex.families, out / "families.csv")
    rio.write_triangles_csv(ex.triangles, out / "triangles.csv")
    rio.write_pgm(rio.render_overlay(img, ex.families, ex.triangles), out / "overlay.pgm", wavenumber=k)
    lines = [
        f"delta3_phase_route {ex.delta3_phase!r}",
        f"delta3_area_route {ex.delta3_area!r}",
        f"area_n0 {ex.area_n0!r}",
        f"area_n1 {ex.area_n1!r}",
        "visibilities " + " ".join(repr(v) for v in ex.visibilities),
        f"degenerate {int(ex.degenerate)}",
    ] + [f"warning {w}" for w in ex.warnings]
    (out / "summary.txt").write_text("\n".join(lines) + "\n")
    print(f"Delta3 = {ex.delta3_phase:.6f} rad (phase route), {ex.delta3_area:.6f} rad (area route)")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, args) -> int:
    thetas = [math.radians(t) for t in cfg.sweep_thetas]
    records = run_theta_sweep(thetas, cfg, threads=args.threads)
    report = emit_report(records, cfg.output, cfg)
    for c in report.criteria:
        print(c.line())
    return EXIT_OK if report.status == 0 else EXIT_FAIL


def cmd_gauge(cfg: RunConfig, args) -> int:
    records = run_gauge_shift(cfg.gauge_shifts, cfg)
    report = emit_report(records, cfg.output, cfg)
    for c in report.criteria:
        print(c.line())
    return EXIT_OK if report.status == 0 else EXIT_FAIL


COMMANDS = {"simulate": cmd_simulate, "extract": cmd_extract, "sweep": cmd_sweep, "gauge": cmd_gauge}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    for name in ("config", "out", "seed"):
        if not hasattr(args, name):
            setattr(args, name, None)
    try:
        cfg = _config(args)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except PhysicsDomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error: %s", exc)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
