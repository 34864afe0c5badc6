"""
Scripted reproductions: the polarizer-angle sweep and the local phase-shift test.

Both runners go through the same path as a measurement would: synthesize
an interferogram, optionally pass it through the detector model, and hand
only the pixels (plus known geometry and wavelength) to
:func:`ridgephase.ridges.extract`.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import io as rio
from .config import RunConfig
from .interferometer import (
    Interferogram,
    RasterImage,
    exact_intensity,
    paraxial_intensity,
    quantize,
)
from .ridges import Extraction, extract
from .states import TWO_PI, angle_difference, canonical_angle, delta3_theory

#: sweep points with Delta3 this close to 0 or 2 pi are excluded from the area checks
PHASE_MARGIN = 0.1


def synthesize(config: RunConfig, theta_deg: Optional[float] = None,
               phases=None) -> Tuple[Interferogram, RasterImage]:
    """
    Forward model plus detector.

    Returns the interferogram handed to extraction (relative intensities
    read back from the quantized raster) and the raster itself.
    """
    geom, grid = config.geometry(), config.grid()
    src = config.source(theta_deg, phases)
    model = exact_intensity if config.model == "exact" else paraxial_intensity
    ideal = model(geom, src, grid)
    raster = quantize(ideal, config.bit_depth, config.noise())
    return raster.to_interferogram(), raster


@dataclass
class SweepRecord:
    theta: float
    delta3_analytic: float
    area_n0: float
    area_n1: float
    area_n0_normalized: float
    delta3_area_route: float
    delta3_phase_route: float
    abs_error: float
    degenerate: bool = False
    extraction: Optional[Extraction] = field(default=None, repr=False, compare=False)
    raster: Optional[RasterImage] = field(default=None, repr=False, compare=False)

    @property
    def theta_deg(self) -> float:
        # rounded so that whole-degree inputs print as such after the radian trip
        return round(math.degrees(self.theta), 10)


def _sweep_point(config: RunConfig, theta: float):
    img, raster = synthesize(config, math.degrees(theta))
    ex = extract(img, config.geometry(), config.wavenumber)
    return ex, raster


def run_theta_sweep(thetas: Sequence[float], config: Optional[RunConfig] = None,
                    threads: int = 1) -> List[SweepRecord]:
    """
    Recover Delta3 at each polarizer angle (radians) of the reference states.

    Points are independent and may run on ``threads`` worker threads
    (0 = one per CPU); record order always follows ``thetas``. Degenerate
    lattices (Delta3 near 0 mod 2 pi) are kept and flagged. The n = 0 area
    is normalized by its maximum over the sweep.
    """
    config = config or RunConfig()
    thetas = [float(t) for t in thetas]
    workers = None if threads == 0 else max(1, threads)
    if workers == 1:
        results = [_sweep_point(config, t) for t in thetas]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda t: _sweep_point(config, t), thetas))

    records = []
    for theta, (ex, raster) in zip(thetas, results):
        analytic = delta3_theory(theta)
        records.append(SweepRecord(
            theta=theta,
            delta3_analytic=analytic,
            area_n0=ex.area_n0,
            area_n1=ex.area_n1,
            area_n0_normalized=float("nan"),
            delta3_area_route=ex.delta3_area,
            delta3_phase_route=ex.delta3_phase,
            abs_error=abs(angle_difference(ex.delta3_phase, analytic)),
            degenerate=ex.degenerate,
            extraction=ex,
            raster=raster,
        ))
    peak = max((r.area_n0 for r in records if np.isfinite(r.area_n0)), default=float("nan"))
    for r in records:
        r.area_n0_normalized = r.area_n0 / peak if peak > 0 else float("nan")
    return records


@dataclass
class GaugeRecord:
    shift_target: Optional[int]
    shift_value: float
    triangle_vertices: np.ndarray
    area: float
    displacement: np.ndarray
    area_deviation: float = 0.0
    along: float = 0.0
    perpendicular: float = 0.0
    spacing: float = float("nan")
    extraction: Optional[Extraction] = field(default=None, repr=False, compare=False)
    raster: Optional[RasterImage] = field(default=None, repr=False, compare=False)

    @property
    def label(self) -> str:
        if self.shift_target is None:
            return "baseline"
        return f"pin{self.shift_target}_{self.shift_value:+.4f}"


def _unaffected_family(ex: Extraction, target: int):
    """Ridge family of the pair that does not involve ``target``."""
    for fam in ex.families:
        if fam is not None and target not in fam.pair:
            return fam
    raise ValueError(f"no ridge family without pinhole {target}")


def run_gauge_shift(shifts: Sequence[Tuple[int, float]], config: Optional[RunConfig] = None,
                    theta: Optional[float] = None) -> List[GaugeRecord]:
    """
    Apply local phase shifts to single pinholes and track one n = 0 triangle.

    The baseline triangle is the n = 0 triangle closest to the grid center;
    in each shifted run the n = 0 triangle closest to the baseline centroid
    is taken as its image. ``along``/``perpendicular`` resolve the
    displacement against the ridge direction of the one family the shift
    cannot move (P23 for pinhole 1, and so on).

    Parameters
    ----------
    shifts : sequence of (pinhole, radians)
    theta : float, optional
        Polarizer angle in radians; defaults to ``config.gauge_theta``.
    """
    config = config or RunConfig()
    theta_deg = config.gauge_theta if theta is None else math.degrees(theta)
    geom = config.geometry()
    center = np.array(config.center, dtype=float)

    def run(phases):
        img, raster = synthesize(config, theta_deg, phases)
        return extract(img, geom, config.wavenumber), raster

    base_ex, base_raster = run(config.phases)
    base_tri = base_ex.triangle_near(center, 0)
    if base_tri is None:
        raise ValueError("no n = 0 ridge triangle inside the detector at the gauge angle")
    out = [GaugeRecord(None, 0.0, base_tri.vertices, base_tri.area, np.zeros(2),
                       extraction=base_ex, raster=base_raster)]
    for target, value in shifts:
        phases = list(config.phases)
        phases[target - 1] += value
        ex, raster = run(phases)
        tri = ex.triangle_near(base_tri.centroid, 0)
        disp = tri.centroid - base_tri.centroid
        fam = _unaffected_family(ex, target)
        along = float(disp @ fam.direction)
        perp = float(disp @ (fam.kvec / np.hypot(*fam.k)))
        out.append(GaugeRecord(
            target, float(value), tri.vertices, tri.area, disp,
            area_deviation=tri.area / base_tri.area - 1.0,
            along=along, perpendicular=perp, spacing=fam.spacing,
            extraction=ex, raster=raster,
        ))
    return out


# --------------------------------------------------------------------------
# reporting

@dataclass
class Criterion:
    name: str
    measured: float
    bound: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.measured) and self.measured < self.bound)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name} {self.measured:.6e} {self.bound:.6e}"


def sweep_criteria(records: Sequence[SweepRecord], config: RunConfig) -> List[Criterion]:
    """Quadratic law, normalized curve, route agreement and analytic agreement."""
    geom = config.geometry()
    k, L = config.wavenumber, config.distance
    scale = (2.0 * k / L) ** 2 * geom.area
    usable = [r for r in records
              if PHASE_MARGIN <= r.delta3_analytic <= TWO_PI - PHASE_MARGIN and not r.degenerate]
    quad = max((abs(scale * r.area_n0 / r.delta3_analytic ** 2 - 1.0) for r in usable), default=float("nan"))
    finite = [r for r in records if np.isfinite(r.area_n0_normalized)]
    top = max(finite, key=lambda r: r.area_n0, default=None)
    if top is not None and top.delta3_analytic > 0:
        curve = max(abs(r.area_n0_normalized - (r.delta3_analytic / top.delta3_analytic) ** 2)
                    for r in finite)
    else:
        curve = float("nan")
    routes = max((abs(angle_difference(r.delta3_area_route, r.delta3_phase_route)) / TWO_PI
                  for r in usable), default=float("nan"))
    analytic = max((r.abs_error / TWO_PI for r in usable), default=float("nan"))
    return [
        Criterion("quadratic_area_law_rel", quad, 0.01),
        Criterion("normalized_curve_residual", curve, 0.01),
        Criterion("route_agreement_frac_2pi", routes, 0.01),
        Criterion("analytic_agreement_frac_2pi", analytic, 0.01),
    ]


def gauge_criteria(records: Sequence[GaugeRecord]) -> List[Criterion]:
    shifted = [r for r in records if r.shift_target is not None]
    dev = max((abs(r.area_deviation) for r in shifted), default=float("nan"))
    perp = max((abs(r.perpendicular) / r.spacing for r in shifted), default=float("nan"))
    return [
        Criterion("gauge_area_deviation_rel", dev, 0.005),
        Criterion("gauge_perpendicular_frac_spacing", perp, 0.02),
    ]


def _f(x) -> str:
    return repr(float(x))


@dataclass
class Report:
    out_dir: Path
    files: List[Path]
    criteria: List[Criterion]
    runs: int

    @property
    def status(self) -> int:
        """0 when there were runs and every criterion passed, else 1."""
        return 0 if self.runs > 0 and all(c.passed for c in self.criteria) else 1


def emit_report(records, out_dir, config: Optional[RunConfig] = None) -> Report:
    """
    Write tables, images and a summary for sweep or gauge records.

    Layout (deterministic names)::

        sweep.csv | gauge.csv
        <tag>_interferogram.pgm    detector image
        <tag>_overlay.pgm          ridge lines over the image, n = 0 shaded
        <tag>_families.csv         ridge families
        <tag>_triangles.csv        elemental triangles
        summary.txt                "PASS|FAIL <name> <measured> <bound>" lines

    where <tag> is ``theta_<deg>`` (e.g. ``theta_090.00``) or
    ``gauge_<label>``.
    """
    config = config or RunConfig()
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    records = list(records)
    files: List[Path] = []
    crit: List[Criterion] = []

    def guarded(fn, path, *args, **kw):
        try:
            files.append(fn(*args, path, **kw))
        except OSError as exc:
            raise OSError(f"failed writing {path}: {exc}") from exc

    if records and isinstance(records[0], SweepRecord):
        table = out / "sweep.csv"
        rows = ["theta_deg,delta3_analytic,area_n0,area_n1,area_n0_normalized,"
                "delta3_area_route,delta3_phase_route,abs_error,degenerate"]
        for r in records:
            rows.append(",".join([_f(r.theta_deg), _f(r.delta3_analytic), _f(r.area_n0), _f(r.area_n1),
                                  _f(r.area_n0_normalized), _f(r.delta3_area_route),
                                  _f(r.delta3_phase_route), _f(r.abs_error), str(int(r.degenerate))]))
        guarded(lambda p: (p.write_text("\n".join(rows) + "\n"), p)[1], table)
        for r in records:
            _artifacts(out, f"theta_{r.theta_deg:06.2f}", r, config, guarded)
        crit = sweep_criteria(records, config)
        kind = "sweep"
    elif records:
        table = out / "gauge.csv"
        rows = ["shift_target,shift_value,x1,y1,x2,y2,x3,y3,area,dx,dy,area_deviation,along,perpendicular"]
        for r in records:
            verts = ",".join(_f(v) for v in np.asarray(r.triangle_vertices).ravel())
            rows.append(",".join([str(r.shift_target or 0), _f(r.shift_value), verts, _f(r.area),
                                  _f(r.displacement[0]), _f(r.displacement[1]), _f(r.area_deviation),
                                  _f(r.along), _f(r.perpendicular)]))
        guarded(lambda p: (p.write_text("\n".join(rows) + "\n"), p)[1], table)
        for r in records:
            _artifacts(out, f"gauge_{r.label}", r, config, guarded)
        crit = gauge_criteria(records)
        kind = "gauge"
    else:
        kind = "none"

    lines = [f"# ridgephase {kind} report: {len(records)} run(s)"]
    if not records:
        lines.append("# no runs recorded")
    lines += [c.line() for c in crit]
    summary = out / "summary.txt"
    guarded(lambda p: (p.write_text("\n".join(lines) + "\n"), p)[1], summary)
    return Report(out, files, crit, len(records))


def _artifacts(out: Path, tag: str, record, config: RunConfig, guarded):
    ex = record.extraction
    if record.raster is not None:
        guarded(rio.write_pgm, out / f"{tag}_interferogram.pgm", record.raster, wavenumber=config.wavenumber)
    if ex is None:
        return
    if record.raster is not None:
        overlay = rio.render_overlay(record.raster.to_interferogram(), ex.families, ex.triangles)
        guarded(rio.write_pgm, out / f"{tag}_overlay.pgm", overlay, wavenumber=config.wavenumber)
    guarded(rio.write_families_csv, out / f"{tag}_families.csv", ex.families)
    guarded(rio.write_triangles_csv, out / f"{tag}_triangles.csv", ex.triangles)
