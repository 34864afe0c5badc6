"""
Plain-text run configuration.

One ``key = value`` per line; ``#`` starts a comment. SI units throughout,
except that ``wavelength`` also accepts an ``nm`` suffix and angles in
``phases``/``gauge_shifts`` are radians while polarizer angles
(``paper:<deg>``, ``sweep_thetas``, ``gauge_theta``) are degrees, matching
how they are set on a rotation mount.

Keys::

    wavelength     = 532nm
    distance       = 2.0                       # L, meters
    pinhole1       = -7.5e-4, -4.330127e-4     # x, y in meters (any origin)
    pinhole2       = ...
    pinhole3       = ...
    nx, ny         = 640, 480                  # two separate keys
    dx, dy         = 9e-6, 8e-6
    center         = 0, 0
    states         = paper:90                  # or state1/state2/state3
    state1         = h_re, h_im, v_re, v_im
    phases         = 0, 0, 0
    model          = exact | paraxial
    noise_counts   = 1000                      # omit for a noiseless run
    noise_seed     = 0
    bit_depth      = 16
    output         = out
    sweep_thetas   = 0:175:5                   # start:stop:step or a list
    gauge_theta    = 90
    gauge_shifts   = 1:0.5, 1:1.0, 2:0.5       # pinhole:phase pairs
    validity_threshold = 0.1
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from .errors import ConfigError
from .interferometer import (
    PAPER_DISTANCE,
    PAPER_PITCH,
    PAPER_SHAPE,
    PAPER_WAVELENGTH,
    NoiseSpec,
    ObservationGrid,
    PinholeGeometry,
    SourceConfig,
    wavenumber_from_wavelength,
)
from .states import JonesVector, paper_states

log = logging.getLogger(__name__)

_PAPER_PINHOLES = tuple(tuple(p) for p in PinholeGeometry.equilateral().positions.tolist())
DEFAULT_SHIFTS = tuple((m, s) for m in (1, 2, 3) for s in (0.5, 1.0, 2.0))


@dataclass(frozen=True)
class RunConfig:
    wavelength: float = PAPER_WAVELENGTH
    distance: float = PAPER_DISTANCE
    pinholes: Tuple[Tuple[float, float], ...] = _PAPER_PINHOLES
    nx: int = PAPER_SHAPE[0]
    ny: int = PAPER_SHAPE[1]
    dx: float = PAPER_PITCH[0]
    dy: float = PAPER_PITCH[1]
    center: Tuple[float, float] = (0.0, 0.0)
    paper_theta: Optional[float] = 90.0
    states: Optional[Tuple[JonesVector, JonesVector, JonesVector]] = None
    phases: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    model: str = "exact"
    noise_counts: Optional[float] = None
    noise_seed: int = 0
    bit_depth: int = 16
    output: str = "out"
    sweep_thetas: Tuple[float, ...] = tuple(float(t) for t in range(0, 180, 5))
    gauge_theta: float = 90.0
    gauge_shifts: Tuple[Tuple[int, float], ...] = DEFAULT_SHIFTS
    validity_threshold: float = 0.1

    @property
    def wavenumber(self) -> float:
        return wavenumber_from_wavelength(self.wavelength)

    def geometry(self) -> PinholeGeometry:
        return PinholeGeometry(self.pinholes)

    def grid(self) -> ObservationGrid:
        return ObservationGrid(self.distance, self.nx, self.ny, self.dx, self.dy, self.center)

    def jones_states(self, theta_deg: Optional[float] = None):
        if theta_deg is not None:
            return paper_states(math.radians(theta_deg))
        if self.states is not None:
            return self.states
        return paper_states(math.radians(self.paper_theta))

    def source(self, theta_deg: Optional[float] = None, phases=None) -> SourceConfig:
        return SourceConfig(self.wavenumber, self.jones_states(theta_deg),
                            self.phases if phases is None else phases)

    def noise(self) -> Optional[NoiseSpec]:
        if self.noise_counts is None:
            return None
        return NoiseSpec(self.noise_counts, self.noise_seed)

    def with_(self, **changes) -> "RunConfig":
        return replace(self, **changes)


def _floats(text, n=None):
    parts = [p.strip() for p in text.split(",") if p.strip()]
    vals = [float(p) for p in parts]
    if n is not None and len(vals) != n:
        raise ValueError(f"expected {n} comma-separated numbers, got {len(vals)}")
    return vals


def _wavelength(text):
    t = text.strip().lower()
    if t.endswith("nm"):
        return float(t[:-2]) * 1e-9
    return float(t)


def _thetas(text):
    t = text.strip()
    if ":" in t and "," not in t:
        start, stop, step = (float(v) for v in t.split(":"))
        if step <= 0:
            raise ValueError("sweep step must be positive")
        return tuple(float(v) for v in np.arange(start, stop + step / 2, step))
    return tuple(_floats(t))


def _shifts(text):
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        pin, _, val = item.partition(":")
        m = int(pin)
        if m not in (1, 2, 3):
            raise ValueError(f"pinhole index {m} not in 1..3")
        out.append((m, float(val)))
    return tuple(out)


def _state(text):
    hr, hi, vr, vi = _floats(text, 4)
    h, v = complex(hr, hi), complex(vr, vi)
    norm = math.sqrt(abs(h) ** 2 + abs(v) ** 2)
    if abs(norm - 1.0) > 1e-3:
        log.warning("state (%s) has norm %.6g; normalizing", text.strip(), norm)
    if abs(norm * norm - 1.0) <= 1e-12:
        return JonesVector(h, v)
    return JonesVector.normalized(h, v)


def parse_config(text: str) -> RunConfig:
    """Parse configuration text; raises :class:`ConfigError` with line and key."""
    values = {}
    explicit = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError("expected 'key = value'", line=lineno)
        val = val.strip()
        try:
            if key == "wavelength":
                values[key] = _wavelength(val)
            elif key in ("distance", "dx", "dy", "validity_threshold"):
                values[key] = float(val)
            elif key in ("nx", "ny", "noise_seed", "bit_depth"):
                values[key] = int(val)
            elif key in ("pinhole1", "pinhole2", "pinhole3"):
                explicit[key] = tuple(_floats(val, 2))
            elif key == "center":
                values[key] = tuple(_floats(val, 2))
            elif key == "states":
                if not val.startswith("paper:"):
                    raise ValueError("use 'paper:<theta degrees>' or state1/state2/state3")
                values["paper_theta"] = float(val[len("paper:"):])
            elif key in ("state1", "state2", "state3"):
                explicit[key] = _state(val)
            elif key == "phases":
                values[key] = tuple(_floats(val, 3))
            elif key == "model":
                if val not in ("exact", "paraxial"):
                    raise ValueError("model must be 'exact' or 'paraxial'")
                values[key] = val
            elif key == "noise_counts":
                values[key] = None if val.lower() in ("", "none", "off") else float(val)
            elif key == "output":
                values[key] = val
            elif key == "sweep_thetas":
                values[key] = _thetas(val)
            elif key == "gauge_theta":
                values[key] = float(val)
            elif key == "gauge_shifts":
                values[key] = _shifts(val)
            else:
                raise ConfigError("unknown key", line=lineno, key=key)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc), line=lineno, key=key) from exc

    pins = [k for k in ("pinhole1", "pinhole2", "pinhole3") if k in explicit]
    if pins:
        if len(pins) != 3:
            raise ConfigError("pinhole1, pinhole2 and pinhole3 must be given together", key=pins[0])
        values["pinholes"] = tuple(explicit[k] for k in ("pinhole1", "pinhole2", "pinhole3"))
    sts = [k for k in ("state1", "state2", "state3") if k in explicit]
    if sts:
        if len(sts) != 3:
            raise ConfigError("state1, state2 and state3 must be given together", key=sts[0])
        if "paper_theta" in values:
            raise ConfigError("give either 'states = paper:...' or explicit states", key="states")
        values["states"] = tuple(explicit[k] for k in ("state1", "state2", "state3"))
        values["paper_theta"] = None

    cfg = RunConfig(**values)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    for key in ("wavelength", "distance", "dx", "dy", "validity_threshold"):
        if not getattr(cfg, key) > 0:
            raise ConfigError("must be positive", key=key)
    for key in ("nx", "ny"):
        if getattr(cfg, key) < 3:
            raise ConfigError("must be at least 3", key=key)
    if cfg.bit_depth not in (8, 16):
        raise ConfigError("must be 8 or 16", key="bit_depth")
    if cfg.noise_counts is not None and not cfg.noise_counts > 0:
        raise ConfigError("must be positive", key="noise_counts")


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def _c(z: complex) -> str:
    return f"{z.real!r}, {z.imag!r}"


def format_config(cfg: RunConfig) -> str:
    """Serialize so that ``parse_config(format_config(c)) == c``."""
    lines = [
        f"wavelength = {cfg.wavelength!r}",
        f"distance = {cfg.distance!r}",
    ]
    for i, (x, y) in enumerate(cfg.pinholes, start=1):
        lines.append(f"pinhole{i} = {float(x)!r}, {float(y)!r}")
    lines += [
        f"nx = {cfg.nx}",
        f"ny = {cfg.ny}",
        f"dx = {cfg.dx!r}",
        f"dy = {cfg.dy!r}",
        f"center = {cfg.center[0]!r}, {cfg.center[1]!r}",
    ]
    if cfg.states is not None:
        for i, s in enumerate(cfg.states, start=1):
            lines.append(f"state{i} = {_c(s.h)}, {_c(s.v)}")
    else:
        lines.append(f"states = paper:{cfg.paper_theta!r}")
    lines += [
        "phases = " + ", ".join(repr(float(p)) for p in cfg.phases),
        f"model = {cfg.model}",
    ]
    if cfg.noise_counts is not None:
        lines.append(f"noise_counts = {cfg.noise_counts!r}")
    lines += [
        f"noise_seed = {cfg.noise_seed}",
        f"bit_depth = {cfg.bit_depth}",
        f"output = {cfg.output}",
        "sweep_thetas = " + ", ".join(repr(float(t)) for t in cfg.sweep_thetas),
        f"gauge_theta = {cfg.gauge_theta!r}",
        "gauge_shifts = " + ", ".join(f"{m}:{float(s)!r}" for m, s in cfg.gauge_shifts),
        f"validity_threshold = {cfg.validity_threshold!r}",
    ]
    return "\n".join(lines) + "\n"
