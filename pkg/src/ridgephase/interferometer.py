"""
Forward model of the three-pinhole interferometer.

Coordinates
-----------
Pinholes sit in the source plane z = 0 and the detector in the plane z = L.
All transverse coordinates are measured from the optical axis through the
circumcenter of the pinhole triangle: pinhole positions supplied by the user
are recentered on construction, and ``ObservationGrid.center`` is an offset
from that axis.

Detector samples are stored row-major as ``samples[iy, ix]`` with x to the
right and y upward; pixel (0, 0) is the lower-left corner (smallest x and y).
Pixel centers are at ``center + ((ix - (nx-1)/2) dx, (iy - (ny-1)/2) dy)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .errors import BadPinholePair, CollinearPinholes, EmptyImage, GeometryOverlap
from .states import JonesVector, inner_product, paper_states

#: cyclic pinhole pairs, 1-based as in the physics literature
CYCLIC_PAIRS = ((1, 2), (2, 3), (3, 1))

PAPER_WAVELENGTH = 532e-9
PAPER_DISTANCE = 2.0
PAPER_SIDE = 1.5e-3
PAPER_SHAPE = (640, 480)
PAPER_PITCH = (9e-6, 8e-6)


def wavenumber_from_wavelength(wavelength: float) -> float:
    return 2.0 * math.pi / wavelength


def _cross2(u, v):
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def _third(i: int, j: int) -> int:
    if i == j or i not in (1, 2, 3) or j not in (1, 2, 3):
        raise BadPinholePair(f"pinhole pair ({i}, {j}) must be two distinct indices in 1..3")
    return 6 - i - j


class PinholeGeometry:
    """
    Three point sources in the source plane.

    Parameters
    ----------
    positions : array_like, shape (3, 2)
        Pinhole coordinates in meters, any origin. They are shifted so the
        circumcenter is at the origin; the shift is kept in ``circumcenter``.
    """

    def __init__(self, positions):
        pts = np.asarray(positions, dtype=float).reshape(3, 2)
        if not np.all(np.isfinite(pts)):
            raise CollinearPinholes("pinhole positions must be finite")
        doubled = float(_cross2(pts[1] - pts[0], pts[2] - pts[0]))
        scale = max(float(np.max(np.abs(pts - pts.mean(axis=0)))), 1e-300)
        if abs(doubled) <= 1e-12 * scale ** 2:
            raise CollinearPinholes(
                "pinholes are collinear: the three sources must span a triangle of nonzero area"
            )
        self.original = pts
        self.circumcenter = self._circumcenter(pts, doubled)
        self.positions = pts - self.circumcenter
        self.area = 0.5 * abs(doubled)
        self.orientation = 1 if doubled > 0 else -1

    @staticmethod
    def _circumcenter(pts, doubled):
        g = pts.mean(axis=0)
        (ax, ay), (bx, by), (cx, cy) = pts - g
        d = 2.0 * doubled
        a2, b2, c2 = ax * ax + ay * ay, bx * bx + by * by, cx * cx + cy * cy
        ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
        uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
        return g + np.array([ux, uy])

    @classmethod
    def equilateral(cls, side: float = PAPER_SIDE) -> "PinholeGeometry":
        """Left, right and upper pinholes of an equilateral triangle."""
        a = side / math.sqrt(3.0)
        ang = np.radians([210.0, 330.0, 90.0])
        return cls(np.column_stack([a * np.cos(ang), a * np.sin(ang)]))

    @property
    def circumradius(self) -> float:
        return float(np.mean(np.linalg.norm(self.positions, axis=1)))

    def position(self, i: int) -> np.ndarray:
        return self.positions[i - 1]

    def separation(self, i: int, j: int) -> float:
        _third(i, j)
        return float(np.linalg.norm(self.position(i) - self.position(j)))

    def k_vector(self, i: int, j: int, wavenumber: float, L: float) -> np.ndarray:
        """Fringe wavevector k (a_i - a_j) / L of pair (i, j), in rad/m."""
        _third(i, j)
        return wavenumber * (self.position(i) - self.position(j)) / L

    def k_vectors(self, wavenumber: float, L: float) -> np.ndarray:
        """Rows k12, k23, k31."""
        return np.array([self.k_vector(i, j, wavenumber, L) for i, j in CYCLIC_PAIRS])

    def b_vector(self, i: int) -> np.ndarray:
        """e_z x (a_j - a_k) with (i, j, k) cyclic; orthogonal to k_jk."""
        j, k = i % 3 + 1, (i + 1) % 3 + 1
        d = self.position(j) - self.position(k)
        return np.array([-d[1], d[0]])

    def b_vectors(self) -> np.ndarray:
        return np.array([self.b_vector(i) for i in (1, 2, 3)])

    def __repr__(self):
        return f"PinholeGeometry({self.positions.tolist()!r})"


@dataclass(frozen=True)
class SourceConfig:
    wavenumber: float
    states: Tuple[JonesVector, JonesVector, JonesVector]
    phases: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.wavenumber > 0:
            raise ValueError("wavenumber must be positive")
        if not self.amplitude > 0:
            raise ValueError("amplitude C must be positive")
        if len(self.states) != 3 or len(self.phases) != 3:
            raise ValueError("need exactly three states and three phases")
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))

    @classmethod
    def paper(cls, theta: float, wavelength: float = PAPER_WAVELENGTH, phases=(0.0, 0.0, 0.0)):
        return cls(wavenumber_from_wavelength(wavelength), paper_states(theta), phases)

    def with_phases(self, phases) -> "SourceConfig":
        return SourceConfig(self.wavenumber, self.states, tuple(phases), self.amplitude)

    def overlap(self, i: int, j: int) -> complex:
        return inner_product(self.states[i - 1], self.states[j - 1])


@dataclass(frozen=True)
class ObservationGrid:
    L: float
    nx: int
    ny: int
    dx: float
    dy: float
    center: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("observation distance L must be positive")
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grid needs at least 2 pixels along each axis")
        if not (self.dx > 0 and self.dy > 0):
            raise ValueError("pixel pitch must be positive")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    @classmethod
    def paper(cls, L: float = PAPER_DISTANCE) -> "ObservationGrid":
        return cls(L, PAPER_SHAPE[0], PAPER_SHAPE[1], PAPER_PITCH[0], PAPER_PITCH[1])

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def x(self) -> np.ndarray:
        return self.center[0] + (np.arange(self.nx) - (self.nx - 1) / 2.0) * self.dx

    @property
    def y(self) -> np.ndarray:
        return self.center[1] + (np.arange(self.ny) - (self.ny - 1) / 2.0) * self.dy

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.y)

    @property
    def extent(self) -> Tuple[float, float, float, float]:
        """(xmin, xmax, ymin, ymax) over pixel centers."""
        x, y = self.x, self.y
        return (x[0], x[-1], y[0], y[-1])

    def corners(self) -> np.ndarray:
        x0, x1, y0, y1 = self.extent
        return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])

    def with_distance(self, L: float) -> "ObservationGrid":
        return ObservationGrid(L, self.nx, self.ny, self.dx, self.dy, self.center)


@dataclass
class Interferogram:
    grid: ObservationGrid
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.shape != self.grid.shape:
            raise ValueError(f"samples shape {s.shape} does not match grid {self.grid.shape}")
        if np.any(s < 0):
            raise ValueError("intensity samples must be non-negative")
        self.samples = s


@dataclass(frozen=True)
class ValidityReport:
    scale: float
    near_ratio: float
    far_ratio: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.near_ratio < self.threshold and self.far_ratio < self.threshold

    def lines(self):
        return [
            f"(L^3/k)^(1/4) = {self.scale:.6e} m",
            f"max|r - a_j| / (L^3/k)^(1/4) = {self.near_ratio:.6e}",
            f"(L^3/k)^(1/4) / L = {self.far_ratio:.6e}",
            f"threshold = {self.threshold:g}",
            f"paraxial_valid = {'yes' if self.passed else 'no'}",
        ]


def exact_intensity(geom: PinholeGeometry, src: SourceConfig, grid: ObservationGrid) -> Interferogram:
    """
    Norm-squared of the superposed spherical waves, with no approximation.

    Each source contributes ``C exp(i(k |R - a_j| + phi_j)) / |R - a_j| psi_j``
    with the full Euclidean distance. The common factor exp(ikL) is dropped
    before summing; it does not change the intensity but keeps the phase
    arguments small.
    """
    X, Y = grid.mesh()
    L, k = grid.L, src.wavenumber
    field = np.zeros((2,) + grid.shape, dtype=complex)
    for j in range(3):
        ax, ay = geom.positions[j]
        rho2 = (X - ax) ** 2 + (Y - ay) ** 2
        dist = np.sqrt(rho2 + L * L)
        if float(dist.min()) < 1e-6:
            raise GeometryOverlap(f"observation point within 1 um of pinhole {j + 1}")
        # |R - a| - L, without cancellation
        excess = rho2 / (dist + L)
        wave = src.amplitude * np.exp(1j * (k * excess + src.phases[j])) / dist
        field[0] += wave * src.states[j].h
        field[1] += wave * src.states[j].v
    p = field.real ** 2 + field.imag ** 2
    return Interferogram(grid, p.sum(axis=0))


def _pair_term(geom, src, grid, i, j, X, Y):
    kij = geom.k_vector(i, j, src.wavenumber, grid.L)
    z = src.overlap(i, j)
    phi_ij = src.phases[i - 1] - src.phases[j - 1]
    arg = kij[0] * X + kij[1] * Y - phi_ij + math.atan2(z.imag, z.real)
    return 2.0 * (1.0 + min(1.0, abs(z)) * np.cos(arg))


def pair_fringe(geom: PinholeGeometry, src: SourceConfig, i: int, j: int,
                grid: ObservationGrid) -> Interferogram:
    """Two-beam fringe (C^2/L^2) P_ij seen with the remaining pinhole closed."""
    _third(i, j)
    X, Y = grid.mesh()
    scale = src.amplitude ** 2 / grid.L ** 2
    return Interferogram(grid, scale * _pair_term(geom, src, grid, i, j, X, Y))


def paraxial_intensity(geom: PinholeGeometry, src: SourceConfig, grid: ObservationGrid) -> Interferogram:
    """(C^2/L^2) (-3 + P12 + P23 + P31) in the paraxial far-field limit."""
    X, Y = grid.mesh()
    total = sum(_pair_term(geom, src, grid, i, j, X, Y) for i, j in CYCLIC_PAIRS) - 3.0
    p = (src.amplitude ** 2 / grid.L ** 2) * total
    return Interferogram(grid, np.clip(p, 0.0, None))


def check_paraxial_validity(geom: PinholeGeometry, grid: ObservationGrid, wavenumber: float,
                            threshold: float = 0.1) -> ValidityReport:
    """
    Margins of the condition |r - a_j| << (L^3/k)^(1/4) << L.

    ``near_ratio`` is the largest source-to-pixel transverse distance over
    (L^3/k)^(1/4); ``far_ratio`` is (L^3/k)^(1/4) / L. Both must fall below
    ``threshold`` for ``passed``.
    """
    scale = (grid.L ** 3 / wavenumber) ** 0.25
    corners = grid.corners()
    reach = max(float(np.max(np.linalg.norm(corners - a, axis=1))) for a in geom.positions)
    return ValidityReport(scale, reach / scale, scale / grid.L, threshold)


def relative_deviation(a: Interferogram, b: Interferogram) -> float:
    """max |a - b| / max |b|: the deviation of ``a`` measured on ``b``'s scale."""
    return float(np.max(np.abs(a.samples - b.samples)) / np.max(np.abs(b.samples)))


@dataclass(frozen=True)
class NoiseSpec:
    """Poisson shot noise at ``mean_counts`` expected photo-counts per pixel."""

    mean_counts: float
    seed: int = 0

    def __post_init__(self):
        if not self.mean_counts > 0:
            raise ValueError("mean_counts must be positive")


@dataclass
class RasterImage:
    grid: ObservationGrid
    pixels: np.ndarray
    bit_depth: int
    metadata: dict = field(default_factory=dict)

    @property
    def maxval(self) -> int:
        return (1 << self.bit_depth) - 1

    def to_interferogram(self) -> Interferogram:
        """Relative intensities in [0, 1]."""
        return Interferogram(self.grid, self.pixels.astype(float) / self.maxval)


def quantize(img: Interferogram, bit_depth: int = 16, noise: Optional[NoiseSpec] = None) -> RasterImage:
    """
    Detector capture: optional shot noise, then linear scaling to integer levels.

    With ``noise`` the expected counts per pixel are ``samples * mean_counts /
    mean(samples)`` and a Poisson draw from ``numpy.random.default_rng(seed)``
    replaces each. The (noisy) image is then scaled so its maximum maps to
    ``2**bit_depth - 1`` and rounded.
    """
    if bit_depth not in (8, 16):
        raise ValueError("bit_depth must be 8 or 16")
    data = np.asarray(img.samples, dtype=float)
    if not np.any(data > 0):
        raise EmptyImage("cannot quantize an all-zero interferogram")
    if noise is not None:
        rng = np.random.default_rng(noise.seed)
        data = rng.poisson(data * (noise.mean_counts / data.mean())).astype(float)
        if not np.any(data > 0):
            raise EmptyImage("no photo-counts recorded; raise mean_counts")
    maxval = (1 << bit_depth) - 1
    levels = np.rint(data * (maxval / data.max()))
    dtype = np.uint8 if bit_depth == 8 else np.uint16
    meta = {}
    if noise is not None:
        meta = {"mean_counts": noise.mean_counts, "seed": noise.seed}
    return RasterImage(img.grid, levels.astype(dtype), bit_depth, meta)
