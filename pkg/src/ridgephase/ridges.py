"""
Ridge-line extraction and ridge-triangle analysis.

A single interferogram holds three fringe families. Differentiating along
b_i = e_z x (a_j - a_k) kills the family whose wavevector is parallel to
a_j - a_k, so ``(b_i . grad)(b_j . grad) p`` leaves only the (i, j) family.
Its phase offset is read out by complex demodulation at the known carrier
k_ij, which places the ridge lines

    k_ij . r = delta_ij + 2 pi n_ij,     delta_ij = phi_ij - arg<psi_i|psi_j>.

Because k12 + k23 + k31 = 0, three ridge lines (one per family) bound a
triangle of area L^2 / (4 k^2 S0) * (Delta3 - 2 pi n)^2 with
n = n12 + n23 + n31, where S0 is the pinhole-triangle area. The triangles
with n = 0 and n = 1 are the elemental ones (no ridge line inside).

Region edges follow a closed-left / open-right rule: a point belongs to
the region [xmin, xmax) x [ymin, ymax), and a ridge line belongs to a
family's index range when its projection lies in [pmin, pmax).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateLattice, GridTooSmall, WindowTooSmall, ZeroAmplitude
from .interferometer import (
    CYCLIC_PAIRS,
    Interferogram,
    ObservationGrid,
    PinholeGeometry,
    _third,
)
from .states import TWO_PI, canonical_angle

#: triangles below (AREA_FRACTION * fringe spacing)^2 count as collapsed
AREA_FRACTION = 1e-4
#: |Delta3 mod 2pi| below this is a near-degenerate lattice
NEAR_DEGENERATE_PHASE = 1e-3


@dataclass
class FilteredField:
    grid: ObservationGrid
    samples: np.ndarray

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.shape != self.grid.shape:
            raise ValueError("samples shape does not match grid")


def directional_derivative(img, b) -> FilteredField:
    """
    Finite-difference derivative (b . grad) of a sampled field.

    Interior pixels use central differences, edge pixels one-sided ones
    (``numpy.gradient`` with ``edge_order=1``). ``b`` is taken as is, not
    normalized.
    """
    grid = img.grid
    if grid.nx < 3 or grid.ny < 3:
        raise GridTooSmall("directional derivative needs at least 3 samples per axis")
    d_dy, d_dx = np.gradient(img.samples, grid.dy, grid.dx, edge_order=1)
    return FilteredField(grid, b[0] * d_dx + b[1] * d_dy)


def derivative_response(b, q, grid: ObservationGrid) -> float:
    """
    Interior response of :func:`directional_derivative` to exp(i q.r), divided by i.

    Equals b . q up to the central-difference attenuation
    sin(q_x dx) / dx in place of q_x (and likewise in y).
    """
    return float(b[0] * math.sin(q[0] * grid.dx) / grid.dx + b[1] * math.sin(q[1] * grid.dy) / grid.dy)


def isolate_fringe(img: Interferogram, geom: PinholeGeometry, pair: Tuple[int, int]) -> FilteredField:
    """Apply (b_i . grad)(b_j . grad) to keep only the (i, j) fringe family."""
    i, j = pair
    _third(i, j)
    once = directional_derivative(img, geom.b_vector(i))
    return directional_derivative(once, geom.b_vector(j))


def fringe_gain(geom: PinholeGeometry, pair, wavenumber: float, grid: ObservationGrid) -> float:
    """
    Factor g with isolate_fringe(A cos(k_ij.r + c)) = g A cos(k_ij.r + c) in the interior.

    Positive for any non-degenerate pinhole triangle as long as the fringes
    are resolved by the pixel grid.
    """
    i, j = pair
    q = geom.k_vector(i, j, wavenumber, grid.L)
    return -derivative_response(geom.b_vector(i), q, grid) * derivative_response(geom.b_vector(j), q, grid)


@dataclass(frozen=True)
class Window:
    """Pixel rectangle ``samples[rows, cols]`` used for demodulation."""

    rows: slice
    cols: slice

    def mesh(self, grid: ObservationGrid):
        return np.meshgrid(grid.x[self.cols], grid.y[self.rows])


def default_window(grid: ObservationGrid, k, margin: int = 2) -> Window:
    """
    Largest centered rectangle holding a whole number of fringe periods.

    ``margin`` pixels are dropped on every side to avoid the one-sided
    boundary stencils. The period count is made whole along the axis with
    the larger carrier component.
    """
    ny, nx = grid.ny - 2 * margin, grid.nx - 2 * margin
    if nx < 1 or ny < 1:
        raise WindowTooSmall("grid is smaller than the demodulation margin")
    lengths = [nx, ny]
    per_pixel = (abs(k[0]) * grid.dx, abs(k[1]) * grid.dy)
    axis = 0 if per_pixel[0] >= per_pixel[1] else 1
    if per_pixel[axis] > 0:
        period = TWO_PI / per_pixel[axis]
        whole = math.floor(lengths[axis] / period)
        if whole >= 1:
            lengths[axis] = max(1, int(round(whole * period)))
    x0 = margin + (nx - lengths[0]) // 2
    y0 = margin + (ny - lengths[1]) // 2
    return Window(slice(y0, y0 + lengths[1]), slice(x0, x0 + lengths[0]))


def _fsum_complex(values: np.ndarray) -> complex:
    flat = values.ravel()
    return complex(math.fsum(flat.real), math.fsum(flat.imag))


def demodulate_phase(field: FilteredField, k, window: Optional[Window] = None,
                     min_relative_amplitude: float = 1e-6) -> Tuple[float, float]:
    """
    Phase offset and amplitude of the carrier ``k`` in a filtered field.

    Forms Z = sum f(r) exp(-i k.r) over the window and removes the leakage
    of the conjugate (-k) component, which the finite window does not
    cancel exactly: with G = sum exp(-2i k.r) and N pixels, the complex
    amplitude of f = Re(u exp(i k.r)) is

        u = 2 (N Z - G conj(Z)) / (N^2 - |G|^2).

    For f = A cos(k.r - c) this gives u = A exp(-ic) exactly, so the
    returned ``delta = canonical(-arg u)`` puts the maxima at
    k.r = delta (mod 2 pi).

    Sums use ``math.fsum`` in fixed row-major order, so the result is
    reproducible bit for bit.

    Returns
    -------
    delta : float
        Phase offset in [0, 2 pi).
    amplitude : float
        |u|, in the units of ``field``.

    Raises
    ------
    WindowTooSmall
        If the window spans fewer than two periods along ``k``.
    ZeroAmplitude
        If |u| / 2 is below ``min_relative_amplitude`` times the field RMS.
    """
    k = np.asarray(k, dtype=float)
    kn = float(np.hypot(k[0], k[1]))
    if kn == 0.0:
        raise ZeroAmplitude("carrier frequency is zero")
    grid = field.grid
    if window is None:
        window = default_window(grid, k)
    X, Y = window.mesh(grid)
    f = field.samples[window.rows, window.cols]
    if f.size == 0:
        raise WindowTooSmall("empty demodulation window")
    proj = (k[0] * X + k[1] * Y)
    periods = (float(proj.max()) - float(proj.min())) / TWO_PI
    if periods < 2.0:
        raise WindowTooSmall(f"window spans {periods:.2f} fringe periods along k; need at least 2")

    carrier = np.exp(-1j * proj)
    n = float(f.size)
    z = _fsum_complex(f * carrier)
    g = _fsum_complex(carrier * carrier)
    u = 2.0 * (n * z - g * z.conjugate()) / (n * n - abs(g) ** 2)

    rms = math.sqrt(math.fsum((f * f).ravel()) / n)
    amp = abs(u)
    if rms == 0.0 or amp / 2.0 < min_relative_amplitude * rms:
        raise ZeroAmplitude(f"no fringe at k = ({k[0]:.6g}, {k[1]:.6g}) rad/m")
    return canonical_angle(-math.atan2(u.imag, u.real)), amp


@dataclass(frozen=True)
class RidgeLineFamily:
    """Parallel ridge lines k . r = delta + 2 pi n for n_min <= n <= n_max."""

    k: Tuple[float, float]
    delta: float
    n_min: int
    n_max: int
    pair: Optional[Tuple[int, int]] = None

    @property
    def kvec(self) -> np.ndarray:
        return np.array(self.k, dtype=float)

    @property
    def spacing(self) -> float:
        return TWO_PI / float(np.hypot(*self.k))

    @property
    def direction(self) -> np.ndarray:
        """Unit vector along the lines."""
        kx, ky = self.k
        n = math.hypot(kx, ky)
        return np.array([-ky / n, kx / n])

    @property
    def indices(self) -> range:
        return range(self.n_min, self.n_max + 1)

    def __len__(self):
        return max(0, self.n_max - self.n_min + 1)

    def offset(self, n: int) -> float:
        return self.delta + TWO_PI * n

    def segment(self, n: int, region) -> Optional[np.ndarray]:
        """End points of line ``n`` clipped to ``region``, or None."""
        xmin, xmax, ymin, ymax = region
        k = self.kvec
        c = self.offset(n)
        foot = k * c / float(k @ k)
        d = self.direction
        lo, hi = -np.inf, np.inf
        for p0, dp, a, b in ((foot[0], d[0], xmin, xmax), (foot[1], d[1], ymin, ymax)):
            if abs(dp) < 1e-300:
                if not a <= p0 <= b:
                    return None
                continue
            t1, t2 = (a - p0) / dp, (b - p0) / dp
            lo, hi = max(lo, min(t1, t2)), min(hi, max(t1, t2))
        if lo > hi:
            return None
        return np.array([foot + lo * d, foot + hi * d])


def grid_region(grid: ObservationGrid) -> Tuple[float, float, float, float]:
    return tuple(float(v) for v in grid.extent)


def build_ridge_family(k, delta: float, grid, pair=None) -> RidgeLineFamily:
    """
    Ridge lines of carrier ``k`` and offset ``delta`` crossing a region.

    ``grid`` is an :class:`ObservationGrid` or a region tuple
    (xmin, xmax, ymin, ymax). Indices n with projection
    delta + 2 pi n in [pmin, pmax) are kept, where [pmin, pmax] is the range
    of k . r over the region corners.
    """
    region = grid_region(grid) if isinstance(grid, ObservationGrid) else tuple(grid)
    k = np.asarray(k, dtype=float)
    if not np.hypot(*k) > 0:
        raise ValueError("carrier wavevector must be nonzero")
    delta = canonical_angle(delta)
    xmin, xmax, ymin, ymax = region
    corners = np.array([[xmin, ymin], [xmax, ymin], [xmax, ymax], [xmin, ymax]])
    proj = corners @ k
    pmin, pmax = float(proj.min()), float(proj.max())
    n_min = math.ceil((pmin - delta) / TWO_PI)
    n_max = math.ceil((pmax - delta) / TWO_PI) - 1
    return RidgeLineFamily((float(k[0]), float(k[1])), delta, n_min, n_max, pair)


@dataclass(frozen=True)
class RidgeTriangle:
    vertices: np.ndarray
    n: int
    area: float
    elemental: bool
    indices: Tuple[int, int, int] = (0, 0, 0)

    @property
    def centroid(self) -> np.ndarray:
        return self.vertices.mean(axis=0)


def shoelace_area(vertices) -> float:
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)))


def intersect(k1, c1, k2, c2) -> np.ndarray:
    """Point r with k1 . r = c1 and k2 . r = c2."""
    det = k1[0] * k2[1] - k1[1] * k2[0]
    return np.array([(c1 * k2[1] - c2 * k1[1]) / det, (k1[0] * c2 - k2[0] * c1) / det])


def _inside(p, region) -> bool:
    xmin, xmax, ymin, ymax = region
    return xmin <= p[0] < xmax and ymin <= p[1] < ymax


def _crossed(family: RidgeLineFamily, vertices, own: int) -> bool:
    """True if some line of ``family`` other than ``own`` passes through the open interior."""
    proj = vertices @ family.kvec
    lo, hi = float(proj.min()), float(proj.max())
    tol = 1e-9 * TWO_PI
    first = math.ceil((lo + tol - family.delta) / TWO_PI)
    last = math.floor((hi - tol - family.delta) / TWO_PI)
    return any(m != own for m in range(first, last + 1))


def label_offset(f12: RidgeLineFamily, f23: RidgeLineFamily, f31: RidgeLineFamily) -> int:
    """
    Integer t such that n = n12 + n23 + n31 + t labels the area law.

    The three line offsets then sum to -(Delta3 - 2 pi n) with Delta3 taken
    in [0, 2 pi), whatever representation the deltas were stored in.
    """
    s = f12.delta + f23.delta + f31.delta
    d3 = canonical_angle(-s)
    return int(round((s + d3) / TWO_PI))


def triangle_from_indices(f12, f23, f31, n12, n23, n31, t=None) -> RidgeTriangle:
    if t is None:
        t = label_offset(f12, f23, f31)
    ks = (f12.kvec, f23.kvec, f31.kvec)
    cs = (f12.offset(n12), f23.offset(n23), f31.offset(n31))
    verts = np.array([
        intersect(ks[0], cs[0], ks[1], cs[1]),
        intersect(ks[1], cs[1], ks[2], cs[2]),
        intersect(ks[2], cs[2], ks[0], cs[0]),
    ])
    own = (n12, n23, n31)
    elemental = not any(_crossed(f, verts, m) for f, m in zip((f12, f23, f31), own))
    return RidgeTriangle(verts, n12 + n23 + n31 + t, shoelace_area(verts), elemental, own)


def elemental_triangles(f12: RidgeLineFamily, f23: RidgeLineFamily, f31: RidgeLineFamily,
                        region, classes: Sequence[int] = (0, 1)) -> List[RidgeTriangle]:
    """
    Ridge triangles of the requested n-classes lying inside ``region``.

    Every candidate bounded by one line of each family and labelled
    n in ``classes`` is built from exact line intersections; it is kept when
    all three vertices fall in the region and, for the default classes,
    when no other ridge line crosses its open interior.

    Raises
    ------
    DegenerateLattice
        When the n = 0 or n = 1 class has (nearly) zero area, i.e. Delta3
        is within 1e-3 rad of 0 mod 2 pi or a triangle falls below
        (1e-4 x fringe spacing)^2. The surviving triangles ride on the
        exception, collapsed ones included.
    """
    fams = (f12, f23, f31)
    if isinstance(region, ObservationGrid):
        region = grid_region(region)
    t = label_offset(f12, f23, f31)
    s = f12.delta + f23.delta + f31.delta
    delta3 = canonical_angle(-s)
    floor_area = (AREA_FRACTION * min(f.spacing for f in fams)) ** 2

    tris: List[RidgeTriangle] = []
    for n in classes:
        for n12 in range(f12.n_min - 1, f12.n_max + 2):
            for n23 in range(f23.n_min - 1, f23.n_max + 2):
                n31 = n - t - n12 - n23
                tri = triangle_from_indices(f12, f23, f31, n12, n23, n31, t)
                if all(_inside(p, region) for p in tri.vertices):
                    tris.append(tri)

    near = min(delta3, TWO_PI - delta3) < NEAR_DEGENERATE_PHASE
    collapsed = [tr for tr in tris if tr.area < floor_area]
    if tuple(classes) == (0, 1):
        tris = [tr for tr in tris if tr.elemental]
    if near or collapsed:
        raise DegenerateLattice(
            f"ridge lines nearly concurrent (Delta3 = {delta3:.3e} rad mod 2pi); "
            "one elemental class has collapsed",
            triangles=tris, delta3=delta3,
        )
    return tris


def class_area(triangles: Sequence[RidgeTriangle], n: int) -> float:
    """Mean area of the triangles labelled n (they are congruent); NaN if none."""
    areas = [t.area for t in triangles if t.n == n]
    return float(np.mean(areas)) if areas else float("nan")


def area_law(delta3: float, n: int, geom: PinholeGeometry, wavenumber: float, L: float) -> float:
    """L^2 / (4 k^2 S0) (Delta3 - 2 pi n)^2"""
    return L * L / (4.0 * wavenumber ** 2 * geom.area) * (delta3 - TWO_PI * n) ** 2


def recover_delta3(S: float, geom: PinholeGeometry, wavenumber: float, L: float, n: int = 0) -> float:
    """
    |Delta3 - 2 pi n| = (2k / L) sqrt(S S0) from a ridge-triangle area.

    For n = 0 this is Delta3 itself; for n = 1 it is 2 pi - Delta3.
    """
    if S < 0:
        raise ValueError("area must be non-negative")
    return 2.0 * wavenumber / L * math.sqrt(S * geom.area)


def delta3_from_phases(delta12: float, delta23: float, delta31: float) -> float:
    """Delta3 = -(delta12 + delta23 + delta31) mod 2 pi; the local phases cancel."""
    return canonical_angle(-(delta12 + delta23 + delta31))


@dataclass
class Extraction:
    """Everything recovered from one interferogram."""

    deltas: Tuple[float, float, float]
    amplitudes: Tuple[float, float, float]
    visibilities: Tuple[float, float, float]
    families: Tuple[Optional[RidgeLineFamily], ...]
    triangles: List[RidgeTriangle]
    delta3_phase: float
    delta3_area: float
    area_n0: float
    area_n1: float
    degenerate: bool = False
    warnings: List[str] = field(default_factory=list)

    def triangle_near(self, point, n: int = 0) -> Optional[RidgeTriangle]:
        cands = [t for t in self.triangles if t.n == n]
        if not cands:
            return None
        p = np.asarray(point, dtype=float)
        return min(cands, key=lambda t: float(np.hypot(*(t.centroid - p))))


def extract(img: Interferogram, geom: PinholeGeometry, wavenumber: float, *,
            min_visibility: float = 0.02, on_zero: str = "raise") -> Extraction:
    """
    Run the full single-shot pipeline on an interferogram.

    For each cyclic pair the fringe family is isolated by double directional
    differentiation, demodulated at its carrier, and turned into a ridge
    family. Elemental triangles of the resulting lattice give the area-route
    estimate of Delta3; the sum of the three offsets gives the phase-route
    estimate, which also fixes the n-labels.

    A fringe whose estimated visibility (demodulated amplitude over filter
    gain and mean intensity) is below ``min_visibility`` is treated as
    absent. With ``on_zero="raise"`` that raises :class:`ZeroAmplitude`
    naming the pair; with ``on_zero="warn"`` the pair is reported in
    ``warnings`` and the Delta3 estimates are NaN.
    """
    if on_zero not in ("raise", "warn"):
        raise ValueError("on_zero must be 'raise' or 'warn'")
    grid = img.grid
    region = grid_region(grid)
    deltas, amps, vis, fams, warns = [], [], [], [], []
    for pair in CYCLIC_PAIRS:
        k = geom.k_vector(*pair, wavenumber, grid.L)
        win = default_window(grid, k)
        filt = isolate_fringe(img, geom, pair)
        gain = fringe_gain(geom, pair, wavenumber, grid)
        mean_p = float(np.mean(img.samples[win.rows, win.cols]))
        try:
            delta, amp = demodulate_phase(filt, k, win)
            v = 1.5 * amp / (abs(gain) * mean_p) if mean_p > 0 else 0.0
            if v < min_visibility:
                raise ZeroAmplitude(f"visibility {v:.2e} below {min_visibility}", pair=pair)
        except ZeroAmplitude as exc:
            msg = f"fringe P{pair[0]}{pair[1]} has no measurable visibility ({exc})"
            if on_zero == "raise":
                raise ZeroAmplitude(msg, pair=pair) from exc
            warns.append(msg)
            deltas.append(float("nan")); amps.append(0.0); vis.append(0.0); fams.append(None)
            continue
        if gain < 0:
            delta = canonical_angle(delta + math.pi)
        deltas.append(delta)
        amps.append(amp)
        vis.append(min(v, 1.0))
        fams.append(build_ridge_family(k, delta, grid, pair))

    nan = float("nan")
    if any(f is None for f in fams):
        return Extraction(tuple(deltas), tuple(amps), tuple(vis), tuple(fams), [],
                          nan, nan, nan, nan, False, warns)

    d3_phase = delta3_from_phases(*deltas)
    degenerate = False
    try:
        tris = elemental_triangles(*fams, region=region)
    except DegenerateLattice as exc:
        tris = exc.triangles
        degenerate = True
        warns.append(str(exc))

    if degenerate and d3_phase > math.pi:
        # Delta3 ~ 2pi - eps is Delta3 ~ 0 seen from the other branch; report
        # the collapsed class as n = 0 either way
        tris = [replace(tr, n=1 - tr.n) for tr in tris]
    a0, a1 = class_area(tris, 0), class_area(tris, 1)
    if not math.isnan(a0):
        d3_area = recover_delta3(a0, geom, wavenumber, grid.L, 0)
    elif not math.isnan(a1):
        d3_area = canonical_angle(TWO_PI - recover_delta3(a1, geom, wavenumber, grid.L, 1))
    else:
        d3_area = nan
    return Extraction(tuple(deltas), tuple(amps), tuple(vis), tuple(fams), tris,
                      d3_phase, d3_area, a0, a1, degenerate, warns)
