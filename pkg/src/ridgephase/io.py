"""
On-disk formats.

PGM (binary, P5)
    Standard netpbm greyscale, maxval 255 (1 byte/pixel) or 65535
    (2 bytes/pixel, big-endian as netpbm requires). The first row written is
    the *top* of the detector (largest y), so image viewers show y upward.
    One comment line carries the grid metadata::

        # ridgephase L=<m> dx=<m> dy=<m> k=<rad/m> cx=<m> cy=<m>

    Values are Python float reprs; unknown values are written as ``nan``.

Interferogram CSV
    Header ``x,y,intensity`` then one row per pixel, row-major from pixel
    (0, 0) (lower-left).

Interferogram binary (``.rph``)
    All little-endian::

        offset  size  content
        0       8     magic b"RPHASE01"
        8       4     uint32 nx
        12      4     uint32 ny
        16      96    12 x float64: L, dx, dy, center_x, center_y,
                      wavenumber, a1x, a1y, a2x, a2y, a3x, a3y
        112     8*nx*ny  float64 samples, row-major, row 0 = lowest y

    Fields that are unknown are NaN (the pinhole block as a whole).

Ridge CSVs
    families: ``pair,k_x,k_y,delta,n_min,n_max``
    triangles: ``x1,y1,x2,y2,x3,y3,n,area,elemental``
"""
from __future__ import annotations

import math
import struct
from pathlib import Path
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .errors import FormatError
from .interferometer import Interferogram, ObservationGrid, PinholeGeometry, RasterImage
from .ridges import RidgeLineFamily, RidgeTriangle

MAGIC = b"RPHASE01"
_HEADER = struct.Struct("<8sII12d")


def _fmt(x: float) -> str:
    return repr(float(x))


def write_pgm(raster: RasterImage, path, wavenumber: float = float("nan")) -> Path:
    path = Path(path)
    g = raster.grid
    meta = (f"# ridgephase L={_fmt(g.L)} dx={_fmt(g.dx)} dy={_fmt(g.dy)} k={_fmt(wavenumber)} "
            f"cx={_fmt(g.center[0])} cy={_fmt(g.center[1])}")
    header = f"P5\n{meta}\n{g.nx} {g.ny}\n{raster.maxval}\n".encode("ascii")
    rows = np.flipud(raster.pixels)
    data = rows.astype(">u2" if raster.bit_depth == 16 else "u1").tobytes()
    path.write_bytes(header + data)
    return path


def _pgm_tokens(buf: bytes):
    """Split a P5 header into its four tokens; returns (tokens, comments, raster offset)."""
    pos, comments = 0, []
    tokens = []
    while len(tokens) < 4:
        while pos < len(buf) and buf[pos:pos + 1].isspace():
            pos += 1
        if pos >= len(buf):
            raise FormatError("truncated PGM header")
        if buf[pos:pos + 1] == b"#":
            end = buf.find(b"\n", pos)
            if end < 0:
                raise FormatError("truncated PGM comment")
            comments.append(buf[pos + 1:end].decode("ascii", "replace").strip())
            pos = end + 1
            continue
        start = pos
        while pos < len(buf) and not buf[pos:pos + 1].isspace():
            pos += 1
        tokens.append(buf[start:pos])
    # exactly one whitespace byte separates maxval from the raster
    return tokens, comments, pos + 1


def read_pgm(path) -> Tuple[RasterImage, float]:
    """Read a P5 file written by :func:`write_pgm`; returns (raster, wavenumber)."""
    buf = Path(path).read_bytes()
    if not buf.startswith(b"P5"):
        raise FormatError(f"{path}: not a binary PGM (P5) file")
    tokens, comments, start = _pgm_tokens(buf)
    try:
        nx, ny, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    except ValueError as exc:
        raise FormatError(f"{path}: bad PGM header") from exc
    if maxval not in (255, 65535):
        raise FormatError(f"{path}: unsupported maxval {maxval}")
    meta = {}
    for c in comments:
        if c.startswith("ridgephase"):
            for item in c.split()[1:]:
                key, _, val = item.partition("=")
                meta[key] = float(val)
    if not {"L", "dx", "dy"} <= meta.keys():
        raise FormatError(f"{path}: PGM lacks ridgephase grid metadata")
    width = 2 if maxval == 65535 else 1
    need = nx * ny * width
    raw = buf[start:start + need]
    if len(raw) != need:
        raise FormatError(f"{path}: truncated raster ({len(raw)} of {need} bytes)")
    pix = np.frombuffer(raw, dtype=">u2" if width == 2 else "u1").reshape(ny, nx)
    grid = ObservationGrid(meta["L"], nx, ny, meta["dx"], meta["dy"],
                           (meta.get("cx", 0.0), meta.get("cy", 0.0)))
    bit_depth = 16 if width == 2 else 8
    return RasterImage(grid, np.flipud(pix).astype(np.uint16 if width == 2 else np.uint8), bit_depth), \
        meta.get("k", float("nan"))


def write_interferogram_csv(img: Interferogram, path) -> Path:
    path = Path(path)
    X, Y = img.grid.mesh()
    with path.open("w", newline="") as fh:
        fh.write("x,y,intensity\n")
        for x, y, p in zip(X.ravel(), Y.ravel(), img.samples.ravel()):
            fh.write(f"{_fmt(x)},{_fmt(y)},{_fmt(p)}\n")
    return path


def write_interferogram_binary(img: Interferogram, path, wavenumber: float = float("nan"),
                               geom: Optional[PinholeGeometry] = None) -> Path:
    path = Path(path)
    g = img.grid
    pins = geom.positions.ravel().tolist() if geom is not None else [float("nan")] * 6
    head = _HEADER.pack(MAGIC, g.nx, g.ny, g.L, g.dx, g.dy, g.center[0], g.center[1],
                        float(wavenumber), *pins)
    path.write_bytes(head + img.samples.astype("<f8").tobytes())
    return path


def read_interferogram_binary(path) -> Tuple[Interferogram, float, Optional[PinholeGeometry]]:
    """
    Read an ``RPHASE01`` file.

    Returns
    -------
    img, wavenumber, geometry
        ``wavenumber`` is NaN and ``geometry`` None when not recorded.
    """
    buf = Path(path).read_bytes()
    if len(buf) < _HEADER.size:
        raise FormatError(f"{path}: truncated header ({len(buf)} bytes)")
    magic, nx, ny, *vals = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    L, dx, dy, cx, cy, k = vals[:6]
    need = _HEADER.size + 8 * nx * ny
    if len(buf) != need:
        raise FormatError(f"{path}: expected {need} bytes, found {len(buf)}")
    try:
        grid = ObservationGrid(L, nx, ny, dx, dy, (cx, cy))
    except ValueError as exc:
        raise FormatError(f"{path}: invalid grid metadata ({exc})") from exc
    samples = np.frombuffer(buf, dtype="<f8", offset=_HEADER.size).reshape(ny, nx).astype(float)
    pins = np.array(vals[6:]).reshape(3, 2)
    geom = None if np.any(np.isnan(pins)) else PinholeGeometry(pins)
    return Interferogram(grid, samples), k, geom


def write_families_csv(families: Iterable[Optional[RidgeLineFamily]], path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write("pair,k_x,k_y,delta,n_min,n_max\n")
        for f in families:
            if f is None:
                continue
            pair = f"{f.pair[0]}{f.pair[1]}" if f.pair else ""
            fh.write(f"{pair},{_fmt(f.k[0])},{_fmt(f.k[1])},{_fmt(f.delta)},{f.n_min},{f.n_max}\n")
    return path


def write_triangles_csv(triangles: Iterable[RidgeTriangle], path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write("x1,y1,x2,y2,x3,y3,n,area,elemental\n")
        for t in triangles:
            coords = ",".join(_fmt(v) for v in t.vertices.ravel())
            fh.write(f"{coords},{t.n},{_fmt(t.area)},{int(t.elemental)}\n")
    return path


def render_overlay(img: Interferogram, families: Sequence[Optional[RidgeLineFamily]],
                   triangles: Sequence[RidgeTriangle] = (), shade_class: int = 0) -> RasterImage:
    """
    8-bit picture of the interferogram with ridge lines drawn in white.

    The interferogram is dimmed to levels 0..191; ridge lines are 255 and
    elemental triangles of ``shade_class`` are filled at level 223.
    """
    grid = img.grid
    peak = float(img.samples.max())
    base = img.samples / peak * 191.0 if peak > 0 else np.zeros(grid.shape)
    out = base.copy()
    X, Y = grid.mesh()
    for t in triangles:
        if t.n != shade_class:
            continue
        a, b, c = t.vertices
        inside = _in_triangle(X, Y, a, b, c)
        out[inside] = 223.0
    half_width = 0.6 * max(grid.dx, grid.dy)
    for f in families:
        if f is None:
            continue
        phase = (f.k[0] * X + f.k[1] * Y - f.delta) / (2 * math.pi)
        dist = np.abs(phase - np.rint(phase)) * f.spacing
        out[dist <= half_width] = 255.0
    return RasterImage(grid, np.rint(out).astype(np.uint8), 8)


def _in_triangle(X, Y, a, b, c):
    def side(p, q):
        return (q[0] - p[0]) * (Y - p[1]) - (q[1] - p[1]) * (X - p[0])
    s1, s2, s3 = side(a, b), side(b, c), side(c, a)
    return ((s1 >= 0) & (s2 >= 0) & (s3 >= 0)) | ((s1 <= 0) & (s2 <= 0) & (s3 <= 0))
