"""
Polarization-state algebra for the three-pinhole interferometer.

Sign conventions
----------------
Jones vectors are written on the (|H>, |V>) basis.

Stokes coordinates (unit Poincare sphere)::

    s1 = |h|^2 - |v|^2        H (+1) / V (-1)
    s2 = 2 Re(conj(h) v)      diagonal (+1) / antidiagonal (-1)
    s3 = 2 Im(conj(h) v)      circular

With this choice (sqrt(3)|H> + i|V>)/2 sits at latitude +60 deg and
(i sqrt(3)|H> + |V>)/2 at latitude -60 deg, both on the prime meridian
(s2 = 0, s1 > 0), and cos(t)|H> + sin(t)|V> on the equator at longitude 2t.

Solid angles are oriented **clockwise-positive** as seen from outside the
sphere. Under this orientation the Pancharatnam phase of (a, b, c) equals
minus half the solid angle of the spherical triangle a -> b -> c, modulo 2 pi.

Canonical angles live in [0, 2 pi).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import DegenerateTriple

TWO_PI = 2.0 * math.pi

#: |<a|b>| at or below this makes the Bargmann phase meaningless.
DEGENERACY_TOL = 1e-9

_NORM_TOL = 1e-12


def canonical_angle(x):
    """Map an angle (or array of angles) into [0, 2 pi)."""
    y = np.mod(x, TWO_PI)
    # np.mod(-1e-17, 2pi) rounds to exactly 2pi
    y = np.where(y >= TWO_PI, 0.0, y)
    if np.ndim(y) == 0:
        return float(y)
    return y


def angle_difference(a, b):
    """Signed circular difference a - b wrapped into [-pi, pi)."""
    d = np.mod(np.asarray(a) - np.asarray(b) + math.pi, TWO_PI) - math.pi
    if np.ndim(d) == 0:
        return float(d)
    return d


@dataclass(frozen=True)
class JonesVector:
    """Unit-norm pure polarization state h|H> + v|V>."""

    h: complex
    v: complex

    def __post_init__(self):
        h, v = complex(self.h), complex(self.v)
        if not all(math.isfinite(t) for t in (h.real, h.imag, v.real, v.imag)):
            raise ValueError("Jones components must be finite")
        norm2 = abs(h) ** 2 + abs(v) ** 2
        if abs(norm2 - 1.0) > _NORM_TOL:
            raise ValueError(
                f"Jones vector must be unit norm (|h|^2+|v|^2 = {norm2!r}); "
                "use JonesVector.normalized()"
            )
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "v", v)

    @classmethod
    def normalized(cls, h, v) -> "JonesVector":
        n = math.sqrt(abs(complex(h)) ** 2 + abs(complex(v)) ** 2)
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(complex(h) / n, complex(v) / n)

    @property
    def array(self) -> np.ndarray:
        return np.array([self.h, self.v], dtype=complex)

    def with_phase(self, alpha: float) -> "JonesVector":
        """Same ray, multiplied by exp(i alpha)."""
        u = complex(math.cos(alpha), math.sin(alpha))
        return JonesVector(self.h * u, self.v * u)


H = JonesVector(1.0, 0.0)
V = JonesVector(0.0, 1.0)


@dataclass(frozen=True)
class StokesPoint:
    s1: float
    s2: float
    s3: float

    def __post_init__(self):
        r2 = self.s1 ** 2 + self.s2 ** 2 + self.s3 ** 2
        if abs(r2 - 1.0) > 1e-9:
            raise ValueError(f"Stokes point must lie on the unit sphere (|s|^2 = {r2!r})")

    @property
    def array(self) -> np.ndarray:
        return np.array([self.s1, self.s2, self.s3])

    @property
    def latitude(self) -> float:
        return math.asin(max(-1.0, min(1.0, self.s3)))

    @property
    def longitude(self) -> float:
        return math.atan2(self.s2, self.s1)


def inner_product(a: JonesVector, b: JonesVector) -> complex:
    """<a|b> = conj(a) . b"""
    return a.h.conjugate() * b.h + a.v.conjugate() * b.v


def visibility(a: JonesVector, b: JonesVector) -> float:
    """Two-beam fringe visibility |<a|b>|, clipped to [0, 1]."""
    return min(1.0, abs(inner_product(a, b)))


def bargmann_invariant(a: JonesVector, b: JonesVector, c: JonesVector) -> complex:
    return inner_product(a, b) * inner_product(b, c) * inner_product(c, a)


def pancharatnam_phase(a: JonesVector, b: JonesVector, c: JonesVector) -> float:
    """
    Phase of the three-vertex Bargmann invariant.

    Returns ``arg(<a|b><b|c><c|a>)`` in [0, 2 pi). The value does not depend
    on the U(1) phase chosen for any of the three states.

    Raises
    ------
    DegenerateTriple
        If any pairwise overlap has magnitude <= 1e-9.
    """
    pairs = (inner_product(a, b), inner_product(b, c), inner_product(c, a))
    for name, z in zip(("<a|b>", "<b|c>", "<c|a>"), pairs):
        if abs(z) <= DEGENERACY_TOL:
            raise DegenerateTriple(f"{name} = {z!r} is numerically zero; Bargmann phase undefined")
    prod = pairs[0] * pairs[1] * pairs[2]
    return canonical_angle(math.atan2(prod.imag, prod.real))


def to_stokes(a: JonesVector) -> StokesPoint:
    hv = a.h.conjugate() * a.v
    s = np.array([abs(a.h) ** 2 - abs(a.v) ** 2, 2.0 * hv.real, 2.0 * hv.imag])
    # renormalize away the 1e-12 slack allowed on Jones norms
    s /= np.linalg.norm(s)
    return StokesPoint(float(s[0]), float(s[1]), float(s[2]))


def spherical_triangle_solid_angle(p: StokesPoint, q: StokesPoint, r: StokesPoint) -> float:
    """
    Oriented solid angle of the geodesic triangle p -> q -> r.

    Uses the Van Oosterom-Strackee arctangent form,
    ``tan(W/2) = p.(q x r) / (1 + p.q + q.r + r.p)``, which stays accurate
    for small and near-hemispherical triangles. The sign is clockwise-positive
    seen from outside (see module docstring), and the result lies in
    (-2 pi, 2 pi].

    Raises
    ------
    DegenerateTriple
        If any two vertices are antipodal.
    """
    P, Q, R = p.array, q.array, r.array
    for (u, w) in ((P, Q), (Q, R), (R, P)):
        if float(u @ w) <= -1.0 + DEGENERACY_TOL:
            raise DegenerateTriple("antipodal vertices: geodesic triangle is undefined")
    num = float(P @ np.cross(Q, R))
    den = 1.0 + float(P @ Q) + float(Q @ R) + float(R @ P)
    return -2.0 * math.atan2(num, den)


def paper_states(theta: float) -> Tuple[JonesVector, JonesVector, JonesVector]:
    """
    States behind the left, right and upper pinholes of the reference setup.

    psi1 = (sqrt(3)|H> + i|V>)/2, psi2 = (i sqrt(3)|H> + |V>)/2,
    psi3 = cos(theta)|H> + sin(theta)|V>  (theta in radians).
    """
    s = math.sqrt(3.0) / 2.0
    psi1 = JonesVector(s, 0.5j)
    psi2 = JonesVector(1j * s, 0.5)
    psi3 = JonesVector(math.cos(theta), math.sin(theta))
    return psi1, psi2, psi3


def delta3_theory(theta):
    """
    Analytic Pancharatnam phase of the reference states at polarizer angle theta.

    Evaluated directly from the Bargmann product. For theta in [0, pi) this
    branch is continuous and increases monotonically from 0 towards 2 pi;
    it coincides with ``2 * atan2(sin theta, sqrt(3) cos theta)``.
    Array input is evaluated elementwise; results are canonical.
    """
    if np.ndim(theta) == 0:
        return pancharatnam_phase(*paper_states(float(theta)))
    thetas = np.asarray(theta, dtype=float)
    out = np.array([pancharatnam_phase(*paper_states(t)) for t in thetas.ravel()])
    return out.reshape(thetas.shape)


def delta3_unwrapped(thetas) -> np.ndarray:
    """Continuous branch of :func:`delta3_theory` along an ordered theta sweep."""
    vals = np.unwrap(np.atleast_1d(delta3_theory(np.asarray(thetas, dtype=float))))
    return vals - TWO_PI * math.floor(vals[0] / TWO_PI)
