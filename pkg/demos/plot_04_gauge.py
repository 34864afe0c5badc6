"""
A local phase moves the lattice but not its triangles
=====================================================

Add a phase beta behind one pinhole. Two of the three fringe families
shift, the third stays put, and every ridge triangle slides along the
unmoved family without changing shape: the area, and therefore Delta3,
is gauge invariant.
"""

import math

import numpy as np

from ridgephase.config import RunConfig
from ridgephase.experiments import gauge_criteria, run_gauge_shift

cfg = RunConfig()
records = run_gauge_shift([(1, b) for b in (0.5, 1.0, 2.0, 2 * math.pi)], cfg)

base = records[0]
print(f"baseline triangle: area {base.area:.6e} m^2, centroid "
      f"({1e3 * base.triangle_vertices[:, 0].mean():+.4f}, {1e3 * base.triangle_vertices[:, 1].mean():+.4f}) mm")
print(" beta    along (um)   perpendicular (um)   area change")
for r in records[1:]:
    print(f"{r.shift_value:5.2f} {1e6 * r.along:12.3f} {1e6 * r.perpendicular:18.3e} {r.area_deviation:14.2e}")

# the slide matches k12 . s = beta, k31 . s = -beta
geom = cfg.geometry()
k12 = geom.k_vector(1, 2, cfg.wavenumber, cfg.distance)
k31 = geom.k_vector(3, 1, cfg.wavenumber, cfg.distance)
s = np.linalg.solve(np.array([k12, k31]), np.array([1.0, -1.0]))
print(f"predicted slide per radian: {1e6 * np.linalg.norm(s):.3f} um")

for c in gauge_criteria(records):
    print(c.line())

try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    for r in records:
        v = np.vstack([r.triangle_vertices, r.triangle_vertices[:1]]) * 1e3
        plt.plot(v[:, 0], v[:, 1], label=r.label)
    plt.gca().set_aspect("equal")
    plt.xlabel("x (mm)")
    plt.ylabel("y (mm)")
    plt.legend()
    plt.show()
