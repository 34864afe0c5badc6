"""
Triangle area grows as the square of the phase
==============================================

Rotate the linear polarizer in front of the third pinhole and record the
area of the class-0 ridge triangles. Scaled by (2k/L)^2 S0 it traces
Delta3^2; the class-1 triangles shrink in step, so the square roots of the
two areas always add up to the same value.
"""

import math

import numpy as np

from ridgephase.config import RunConfig
from ridgephase.experiments import run_theta_sweep, sweep_criteria

# a coarser detector keeps this under a few seconds; RunConfig() alone is the full 640 x 480 run
cfg = RunConfig(nx=320, ny=240, dx=18e-6, dy=16e-6)
thetas = np.radians(np.arange(5, 180, 10))
records = run_theta_sweep(thetas, cfg, threads=0)

geom = cfg.geometry()
scale = (2 * cfg.wavenumber / cfg.distance) ** 2 * geom.area
print(" theta   Delta3   scaled S0   Delta3^2   sqrt S0 + sqrt S1 (um)")
for r in records:
    print(f"{r.theta_deg:6.1f} {r.delta3_phase_route:8.4f} {scale * r.area_n0:11.4f} "
          f"{r.delta3_analytic ** 2:10.4f} {1e6 * (math.sqrt(r.area_n0) + math.sqrt(r.area_n1)):10.3f}")

for c in sweep_criteria(records, cfg):
    print(c.line())

try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    d3 = np.array([r.delta3_phase_route for r in records])
    s0 = np.array([r.area_n0_normalized for r in records])
    fine = np.linspace(0, 2 * math.pi, 200)
    plt.plot(fine, (fine / d3.max()) ** 2, label="(Delta3 / max)^2")
    plt.plot(d3, s0, "o", label="measured S0 / max")
    plt.xlabel("Delta3 (rad)")
    plt.ylabel("normalized area")
    plt.legend()
    plt.show()
