"""
Three polarization states and their Pancharatnam phase
=======================================================

Two fixed elliptical states sit at latitudes +60 and -60 degrees on the
Poincare sphere; the third is linear polarization at angle theta and runs
around the equator. The phase of the Bargmann product of the three is
minus half the solid angle they enclose.
"""

import math

import numpy as np

from ridgephase import (
    pancharatnam_phase,
    paper_states,
    spherical_triangle_solid_angle,
    to_stokes,
    visibility,
)

# the phase at theta = 90 deg: the product of overlaps is -1/8
psi = paper_states(math.pi / 2)
print("Delta3(90 deg) =", pancharatnam_phase(*psi))

# Stokes vectors of the three states
for name, s in zip(("psi1", "psi2", "psi3"), psi):
    p = to_stokes(s)
    print(f"{name}: S = ({p.s1:+.3f}, {p.s2:+.3f}, {p.s3:+.3f})  latitude {math.degrees(p.latitude):+.1f} deg")

# sweep theta: the phase climbs from 0 towards 2 pi, and equals -Omega/2
thetas = np.linspace(0, math.pi, 181)[:-1]
delta3 = np.array([pancharatnam_phase(*paper_states(t)) for t in thetas])
omega = np.array([spherical_triangle_solid_angle(*(to_stokes(s) for s in paper_states(t)))
                  for t in thetas])
gap = np.angle(np.exp(1j * (delta3 + omega / 2)))
print("max |Delta3 + Omega/2| (mod 2 pi):", np.abs(gap).max())

# fringe visibilities never drop below 1/2
vis = np.array([[visibility(a, b) for a, b in ((s[0], s[1]), (s[1], s[2]), (s[2], s[0]))]
                for s in map(paper_states, thetas)])
print("smallest visibility over the sweep:", vis.min())

try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.plot(np.degrees(thetas), delta3)
    ax1.set_xlabel("theta (deg)")
    ax1.set_ylabel("Delta3 (rad)")
    ax2.plot(np.degrees(thetas), vis)
    ax2.set_xlabel("theta (deg)")
    ax2.set_ylabel("visibility")
    ax2.legend(["P12", "P23", "P31"])
    fig.tight_layout()
    plt.show()
