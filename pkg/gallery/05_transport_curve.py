"""Assemble a cut-off control potential on the unit disk and move a curve with it.

The potential switches on smoothly after t = eta and off before 1 - eta, so
the curve starts and ends at rest.  The flow is divergence free, so the
enclosed area is kept while the shape drifts; the pressure follows from
the potential.
"""

import numpy as np

from lagflow.disk import DiskGeometry
from lagflow.flow import advect, circle, curve_distance, disk_domain, enclosed_area, potential_field, pressure_from_potential
from lagflow.runge import assemble_control_potential, boundary_correction

geo = DiskGeometry(1.0, 0.3, (0.0, np.pi))
f = lambda t, z: 0.4 * np.exp(1j * np.pi * t) * (1 + 0.3 * z)

# flux of V_f off the control arc; zeta cancels it there
def normal_flux(t, th):
    w = f(t, np.exp(1j * th))
    return w.real * np.cos(th) - w.imag * np.sin(th)

zeta = boundary_correction(geo, normal_flux, t_grid=np.linspace(0, 1, 11), K=64, M=2048)
print(f"boundary correction: sup|zeta| / sup|data| = {zeta.constant:.3f}")

phi = assemble_control_potential(f, zeta, eta=0.1)
X = potential_field(phi.gradient)
c0 = circle(256, 0.15, (0.0, -0.2))
c = c0
for t0, t1 in zip(np.linspace(0, 1, 5)[:-1], np.linspace(0, 1, 5)[1:]):
    c = advect(c, X, t0, t1, 250, domain=disk_domain(0.999))
    print(f"t={t1:.2f}  area={enclosed_area(c):.8f}  distance from start={curve_distance(c, c0):.4f}")

print(f"relative area change: {abs(enclosed_area(c) - enclosed_area(c0)) / enclosed_area(c0):.2e}")
print(f"pressure at (0, -0.2), t=0.5: {pressure_from_potential(phi, (0.0, -0.2), 0.5):.6f}")
