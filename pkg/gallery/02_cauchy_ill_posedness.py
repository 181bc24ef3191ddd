"""Completing Cauchy data on a rectangle, and why it is ill posed.

Data (f0, g0) on the bottom edge determine a harmonic u only when the
weighted bracket series converges.  Consistent data give a clean solution;
a tiny perturbation of g0 is multiplied by roughly exp(k l2) in mode k.
The last part designs bottom-edge data that produce a prescribed flux on an
interior line and shows the price, exp(k lstar) / k.
"""

import numpy as np

from lagflow.cauchy import (
    BoundaryData,
    amplification_factor,
    compatibility,
    design_control_for_target,
    normal_derivative_at,
    solve_cauchy,
)
from lagflow.steklov import RectangleDomain

d = RectangleDomain(np.pi, 1.0, 0.5)
N = 20
k = np.arange(N + 1.0)
f = np.r_[0.0, 1.0 / k[1:] ** 2]
g = k * np.tanh(k) * f

u = solve_cauchy(BoundaryData("Gamma0", f), BoundaryData("Gamma0", g), d, N)
rep = compatibility(BoundaryData("Gamma0", f), BoundaryData("Gamma0", g), d)
print(f"consistent data: verdict={rep.verdict}, largest psi_1 weight={u.largest_coeff1:.2e}")

rng = np.random.default_rng(0)
for noise in (1e-12, 1e-8, 1e-4):
    gn = g + noise * rng.standard_normal(N + 1)
    un = solve_cauchy(BoundaryData("Gamma0", f), BoundaryData("Gamma0", gn), d, N)
    rn = compatibility(BoundaryData("Gamma0", f), BoundaryData("Gamma0", gn), d)
    print(
        f"noise {noise:.0e}: largest psi_1 weight={un.largest_coeff1:.2e}, "
        f"u(1, 1)={un(1.0, 1.0):+.3e}, verdict={rn.verdict}"
    )

print("\n k  amplification  exp(k lstar)  |f0| for unit target")
for kk in (2, 5, 10, 15, 20):
    target = BoundaryData.single_mode("GammaStar", kk)
    f0, g0, drep = design_control_for_target(target, d)
    back = normal_derivative_at(solve_cauchy(f0, g0, d, kk), 0.5).coeffs[kk]
    print(
        f"{kk:2d}  {amplification_factor(kk, d):13.6g}  {np.exp(0.5 * kk):12.6g}"
        f"  {drep.f0_norm:10.4g}   (flux recovered {back:.12f})"
    )
