"""Steklov eigenvalues of a rectangle, and how the Robin family interpolates.

The bottom family grows like k tanh(k l2), the top family like k coth(k l2);
their product is exactly k^2.  Moving the lateral parameter alpha from 1
(Neumann) down to 0 (Dirichlet) slides every transverse frequency up by
about one index.
"""

import numpy as np

from lagflow.steklov import NEUMANN, LateralCondition, RectangleDomain, eigenvalue, robin_spectrum

d = RectangleDomain(np.pi, 1.0)
print(" k   mu_0k        mu_1k        mu_0k*mu_1k")
for k in range(0, 7):
    m0, m1 = eigenvalue(d, NEUMANN, 0, k), eigenvalue(d, NEUMANN, 1, k)
    print(f"{k:2d}  {m0:11.8f}  {m1:11.8f}  {m0 * m1:11.6f}")

print("\nthin strips pull mu_0k towards 0 and mu_1k towards infinity:")
for l2 in (2.0, 0.5, 0.1):
    dd = RectangleDomain(np.pi, l2)
    print(f"  l2={l2:4.1f}  mu_01={eigenvalue(dd, NEUMANN, 0, 1):.5f}  mu_11={eigenvalue(dd, NEUMANN, 1, 1):.5f}")

print("\nfirst transverse eigenvalues of -d2/dx2 with Robin ends on (0, pi):")
for alpha in (1.0 - 1e-9, 0.9, 0.5, 0.1, 1e-9):
    lam = robin_spectrum(np.pi, alpha, 5).lambdas
    print(f"  alpha={alpha:<12.9g}" + "".join(f"{v:9.4f}" for v in lam))

lat = LateralCondition.robin(0.5)
print("\nRobin Steklov pair at alpha=0.5, k=2:", eigenvalue(d, lat, 0, 2), eigenvalue(d, lat, 1, 2))
