"""A smooth-in-time rational approximation on a rotating ellipse.

Each node of a uniform time grid gets its own least-squares rational fit;
smooth bumps glue them together.  The partition weights are printed so the
overlap structure is visible.
"""

import numpy as np

from lagflow.flow import ellipse
from lagflow.runge import Disk, bump_partition, runge_approximate, time_varying_runge

R, err = runge_approximate(lambda z: 1 / (z - 2.0), Disk(0.0, 1.0), poles=[3.0], eps_target=1e-8)
print(f"1/(z-2) on the unit disk with a pole at 3: degree {R.poly.size - 1}, validated error {err:.1e}")

p = bump_partition((np.arange(4) + 0.5) / 4, 0.75 / 4)
print("\n  t     " + "".join(f"phi_{j + 1}    " for j in range(4)))
for t in np.linspace(0, 1, 9):
    print(f"{t:5.3f}  " + "".join(f"{v:8.5f} " for v in p(t)[:, 0]))

family = lambda t: ellipse(128, 1.0, 0.6, angle=np.pi * t)
f = lambda t, z: np.exp(z + 0.1 * t)
for eps in (1e-2, 1e-3):
    blend = time_varying_runge(f, family, eps=eps)
    print(f"\neps={eps:.0e}: {blend.info['n']} nodes, validated sup {blend.validated_sup:.2e}")
