"""Closed-form geometry on the homogeneous models.

Round-trips exp/log, checks distances and compares quadrature volumes
against the radial density integrated by hand.

    python demos/geometry.py
"""

import numpy as np

from horolab import Hyperboloid, Sphere, catalog, integrals

rng = np.random.default_rng(7)

for m in (Hyperboloid(2), Hyperboloid(3), Sphere(2)):
    p = catalog.base_point(m)
    v = m.from_coefficients(p, rng.normal(size=m.dim))
    v = v.scaled(1.2 / m.norm(p, v))
    q = m.exp_map(p, v)
    back = m.log_map(p, q)
    print(
        f"{m.name:<12} |v|={m.norm(p, v):.3f}  d(p, exp v)={m.distance(p, q):.12f}"
        f"  |log - v|={np.linalg.norm(back.components - v.components):.2e}"
    )

print("\nball volumes, quadrature vs. closed form")
for m, r in ((Hyperboloid(2), 1.0), (Hyperboloid(3), 1.5), (Sphere(2), 2.0)):
    p = catalog.base_point(m)
    V = integrals.volume(m, p, r)
    if isinstance(m, Sphere):
        exact = 2 * np.pi * (1 - np.cos(r))
    elif m.dim == 2:
        exact = 2 * np.pi * (np.cosh(r) - 1)
    else:
        exact = np.pi * (np.sinh(2 * r) - 2 * r)
    print(f"{m.name:<12} r={r}  V={V:.12f}  exact={exact:.12f}  diff={abs(V - exact):.1e}")
