"""Geodesics on a conformal surface: integration, shooting and transport.

python demos/surfaces.py
"""

import numpy as np

from horolab import catalog, geodesics

s = catalog.bump_surface()
p = np.array([1.5, 0.0])
v = s.tangent(p, [0.0, 1.0])
v = v.scaled(1.0 / s.norm(p, v))

for n in (32, 64, 128):
    q = geodesics.exp_point(s, p, v.components, n_steps=n)
    print(f"exp_p(v) with {n:>3} steps: {q[0]:.12f}, {q[1]:.12f}")

q = geodesics.exp_point(s, p, v.components)
shot = geodesics.shoot_log(s, p, q)
print(
    f"\nshooting back to q: velocity {shot.velocity}, "
    f"{shot.iterations} Newton iterations, terminal error {shot.terminal_error:.1e}"
)
print(f"|shot - v| = {np.linalg.norm(shot.velocity - v.components):.2e}")

path = geodesics.integrate_geodesic(s, p, v.components, 1.0, 1 / 64)
w = geodesics.transport_along(s, path, v.components)
print(
    f"\nparallel transport of v along the geodesic keeps its length: "
    f"{s.norm(path.endpoint, w):.12f}"
)
for x in (0.0, 0.5, 1.5):
    print(
        f"Gauss curvature at ({x}, 0): {geodesics.gauss_curvature(s, np.array([x, 0.0])) + 0.0:+.6f}"
    )
