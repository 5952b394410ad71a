"""Each identity checked once on a representative configuration.

python demos/identities_tour.py
"""

import numpy as np

from horolab import catalog, identities

H2 = catalog.get_manifold("hyperboloid2")
p = catalog.base_point(H2, [0.3, -0.2])
X = H2.from_coefficients(p, [1.0, 0.0])
u = catalog.get_field("busemann-exp", H2)
bump = catalog.bump_surface()
q = np.array([1.5, 0.0])
Y = bump.from_coefficients(q, [1.0, 0.0])
wave = catalog.get_field("wave-field", bump)

reports = [
    identities.lemma21_residual(H2, p, 1.0),
    identities.moving_ball_derivative_check(bump, wave, q, Y, 1.0),
    identities.prop31_residual(H2, u, p, X, 1.0),
    identities.constant_field_identity(bump, q, Y, 1.0),
    identities.gradient_bound_check(H2, u, p, 1.0),
    identities.hnorm_bound_check(bump, q, 1.0),
    identities.mvp_check(H2, u, p, 2.0),
]
for rep in reports:
    status = "ok  " if rep.passed else "FAIL"
    print(
        f"{status} {rep.identity.value:<18} {rep.context.manifold:<13} r={rep.context.r}"
        f"  rel={rep.rel_residual:.2e}  tol={rep.tolerance:.0e}"
    )
