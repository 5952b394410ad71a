"""Named manifolds and test fields shipped with the laboratory."""

from __future__ import annotations

import numpy as np

from .errors import UsageError
from .identities import ScalarField
from .manifolds import (
    ConformalFactor,
    ConformalSurface,
    Euclidean,
    Hyperboloid,
    Sphere,
    lorentz,
)

WORKING_RADIUS = 6.0

SUITES = (
    "lemma21",
    "moving-ball",
    "prop31",
    "constant-identity",
    "gradient-bound",
    "hnorm-bound",
    "kinfty",
    "mvp-check",
)


# -- conformal factors ----------------------------------------------------


def bump_factor(a=0.2, s=1.5):
    """``lam = a exp(-(x^2 + y^2) / s^2)``."""
    s2 = s * s

    def lam(x, y):
        return a * np.exp(-(x * x + y * y) / s2)

    def grad(x, y):
        e = lam(x, y)
        return -2.0 * x / s2 * e, -2.0 * y / s2 * e

    def laplacian(x, y):
        r2 = x * x + y * y
        return lam(x, y) * (4.0 * r2 / s2**2 - 4.0 / s2)

    def jet(x, y):
        r2 = x * x + y * y
        e = a * np.exp(-r2 / s2)
        return e, -2.0 * x / s2 * e, -2.0 * y / s2 * e, e * (4.0 * r2 / s2**2 - 4.0 / s2)

    return ConformalFactor(lam, grad, laplacian, jet)


def wave_factor(amp=0.1):
    """``lam = amp sin(x) sin(y)``."""

    def lam(x, y):
        return amp * np.sin(x) * np.sin(y)

    def grad(x, y):
        return amp * np.cos(x) * np.sin(y), amp * np.sin(x) * np.cos(y)

    def laplacian(x, y):
        return -2.0 * amp * np.sin(x) * np.sin(y)

    def jet(x, y):
        sx, cx, sy, cy = np.sin(x), np.cos(x), np.sin(y), np.cos(y)
        v = amp * sx * sy
        return v, amp * cx * sy, amp * sx * cy, -2.0 * v

    return ConformalFactor(lam, grad, laplacian, jet)


def disk_factor():
    """Poincare disk: ``lam = log(2 / (1 - x^2 - y^2))`` (curvature -1)."""

    def lam(x, y):
        return np.log(2.0 / (1.0 - x * x - y * y))

    def grad(x, y):
        d = 1.0 - x * x - y * y
        return 2.0 * x / d, 2.0 * y / d

    def laplacian(x, y):
        d = 1.0 - x * x - y * y
        return 4.0 / (d * d)

    def jet(x, y):
        d = 1.0 - x * x - y * y
        return np.log(2.0 / d), 2.0 * x / d, 2.0 * y / d, 4.0 / (d * d)

    return ConformalFactor(lam, grad, laplacian, jet)


def flat_factor():
    def jet(x, y):
        z = np.zeros(np.broadcast(x, y).shape)
        return z, z, z, z

    return ConformalFactor(
        lambda x, y: np.zeros(np.broadcast(x, y).shape),
        lambda x, y: (np.zeros(np.broadcast(x, y).shape),) * 2,
        lambda x, y: np.zeros(np.broadcast(x, y).shape),
        jet,
    )


def bump_surface(a=0.2, s=1.5):
    return ConformalSurface(bump_factor(a, s), name="bump-surface", domain_radius=WORKING_RADIUS)


def wave_surface(amp=0.1):
    return ConformalSurface(wave_factor(amp), name="wave-surface", domain_radius=WORKING_RADIUS)


def flat_surface():
    return ConformalSurface(flat_factor(), name="flat-surface", domain_radius=WORKING_RADIUS)


def poincare_disk():
    return ConformalSurface(disk_factor(), name="poincare-disk", chart_radius=1.0)


def disk_to_hyperboloid(z):
    """Chart isometry from the Poincare disk onto the hyperboloid."""
    z = np.asarray(z, dtype=float)
    r2 = z @ z
    return np.concatenate([[1.0 + r2], 2.0 * z]) / (1.0 - r2)


def disk_vector_to_hyperboloid(z, v):
    """Differential of :func:`disk_to_hyperboloid` at ``z`` applied to ``v``."""
    z = np.asarray(z, dtype=float)
    v = np.asarray(v, dtype=float)
    d = 1.0 - z @ z
    zv = z @ v
    return np.concatenate([[4.0 * zv / d**2], 2.0 * v / d + 4.0 * z * zv / d**2])


MANIFOLDS = {
    "euclidean2": lambda: Euclidean(2, name="euclidean2"),
    "euclidean3": lambda: Euclidean(3, name="euclidean3"),
    "hyperboloid2": lambda: Hyperboloid(2, name="hyperboloid2"),
    "hyperboloid3": lambda: Hyperboloid(3, name="hyperboloid3"),
    "sphere2": lambda: Sphere(2, name="sphere2"),
    "bump-surface": bump_surface,
    "wave-surface": wave_surface,
}


def get_manifold(name, **params):
    try:
        factory = MANIFOLDS[name]
    except KeyError:
        raise UsageError(f"unknown manifold {name!r}; known: {', '.join(MANIFOLDS)}") from None
    return factory(**params)


def base_point(m, coords=None):
    """Point of ``m`` from user coordinates; ``None`` gives the model's origin.

    Hyperboloid points may be given by their ``dim`` spatial coordinates.
    """
    if coords is None:
        if isinstance(m, Hyperboloid):
            return m.origin()
        if isinstance(m, Sphere):
            return np.eye(m.dim + 1)[-1]
        return np.zeros(m.dim)
    coords = np.asarray(coords, dtype=float)
    if isinstance(m, Hyperboloid) and coords.shape == (m.dim,):
        coords = Hyperboloid.lift(coords)
    return m.check_point(coords)


# -- fields ---------------------------------------------------------------


def spatial(m, pts):
    """Coordinates the catalog fields are written in.

    Chart coordinates for flat and conformal models, ambient coordinates
    with the distinguished axis dropped for the hyperboloid (``x0``) and the
    sphere (last axis, the pole of :func:`base_point`).
    """
    pts = np.asarray(pts, dtype=float)
    if isinstance(m, Hyperboloid):
        return pts[..., 1:]
    if isinstance(m, Sphere):
        return pts[..., :-1]
    return pts


def coordinate_bound(m):
    """Sup of ``|x_i|`` for the coordinates of :func:`spatial` over the working domain.

    The working domain is the chart disk of radius ``WORKING_RADIUS`` for flat
    and conformal models, the geodesic ball of that radius about the origin
    for the hyperboloid, and the whole sphere.
    """
    if isinstance(m, Hyperboloid):
        return float(np.sinh(WORKING_RADIUS))
    if isinstance(m, Sphere):
        return 1.0
    return WORKING_RADIUS


def _ambient_derivative(m, p, X):
    return np.asarray(X.components if hasattr(X, "components") else X, dtype=float)


def _spatial_derivative(m, p, X):
    comps = _ambient_derivative(m, p, X)
    if isinstance(m, Hyperboloid):
        return comps[1:]
    if isinstance(m, Sphere):
        return comps[:-1]
    return comps


def _constant(m, c=2.5):
    return ScalarField(
        name="constant",
        evaluate=lambda pts: np.full(np.shape(pts)[:-1], c),
        sup_bound=abs(c),
        directional_derivative=lambda p, X: 0.0,
        claims_mvp=True,
    )


def _linear_x(m):
    return ScalarField(
        name="linear-x",
        evaluate=lambda pts: spatial(m, pts)[..., 0],
        sup_bound=coordinate_bound(m),
        directional_derivative=lambda p, X: float(_spatial_derivative(m, p, X)[0]),
        claims_mvp=isinstance(m, Euclidean),
    )


def _saddle(m):
    def evaluate(pts):
        c = spatial(m, pts)
        return c[..., 0] ** 2 - c[..., 1] ** 2

    def derivative(p, X):
        c = spatial(m, p)
        d = _spatial_derivative(m, p, X)
        return float(2.0 * c[0] * d[0] - 2.0 * c[1] * d[1])

    return ScalarField(
        name="saddle",
        evaluate=evaluate,
        sup_bound=coordinate_bound(m) ** 2,
        directional_derivative=derivative,
        claims_mvp=isinstance(m, Euclidean),
    )


def _square_x(m):
    return ScalarField(
        name="square-x",
        evaluate=lambda pts: spatial(m, pts)[..., 0] ** 2,
        sup_bound=coordinate_bound(m) ** 2,
        directional_derivative=lambda p, X: float(
            2.0 * spatial(m, p)[0] * _spatial_derivative(m, p, X)[0]
        ),
        claims_mvp=False,
    )


def _wave_field(m):
    def evaluate(pts):
        c = spatial(m, pts)
        return np.sin(c[..., 0]) * np.cos(c[..., 1])

    def derivative(p, X):
        c = spatial(m, p)
        d = _spatial_derivative(m, p, X)
        return float(np.cos(c[0]) * np.cos(c[1]) * d[0] - np.sin(c[0]) * np.sin(c[1]) * d[1])

    return ScalarField(
        name="wave-field",
        evaluate=evaluate,
        sup_bound=1.0,
        directional_derivative=derivative,
        claims_mvp=False,
    )


def _x_plus_y(m):
    return ScalarField(
        name="x-plus-y",
        evaluate=lambda pts: spatial(m, pts)[..., 0] + spatial(m, pts)[..., 1],
        sup_bound=2.0 * coordinate_bound(m),
        directional_derivative=lambda p, X: float(np.sum(_spatial_derivative(m, p, X)[:2])),
        claims_mvp=False,
    )


def busemann_direction(dim):
    """Null vector ``(1, 1, 0, ...)`` used as the point at infinity."""
    xi = np.zeros(dim + 1)
    xi[:2] = 1.0
    return xi


def _busemann_exp(m):
    """``exp(-(n-1) b)`` for the Busemann function of the null direction ``(1, 1, 0, ...)``.

    Equal to ``(-<x, xi>_L)^-(n-1)``; harmonic on ``H^n`` and 1 at the origin.
    Its domain sup is taken over the geodesic ball of radius ``WORKING_RADIUS``
    about the origin.
    """
    n = m.dim
    xi = busemann_direction(n)

    def evaluate(pts):
        return (-lorentz(pts, xi)) ** (-(n - 1))

    def derivative(p, X):
        comps = _ambient_derivative(m, p, X)
        a = -lorentz(np.asarray(p, dtype=float), xi)
        return float((n - 1) * a ** (-n) * lorentz(comps, xi))

    return ScalarField(
        name="busemann-exp",
        evaluate=evaluate,
        sup_bound=float(np.exp((n - 1) * WORKING_RADIUS)),
        directional_derivative=derivative,
        claims_mvp=True,
    )


# name -> (factory, manifold kinds it is defined on)
FIELDS = {
    "constant": (_constant, ("euclidean", "hyperboloid", "sphere", "conformal")),
    "linear-x": (_linear_x, ("euclidean", "hyperboloid", "sphere", "conformal")),
    "saddle": (_saddle, ("euclidean", "hyperboloid", "sphere", "conformal")),
    "square-x": (_square_x, ("euclidean", "hyperboloid", "sphere", "conformal")),
    "wave-field": (_wave_field, ("euclidean", "hyperboloid", "sphere", "conformal")),
    "x-plus-y": (_x_plus_y, ("euclidean", "hyperboloid", "sphere", "conformal")),
    "busemann-exp": (_busemann_exp, ("hyperboloid",)),
}


def get_field(name, m):
    try:
        factory, kinds = FIELDS[name]
    except KeyError:
        raise UsageError(f"unknown field {name!r}; known: {', '.join(FIELDS)}") from None
    if m.kind not in kinds:
        raise UsageError(f"field {name!r} is not defined on {m.name}")
    return factory(m)


def fields_for(m):
    """Names of the catalog fields defined on ``m``."""
    return [name for name, (_, kinds) in FIELDS.items() if m.kind in kinds]


def list_catalog():
    """Human-readable listing of manifolds, fields and suites."""
    lines = ["manifolds:"]
    for name, factory in MANIFOLDS.items():
        m = factory()
        bound = m.injectivity_bound(base_point(m))
        lines.append(f"  {name:<14} dim={m.dim}  kind={m.kind:<11} injectivity={bound:g}")
    lines.append("fields:")
    for name, (factory, kinds) in FIELDS.items():
        for kind in kinds:
            m = next(f() for f in MANIFOLDS.values() if f().kind == kind)
            u = factory(m)
            lines.append(
                f"  {name:<14} on {kind:<11} claims_mvp={str(u.claims_mvp).lower():<5}"
                f" sup_bound={u.sup_bound:g}"
            )
    lines.append("suites:")
    lines.extend(f"  {s}" for s in SUITES)
    return "\n".join(lines)
