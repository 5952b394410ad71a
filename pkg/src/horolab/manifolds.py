"""Model manifolds: flat space, the hyperboloid, the round sphere and conformal surfaces.

Points are plain ``numpy`` arrays. Hyperboloid and sphere points use ambient
coordinates (``dim + 1`` entries); Euclidean and conformal points use chart
coordinates. Tangent vectors carry their base point so that mixing vectors
from different tangent spaces is caught early.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, DomainError

CONSTRAINT_TOL = 1e-10
RENORMALIZE_TOL = 1e-12
BASE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class TangentVector:
    base: np.ndarray
    components: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "base", np.asarray(self.base, dtype=float))
        object.__setattr__(self, "components", np.asarray(self.components, dtype=float))

    def __repr__(self):
        return f"TangentVector(base={self.base.tolist()}, components={self.components.tolist()})"

    def scaled(self, c):
        return TangentVector(self.base, c * self.components)

    def __neg__(self):
        return self.scaled(-1.0)


def lorentz(x, y):
    """Lorentz form ``-x0 y0 + sum xi yi`` over the last axis."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return -x[..., 0] * y[..., 0] + np.sum(x[..., 1:] * y[..., 1:], axis=-1)


def _sinhc(x):
    x = np.asarray(x, dtype=float)
    safe = np.where(x == 0.0, 1.0, x)
    return np.where(x == 0.0, 1.0, np.sinh(safe) / safe)


def _sinc(x):
    # np.sinc is sin(pi x)/(pi x)
    return np.sinc(np.asarray(x, dtype=float) / np.pi)


class Manifold:
    """Common interface of the model spaces.

    Subclasses implement the closed forms; everything is a pure function of
    its inputs and instances are never mutated after construction.
    """

    kind = "abstract"

    def __init__(self, dim, name=None):
        if int(dim) != dim or dim < 1:
            raise ContractViolation(f"dimension must be a positive integer, got {dim!r}")
        self.dim = int(dim)
        self.name = name or f"{self.kind}{self.dim}"

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim}, name={self.name!r})"

    @property
    def ambient_dim(self):
        return self.dim

    # -- points and vectors -------------------------------------------------

    def check_point(self, p):
        p = np.asarray(p, dtype=float)
        if p.shape != (self.ambient_dim,):
            raise ContractViolation(
                f"{self.name}: point must have {self.ambient_dim} coordinates, got shape {p.shape}"
            )
        return p

    def tangent(self, p, components):
        """Wrap ``components`` as a tangent vector at ``p`` (validated)."""
        p = self.check_point(p)
        v = TangentVector(p, components)
        self._check_tangent(p, v)
        return v

    def _check_tangent(self, p, v):
        if v.components.shape != (self.ambient_dim,):
            raise ContractViolation(
                f"{self.name}: tangent components must have {self.ambient_dim} entries"
            )

    def _at(self, p, v):
        """Validate that ``v`` lives at ``p`` and return its components."""
        if isinstance(v, TangentVector):
            if v.base.shape != p.shape or np.max(np.abs(v.base - p)) > BASE_TOL:
                raise ContractViolation(
                    f"{self.name}: tangent vector based at {v.base.tolist()} used at {p.tolist()}"
                )
            self._check_tangent(p, v)
            return v.components
        comps = np.asarray(v, dtype=float)
        self._check_tangent(p, TangentVector(p, comps))
        return comps

    # -- geometry -----------------------------------------------------------

    def metric_inner(self, p, v, w):
        p = self.check_point(p)
        return float(self._inner(p, self._at(p, v), self._at(p, w)))

    def norm(self, p, v):
        return float(np.sqrt(max(self.metric_inner(p, v, v), 0.0)))

    def _inner(self, p, a, b):
        return np.sum(a * b, axis=-1)

    def exp_map(self, p, v):
        raise NotImplementedError

    def log_map(self, p, q):
        raise NotImplementedError

    def distance(self, p, q):
        p = self.check_point(p)
        return self.norm(p, self.log_map(p, q))

    def parallel_transport(self, p, q, v):
        raise NotImplementedError

    def volume_density(self, p, u, r):
        p = self.check_point(p)
        comps = self._at(p, u)
        n = np.sqrt(self._inner(p, comps, comps))
        if abs(n - 1.0) > 1e-8:
            raise ContractViolation(
                f"{self.name}: volume_density needs a unit direction, |u| = {n}"
            )
        if not r > 0:
            raise ContractViolation("radius must be positive")
        if r >= self.injectivity_bound(p):
            raise DomainError(f"{self.name}: radius {r} reaches the injectivity bound")
        return float(self.radial_density(np.asarray(r, dtype=float)))

    def radial_density(self, s):
        """Polar volume density as a function of radius alone (homogeneous models)."""
        raise NotImplementedError

    def injectivity_bound(self, p):
        return np.inf

    def basis_matrix(self, p):
        """Rows are the components of :meth:`orthonormal_basis` at ``p``."""
        raise NotImplementedError

    def orthonormal_basis(self, p):
        p = self.check_point(p)
        return [TangentVector(p, row) for row in self.basis_matrix(p)]

    def coefficients(self, p, v):
        """Coordinates of ``v`` in the orthonormal basis at ``p``."""
        p = self.check_point(p)
        comps = self._at(p, v)
        E = self.basis_matrix(p)
        return np.array([self._inner(p, comps, e) for e in E])

    def from_coefficients(self, p, coeffs):
        p = self.check_point(p)
        return TangentVector(p, np.asarray(coeffs, dtype=float) @ self.basis_matrix(p))

    def exp_polar(self, p, E, directions, radii):
        """``exp_p(s * u)`` for every radius ``s`` and unit direction ``u``.

        ``directions`` holds orthonormal-basis coefficients (shape ``(k, dim)``),
        ``E`` is :meth:`basis_matrix`; the result has shape ``(len(radii), k, ambient)``.
        """
        raise NotImplementedError


class Euclidean(Manifold):
    kind = "euclidean"

    def exp_map(self, p, v):
        p = self.check_point(p)
        return p + self._at(p, v)

    def log_map(self, p, q):
        p = self.check_point(p)
        q = self.check_point(q)
        return TangentVector(p, q - p)

    def parallel_transport(self, p, q, v):
        p = self.check_point(p)
        q = self.check_point(q)
        return TangentVector(q, self._at(p, v).copy())

    def radial_density(self, s):
        return s ** (self.dim - 1)

    def basis_matrix(self, p):
        return np.eye(self.dim)

    def exp_polar(self, p, E, directions, radii):
        U = directions @ E
        return p + radii[:, None, None] * U[None, :, :]


class Hyperboloid(Manifold):
    """Hyperbolic space as the upper sheet of ``<x, x>_L = -1``."""

    kind = "hyperboloid"

    @property
    def ambient_dim(self):
        return self.dim + 1

    @staticmethod
    def lift(spatial):
        """Point of the upper sheet with the given spatial coordinates."""
        spatial = np.asarray(spatial, dtype=float)
        return np.concatenate([[np.sqrt(1.0 + spatial @ spatial)], spatial])

    def origin(self):
        return np.eye(self.dim + 1)[0]

    def check_point(self, p):
        p = super().check_point(p)
        # the Lorentz form of a point is a difference of O(x0^2) terms
        if abs(lorentz(p, p) + 1.0) > CONSTRAINT_TOL * max(1.0, p[0] ** 2) or p[0] <= 0:
            raise ContractViolation(
                f"{self.name}: {p.tolist()} is not on the upper hyperboloid sheet"
            )
        return p

    def _check_tangent(self, p, v):
        super()._check_tangent(p, v)
        scale = max(1.0, np.max(np.abs(p)) * np.max(np.abs(v.components)))
        if abs(lorentz(p, v.components)) > CONSTRAINT_TOL * scale:
            raise ContractViolation(
                f"{self.name}: vector is not Lorentz-orthogonal to its base point"
            )

    def _inner(self, p, a, b):
        return lorentz(a, b)

    @staticmethod
    def renormalize(x):
        """Project back onto the sheet by recomputing ``x0`` from the spatial part.

        Rescaling the whole vector would move the point along the ray through
        the origin, an error that grows like ``x0^2 * eps`` at large radii.
        """
        x = np.array(x, dtype=float)
        if np.any(np.abs(lorentz(x, x) + 1.0) > RENORMALIZE_TOL * np.maximum(1.0, x[..., 0] ** 2)):
            x[..., 0] = np.sqrt(1.0 + np.sum(x[..., 1:] ** 2, axis=-1))
        return x

    def exp_map(self, p, v):
        p = self.check_point(p)
        v = self._at(p, v)
        n = np.sqrt(max(lorentz(v, v), 0.0))
        if n == 0.0:
            return p.copy()
        return self.renormalize(np.cosh(n) * p + _sinhc(n) * v)

    def log_map(self, p, q):
        p = self.check_point(p)
        q = self.check_point(q)
        w = q - p
        chord = np.sqrt(max(lorentz(w, w), 0.0))
        if chord == 0.0:
            return TangentVector(p, np.zeros_like(p))
        d = 2.0 * np.arcsinh(chord / 2.0)
        t = w + lorentz(p, w) * p
        return TangentVector(p, t / _sinhc(d))

    def distance(self, p, q):
        p = self.check_point(p)
        q = self.check_point(q)
        w = q - p
        return float(2.0 * np.arcsinh(np.sqrt(max(lorentz(w, w), 0.0)) / 2.0))

    def parallel_transport(self, p, q, v):
        p = self.check_point(p)
        q = self.check_point(q)
        v = self._at(p, v)
        return TangentVector(q, v + lorentz(q, v) / (1.0 - lorentz(p, q)) * (p + q))

    def radial_density(self, s):
        return np.sinh(s) ** (self.dim - 1)

    def basis_matrix(self, p):
        p = self.check_point(p)
        rows = []
        for i in range(1, self.dim + 1):
            e = np.zeros(self.dim + 1)
            e[i] = 1.0
            t = e + lorentz(e, p) * p
            for b in rows:
                t = t - lorentz(t, b) * b
            rows.append(t / np.sqrt(lorentz(t, t)))
        return np.array(rows)

    def exp_polar(self, p, E, directions, radii):
        U = directions @ E
        s = radii[:, None, None]
        return self.renormalize(np.cosh(s) * p + np.sinh(s) * U[None, :, :])


class Sphere(Manifold):
    """Unit sphere in ``R^(dim+1)``; compact, with cut locus at distance pi."""

    kind = "sphere"

    @property
    def ambient_dim(self):
        return self.dim + 1

    def check_point(self, p):
        p = super().check_point(p)
        if abs(np.linalg.norm(p) - 1.0) > CONSTRAINT_TOL:
            raise ContractViolation(f"{self.name}: {p.tolist()} is not on the unit sphere")
        return p

    def _check_tangent(self, p, v):
        super()._check_tangent(p, v)
        scale = max(1.0, np.max(np.abs(v.components)))
        if abs(p @ v.components) > CONSTRAINT_TOL * scale:
            raise ContractViolation(f"{self.name}: vector is not orthogonal to its base point")

    @staticmethod
    def renormalize(x):
        n = np.linalg.norm(x, axis=-1)
        if np.any(np.abs(n - 1.0) > RENORMALIZE_TOL):
            x = x / n[..., None]
        return x

    def exp_map(self, p, v):
        p = self.check_point(p)
        v = self._at(p, v)
        n = np.linalg.norm(v)
        if n == 0.0:
            return p.copy()
        return self.renormalize(np.cos(n) * p + _sinc(n) * v)

    def _angle(self, p, q):
        return 2.0 * np.arctan2(np.linalg.norm(q - p), np.linalg.norm(q + p))

    def log_map(self, p, q):
        p = self.check_point(p)
        q = self.check_point(q)
        d = self._angle(p, q)
        if np.pi - d < 1e-7:
            raise DomainError(f"{self.name}: {q.tolist()} is (nearly) antipodal to {p.tolist()}")
        w = q - p
        t = w - (p @ w) * p
        return TangentVector(p, t / _sinc(d))

    def distance(self, p, q):
        return float(self._angle(self.check_point(p), self.check_point(q)))

    def parallel_transport(self, p, q, v):
        self.log_map(p, q)  # domain check
        p = self.check_point(p)
        q = self.check_point(q)
        v = self._at(p, v)
        return TangentVector(q, v - (q @ v) / (1.0 + p @ q) * (p + q))

    def radial_density(self, s):
        return np.sin(s) ** (self.dim - 1)

    def injectivity_bound(self, p):
        return np.pi

    def basis_matrix(self, p):
        p = self.check_point(p)
        # the dim axes least aligned with p project to independent tangents
        axes = np.argsort(np.abs(p), kind="stable")[: self.dim]
        rows = []
        for i in sorted(axes):
            e = np.zeros(self.dim + 1)
            e[i] = 1.0
            t = e - (e @ p) * p
            for b in rows:
                t = t - (t @ b) * b
            rows.append(t / np.linalg.norm(t))
        return np.array(rows)

    def exp_polar(self, p, E, directions, radii):
        U = directions @ E
        s = radii[:, None, None]
        return self.renormalize(np.cos(s) * p + np.sin(s) * U[None, :, :])


def _fd_gradient(lam, h=1e-6):
    def grad(x, y):
        gx = (lam(x + h, y) - lam(x - h, y)) / (2 * h)
        gy = (lam(x, y + h) - lam(x, y - h)) / (2 * h)
        return gx, gy

    return grad


def _fd_laplacian(lam, h=1e-4):
    def lap(x, y):
        c = lam(x, y)
        return (lam(x + h, y) + lam(x - h, y) + lam(x, y + h) + lam(x, y - h) - 4 * c) / h**2

    return lap


@dataclass(frozen=True, eq=False)
class ConformalFactor:
    """Log conformal factor ``lam`` of ``g = exp(2 lam) (dx^2 + dy^2)``.

    ``grad`` and ``laplacian`` fall back to central differences (steps 1e-6 and
    1e-4) when not supplied. ``jet(x, y) -> (lam, lam_x, lam_y, laplacian)``
    may be given to share work between the pieces; the geodesic integrators
    call it at every stage. All callables take broadcastable arrays ``x, y``.
    """

    lam: object
    grad: object = None
    laplacian: object = None
    jet: object = None
    analytic: bool = field(init=False, default=True)

    def __post_init__(self):
        if self.grad is None or self.laplacian is None:
            object.__setattr__(self, "analytic", False)
        if self.grad is None:
            object.__setattr__(self, "grad", _fd_gradient(self.lam))
        if self.laplacian is None:
            object.__setattr__(self, "laplacian", _fd_laplacian(self.lam))
        if self.jet is None:
            object.__setattr__(self, "jet", self._split_jet)

    def _split_jet(self, x, y):
        gx, gy = self.grad(x, y)
        return self.lam(x, y), gx, gy, self.laplacian(x, y)

    def first_jet(self, x, y):
        if self.jet is self._split_jet:
            gx, gy = self.grad(x, y)
            return self.lam(x, y), gx, gy
        return self.jet(x, y)[:3]


class ConformalSurface(Manifold):
    """Surface ``(R^2 or a chart domain, exp(2 lam) |dx|^2)``.

    Geodesics, the inverse exponential map, transport and densities are all
    numerical and live in :mod:`horolab.geodesics`. ``domain_radius`` is the
    chart radius of the working domain (``None`` = unrestricted).
    """

    kind = "conformal"

    def __init__(self, factor, name="conformal", domain_radius=None, chart_radius=np.inf):
        super().__init__(2, name=name)
        if not isinstance(factor, ConformalFactor):
            factor = ConformalFactor(factor)
        self.factor = factor
        self.domain_radius = domain_radius
        self.chart_radius = chart_radius

    def check_point(self, p):
        p = super().check_point(p)
        if not np.all(np.isfinite(p)) or np.hypot(*p) >= self.chart_radius:
            raise ContractViolation(f"{self.name}: {p.tolist()} is outside the chart")
        return p

    def lam(self, p):
        return float(self.factor.lam(p[0], p[1]))

    def _inner(self, p, a, b):
        return np.exp(2.0 * self.factor.lam(p[0], p[1])) * np.sum(a * b, axis=-1)

    def exp_map(self, p, v):
        from . import geodesics

        p = self.check_point(p)
        v = self._at(p, v)
        if not np.any(v):
            return p.copy()
        return geodesics.exp_point(self, p, v)

    def log_map(self, p, q):
        from . import geodesics

        p = self.check_point(p)
        q = self.check_point(q)
        return TangentVector(p, geodesics.shoot_log(self, p, q).velocity)

    def parallel_transport(self, p, q, v):
        from . import geodesics

        p = self.check_point(p)
        q = self.check_point(q)
        comps = self._at(p, v)
        shot = geodesics.shoot_log(self, p, q)
        path = geodesics.integrate_geodesic_refined(self, p, shot.velocity, 1.0)
        return geodesics.transport_along(self, path, TangentVector(p, comps))

    def volume_density(self, p, u, r):
        from . import geodesics

        p = self.check_point(p)
        comps = self._at(p, u)
        n = np.sqrt(self._inner(p, comps, comps))
        if abs(n - 1.0) > 1e-8:
            raise ContractViolation(
                f"{self.name}: volume_density needs a unit direction, |u| = {n}"
            )
        if not r > 0:
            raise ContractViolation("radius must be positive")
        c = self.coefficients(p, TangentVector(p, comps))
        return geodesics.jacobi_density(self, p, float(np.arctan2(c[1], c[0])), r)

    def basis_matrix(self, p):
        p = self.check_point(p)
        return np.exp(-self.lam(p)) * np.eye(2)

    def exp_polar(self, p, E, directions, radii):
        from . import geodesics

        pts, _ = geodesics.polar_batch(self, p, E, directions, radii)
        return pts
