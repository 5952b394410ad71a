"""Quadrature over geodesic spheres and balls in geodesic polar coordinates.

A point of ``B(p, r)`` is written ``q = exp_p(s u)`` with ``0 < s < r`` and
``u`` a unit vector at ``p``; then ``dmu = theta(p, u, s) ds dOmega`` and on
the sphere ``S(p, r)`` the induced measure is ``dsigma = theta(p, u, r) dOmega``.
In these coordinates ``exp_p^-1(q) = s u`` is known exactly, so no inverse
exponential map is ever needed inside the integrals.

Direction grids are antipodally symmetric: the second half of the nodes is
the exact negation of the first half, and sums over directions add each
antipodal pair before anything else. On homogeneous models, where the
density does not depend on ``u``, odd integrands therefore cancel to an
exact zero instead of to roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geodesics
from .errors import ContractViolation, DomainError
from .manifolds import ConformalSurface, TangentVector


@dataclass(frozen=True)
class Quadrature:
    """Quadrature orders. ``directions`` is used in 2-D, ``polar x azimuth`` in 3-D."""

    directions: int = 256
    polar: int = 32
    azimuth: int = 64
    radial: int = 64
    geodesic_steps: int = geodesics.DEFAULT_STEPS

    def __post_init__(self):
        for name in ("directions", "polar", "azimuth"):
            v = getattr(self, name)
            if v < 2 or v % 2:
                raise ContractViolation(f"quadrature order {name} must be an even integer >= 2")
        if self.radial < 1 or self.geodesic_steps < 1:
            raise ContractViolation("radial order and geodesic steps must be positive")


DEFAULT_QUADRATURE = Quadrature()


@dataclass(frozen=True, eq=False)
class DirectionGrid:
    """Unit directions (orthonormal-basis coefficients) and weights for ``dOmega``."""

    directions: np.ndarray
    weights: np.ndarray
    order: int

    def tangent_vectors(self, m, p):
        E = m.basis_matrix(p)
        return [TangentVector(p, u @ E) for u in self.directions]


@dataclass(frozen=True, eq=False)
class RadialRule:
    nodes: np.ndarray
    weights: np.ndarray
    order: int


def direction_grid(dim, quad=DEFAULT_QUADRATURE):
    if dim == 1:
        half_dirs, half_w, order = np.array([[1.0]]), np.array([1.0]), 2
    elif dim == 2:
        n = quad.directions
        phi = 2.0 * np.pi * np.arange(n // 2) / n
        half_dirs = np.column_stack([np.cos(phi), np.sin(phi)])
        half_w = np.full(n // 2, 2.0 * np.pi / n)
        order = n
    elif dim == 3:
        z, wz = np.polynomial.legendre.leggauss(quad.polar)
        keep = z > 0
        z, wz = z[keep], wz[keep]
        na = quad.azimuth
        phi = 2.0 * np.pi * np.arange(na) / na
        Z, P = np.meshgrid(z, phi, indexing="ij")
        rho = np.sqrt(1.0 - Z * Z)
        half_dirs = np.column_stack(
            [(rho * np.cos(P)).ravel(), (rho * np.sin(P)).ravel(), Z.ravel()]
        )
        half_w = np.repeat(wz, na) * (2.0 * np.pi / na)
        order = quad.polar
    else:
        raise ContractViolation(f"direction grids are implemented for dim <= 3, got {dim}")
    return DirectionGrid(
        directions=np.concatenate([half_dirs, -half_dirs]),
        weights=np.concatenate([half_w, half_w]),
        order=order,
    )


def radial_rule(r, order=DEFAULT_QUADRATURE.radial):
    """Gauss-Legendre rule on ``(0, r)``."""
    x, w = np.polynomial.legendre.leggauss(order)
    return RadialRule(nodes=0.5 * r * (x + 1.0), weights=0.5 * r * w, order=order)


def direction_sum(values, weights):
    """Weighted sum over the direction axis (axis 1), antipodal pairs first.

    ``values`` has shape ``(ns, nu, ...)``; weights broadcast along axis 1.
    """
    w = weights.reshape((1, -1) + (1,) * (values.ndim - 2))
    terms = w * values
    half = values.shape[1] // 2
    return np.sum(terms[:, :half] + terms[:, half:], axis=1)


@dataclass(frozen=True, eq=False)
class PolarNodes:
    """Quadrature nodes ``q = exp_p(s u)`` with their densities.

    ``points`` has shape ``(ns, nu, ambient)``, ``density`` ``(ns, nu)``.
    """

    manifold: object
    p: np.ndarray
    radii: np.ndarray
    grid: DirectionGrid
    basis: np.ndarray
    points: np.ndarray
    density: np.ndarray

    @property
    def log_coefficients(self):
        """``exp_p^-1(q)`` in the orthonormal basis at ``p``; shape ``(ns, nu, dim)``."""
        return self.radii[:, None, None] * self.grid.directions[None, :, :]

    def integrate_over_directions(self, values):
        """``sum_u w_u theta(u, s) values(s, u)`` for each radius ``s``."""
        d = self.density.reshape(self.density.shape + (1,) * (values.ndim - 2))
        return direction_sum(d * values, self.grid.weights)


def _check_radius(m, p, r):
    if not r > 0:
        raise ContractViolation(f"radius must be positive, got {r}")
    bound = m.injectivity_bound(p)
    if r >= bound:
        raise DomainError(f"{m.name}: radius {r} is not below the injectivity bound {bound}")


def polar_nodes(m, p, radii, quad=DEFAULT_QUADRATURE):
    p = m.check_point(p)
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    grid = direction_grid(m.dim, quad)
    E = m.basis_matrix(p)
    if isinstance(m, ConformalSurface):
        pts, dens = geodesics.polar_batch(m, p, E, grid.directions, radii, quad.geodesic_steps)
    else:
        pts = m.exp_polar(p, E, grid.directions, radii)
        dens = np.broadcast_to(m.radial_density(radii)[:, None], (len(radii), len(grid.directions)))
    return PolarNodes(m, p, radii, grid, E, pts, dens)


def sphere_nodes(m, p, r, quad=DEFAULT_QUADRATURE):
    _check_radius(m, p, r)
    return polar_nodes(m, p, [r], quad)


def ball_nodes(m, p, r, quad=DEFAULT_QUADRATURE):
    _check_radius(m, p, r)
    return polar_nodes(m, p, radial_rule(r, quad.radial).nodes, quad)


def _radial_weights(r, quad):
    return radial_rule(r, quad.radial).weights


def sphere_integral_scalar(m, p, r, f, quad=DEFAULT_QUADRATURE):
    """``int_{S(p,r)} f dsigma`` for a vectorized scalar function ``f(points)``."""
    nodes = sphere_nodes(m, p, r, quad)
    return float(nodes.integrate_over_directions(np.asarray(f(nodes.points), dtype=float))[0])


def _log_field(points, log_coeffs):
    return log_coeffs


def sphere_integral_vector(m, p, r, F=None, quad=DEFAULT_QUADRATURE):
    """``int_{S(p,r)} F dsigma`` for a field with values in ``T_p M``.

    ``F(points, log_coeffs)`` returns orthonormal-basis coefficients at ``p``
    (shape ``(..., dim)``); the default is ``exp_p^-1`` itself.
    """
    F = F or _log_field
    nodes = sphere_nodes(m, p, r, quad)
    coeffs = nodes.integrate_over_directions(F(nodes.points, nodes.log_coefficients))[0]
    return TangentVector(nodes.p, coeffs @ nodes.basis)


def ball_integral(m, p, r, f, quad=DEFAULT_QUADRATURE):
    """``int_{B(p,r)} f dmu`` for a vectorized scalar function ``f(points)``."""
    nodes = ball_nodes(m, p, r, quad)
    per_radius = nodes.integrate_over_directions(np.asarray(f(nodes.points), dtype=float))
    return float(np.sum(_radial_weights(r, quad) * per_radius))


def _ones(points):
    return np.ones(points.shape[:-1])


def volume(m, p, r, quad=DEFAULT_QUADRATURE):
    return ball_integral(m, p, r, _ones, quad)


def area(m, p, r, quad=DEFAULT_QUADRATURE):
    return sphere_integral_scalar(m, p, r, _ones, quad)


def stability_field(m, p, r, quad=DEFAULT_QUADRATURE):
    """``H(p, r) = int_{B(p,r)} exp_p^-1(q) dmu(q)``."""
    nodes = ball_nodes(m, p, r, quad)
    per_radius = nodes.integrate_over_directions(nodes.log_coefficients)
    coeffs = np.sum(_radial_weights(r, quad)[:, None] * per_radius, axis=0)
    return TangentVector(nodes.p, coeffs @ nodes.basis)


def stability_radial_derivative(m, p, r, quad=DEFAULT_QUADRATURE):
    """``d/dr H(p, r) = int_{S(p,r)} exp_p^-1(q) dsigma(q)``."""
    return sphere_integral_vector(m, p, r, None, quad)


def grad_volume_fd(m, p, r, h=1e-3, quad=DEFAULT_QUADRATURE):
    """Central-difference gradient of ``p -> V(p, r)`` along the orthonormal basis.

    Neighbouring centres are ``exp_p(+-h e_i)``.
    """
    if not h > 0:
        raise ContractViolation("finite-difference step must be positive")
    p = m.check_point(p)
    _check_radius(m, p, r)
    E = m.basis_matrix(p)
    coeffs = np.empty(m.dim)
    for i, e in enumerate(E):
        plus = volume(m, m.exp_map(p, TangentVector(p, h * e)), r, quad)
        minus = volume(m, m.exp_map(p, TangentVector(p, -h * e)), r, quad)
        coeffs[i] = (plus - minus) / (2.0 * h)
    return TangentVector(p, coeffs @ E)


@dataclass(frozen=True, eq=False)
class StabilityReport:
    p: np.ndarray
    r: float
    V: float
    A: float
    H: TangentVector
    dH_dr: TangentVector
    grid_order: int
    radial_order: int


def stability_report(m, p, r, quad=DEFAULT_QUADRATURE):
    """V, A, H and dH/dr at one (p, r) from a single set of polar nodes."""
    p = m.check_point(p)
    _check_radius(m, p, r)
    rule = radial_rule(r, quad.radial)
    nodes = polar_nodes(m, p, np.append(rule.nodes, r), quad)
    ones = np.ones(nodes.density.shape)
    scal = nodes.integrate_over_directions(ones)
    vec = nodes.integrate_over_directions(nodes.log_coefficients)
    V = float(np.sum(rule.weights * scal[:-1]))
    H = np.sum(rule.weights[:, None] * vec[:-1], axis=0)
    return StabilityReport(
        p=p,
        r=float(r),
        V=V,
        A=float(scal[-1]),
        H=TangentVector(p, H @ nodes.basis),
        dH_dr=TangentVector(p, vec[-1] @ nodes.basis),
        grid_order=nodes.grid.order,
        radial_order=rule.order,
    )
