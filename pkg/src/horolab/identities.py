"""The mean-value operator and numerical checks of the ball identities.

Every check returns an :class:`IdentityReport`. Equalities compare two
independently computed sides; inequalities report the amount by which the
bound is violated (zero when it holds).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import integrals
from .errors import ContractViolation, DomainError, PreconditionError
from .integrals import DEFAULT_QUADRATURE
from .manifolds import TangentVector

REL_FLOOR = 1e-12

LEMMA21_TOL = 1e-3
MOVING_BALL_TOL = 1e-3
PROP31_TOL = 1e-4
CONSTANT_FIELD_TOL = 1e-12
GRADIENT_BOUND_SLACK = 1e-9
HNORM_SLACK = 1e-10
MVP_TOL = 1e-6

VOLUME_FD_STEP = 1e-3
MOVING_BALL_STEP = 1e-3
DIRECTIONAL_FD_STEP = 1e-5


@dataclass(frozen=True, eq=False)
class ScalarField:
    """A test function ``u`` evaluated on arrays of points (last axis = coordinates).

    ``directional_derivative(p, X)`` is optional; without it derivatives are
    taken by central differences along the geodesic through ``(p, X)``.
    """

    name: str
    evaluate: object
    sup_bound: float | None = None
    directional_derivative: object = None
    claims_mvp: bool = False

    def __call__(self, points):
        return self.evaluate(points)


class Identity(enum.Enum):
    LEMMA21 = "lemma21"
    MOVING_BALL = "moving-ball"
    PROP31 = "prop31"
    GRADIENT_BOUND = "gradient-bound"
    HNORM_BOUND = "hnorm-bound"
    MVP = "mvp-check"
    CONSTANT_FIELD = "constant-identity"


@dataclass(frozen=True)
class ReportContext:
    manifold: str
    p: tuple
    r: float
    X: tuple | None = None
    field: str | None = None


@dataclass(frozen=True, eq=False)
class IdentityReport:
    identity: Identity
    lhs: object
    rhs: object
    abs_residual: float
    rel_residual: float
    tolerance: float
    passed: bool
    context: ReportContext

    @classmethod
    def equality(cls, identity, lhs, rhs, tolerance, context, floor=REL_FLOOR):
        """``rel = |lhs - rhs| / max(|lhs|, |rhs|, floor)``; passes when ``rel <= tolerance``.

        The floor is 1e-12 unless the quantity has a natural unit scale
        (mean values, derivatives of O(1) fields) where it is 1.
        """
        a = np.atleast_1d(np.asarray(lhs, dtype=float))
        b = np.atleast_1d(np.asarray(rhs, dtype=float))
        abs_res = float(np.linalg.norm(a - b))
        rel = abs_res / max(float(np.linalg.norm(a)), float(np.linalg.norm(b)), floor)
        return cls(
            identity, _plain(lhs), _plain(rhs), abs_res, rel, tolerance, rel <= tolerance, context
        )

    @classmethod
    def bound(cls, identity, lhs, rhs, tolerance, context, floor=REL_FLOOR):
        """Check ``lhs <= rhs``; the residual is the violation ``max(0, lhs - rhs)``."""
        lhs, rhs = float(lhs), float(rhs)
        violation = max(0.0, lhs - rhs)
        rel = violation / max(abs(lhs), abs(rhs), floor)
        return cls(identity, lhs, rhs, violation, rel, tolerance, rel <= tolerance, context)

    @property
    def slack(self):
        """``rhs - lhs`` for bound reports."""
        return float(self.rhs) - float(self.lhs)


def _plain(x):
    arr = np.asarray(x, dtype=float)
    return float(arr) if arr.ndim == 0 else arr


@dataclass(frozen=True, eq=False)
class KInfinityScan:
    radii: np.ndarray
    ratios: np.ndarray
    extrapolated_limit: float
    classification: str
    trend: str
    domain_limited: bool = False


# -- helpers --------------------------------------------------------------


def _context(m, p, r, X=None, u=None):
    return ReportContext(
        manifold=m.name,
        p=tuple(float(c) for c in np.asarray(p)),
        r=float(r),
        X=None if X is None else tuple(float(c) for c in X.components),
        field=None if u is None else u.name,
    )


def _unit(m, p, X):
    X = X if isinstance(X, TangentVector) else TangentVector(p, X)
    n = m.norm(p, X)
    if abs(n - 1.0) > 1e-8:
        raise ContractViolation(f"direction must be a unit vector, got norm {n}")
    return X


def _ball_and_sphere(m, p, r, quad):
    """One set of polar nodes covering the radial rule of ``B(p,r)`` plus ``S(p,r)``."""
    integrals._check_radius(m, p, r)
    rule = integrals.radial_rule(r, quad.radial)
    nodes = integrals.polar_nodes(m, p, np.append(rule.nodes, r), quad)
    return rule, nodes


def _cosines(nodes, c):
    """``cos theta_X`` at every node; ``c`` are the coefficients of X."""
    logs = nodes.log_coefficients
    cos = (logs @ c) / nodes.radii[:, None]
    return np.clip(cos, -1.0, 1.0)


def directional_derivative(m, u, p, X, h=DIRECTIONAL_FD_STEP):
    """``X u (p)``: analytic when the field provides it, else central differences."""
    if u.directional_derivative is not None:
        return float(u.directional_derivative(p, X))
    plus = m.exp_map(p, X.scaled(h))
    minus = m.exp_map(p, X.scaled(-h))
    return float((u(plus[None, :])[0] - u(minus[None, :])[0]) / (2.0 * h))


# -- operations -----------------------------------------------------------


def cos_angle(m, p, X, q):
    """Cosine of the angle at ``p`` between ``X`` and the initial velocity towards ``q``."""
    p = m.check_point(p)
    q = m.check_point(q)
    if np.array_equal(p, q):
        raise DomainError("the angle function is undefined at the centre itself")
    X = _unit(m, p, X)
    v = m.log_map(p, q)
    c = m.metric_inner(p, X, v) / m.norm(p, v)
    return float(np.clip(c, -1.0, 1.0))


def mean_value(m, u, p, r, quad=DEFAULT_QUADRATURE):
    """Average of ``u`` over the geodesic ball ``B(p, r)``."""
    rule, nodes = _ball_and_sphere(m, p, r, quad)
    vals = np.asarray(u(nodes.points[:-1]), dtype=float)
    num = np.sum(rule.weights * _integrate_ball(nodes, vals))
    den = np.sum(rule.weights * _integrate_ball(nodes, np.ones(vals.shape)))
    return float(num / den)


def _integrate_ball(nodes, values):
    """Direction sums on the radial-rule part of ``nodes`` (all but the last radius)."""
    d = nodes.density[:-1]
    d = d.reshape(d.shape + (1,) * (values.ndim - 2))
    return integrals.direction_sum(d * values, nodes.grid.weights)


def mvp_check(m, u, p, r, quad=DEFAULT_QUADRATURE, tolerance=MVP_TOL):
    """Compare the ball average of ``u`` with ``u(p)``; residual scale ``max(1, |u(p)|)``."""
    p = m.check_point(p)
    avg = mean_value(m, u, p, r, quad)
    centre = float(u(p[None, :])[0])
    return IdentityReport.equality(
        Identity.MVP, avg, centre, tolerance, _context(m, p, r, u=u), floor=1.0
    )


def lemma21_residual(m, p, r, h=VOLUME_FD_STEP, quad=DEFAULT_QUADRATURE, tolerance=LEMMA21_TOL):
    """Gradient of the volume (finite differences) against ``(1/r) dH/dr`` (sphere quadrature)."""
    p = m.check_point(p)
    grad = integrals.grad_volume_fd(m, p, r, h, quad)
    dH = integrals.stability_radial_derivative(m, p, r, quad)
    lhs = m.coefficients(p, grad)
    rhs = m.coefficients(p, dH) / r
    return IdentityReport.equality(Identity.LEMMA21, lhs, rhs, tolerance, _context(m, p, r))


def moving_ball_derivative_check(
    m, u, p, X, r, t_step=MOVING_BALL_STEP, quad=DEFAULT_QUADRATURE, tolerance=MOVING_BALL_TOL
):
    """``d/dt int_{B(c(t), r)} u`` at ``t = 0`` against ``int_S u cos(theta_X) dsigma``.

    ``c(t) = exp_p(t X)``; the left side is a central difference in ``t``.
    """
    p = m.check_point(p)
    X = _unit(m, p, X)
    ahead = integrals.ball_integral(m, m.exp_map(p, X.scaled(t_step)), r, u, quad)
    behind = integrals.ball_integral(m, m.exp_map(p, X.scaled(-t_step)), r, u, quad)
    lhs = (ahead - behind) / (2.0 * t_step)
    nodes = integrals.sphere_nodes(m, p, r, quad)
    cos = _cosines(nodes, m.coefficients(p, X))
    rhs = nodes.integrate_over_directions(np.asarray(u(nodes.points), dtype=float) * cos)[0]
    return IdentityReport.equality(
        Identity.MOVING_BALL, lhs, rhs, tolerance, _context(m, p, r, X, u)
    )


def _sphere_terms(m, u, p, X, r, quad):
    rule, nodes = _ball_and_sphere(m, p, r, quad)
    c = m.coefficients(p, X)
    ones = np.ones(nodes.density.shape)
    scal = nodes.integrate_over_directions(ones)
    V = float(np.sum(rule.weights * scal[:-1]))
    A = float(scal[-1])
    sphere = integrals.PolarNodes(
        m, nodes.p, nodes.radii[-1:], nodes.grid, nodes.basis, nodes.points[-1:], nodes.density[-1:]
    )
    dH = sphere.integrate_over_directions(sphere.log_coefficients)[0]
    weighted = None
    if u is not None:
        cos = _cosines(sphere, c)
        weighted = float(
            sphere.integrate_over_directions(np.asarray(u(sphere.points), dtype=float) * cos)[0]
        )
    return V, A, dH, c, weighted


def prop31_residual(
    m, u, p, X, r, quad=DEFAULT_QUADRATURE, tolerance=PROP31_TOL, fd_step=DIRECTIONAL_FD_STEP
):
    """Derivative formula for a field with the mean-value property.

    ``X u(p) = (1/V) int_S u cos(theta_X) dsigma - (u(p) / (r V)) <dH/dr, X>``.
    Residuals are measured on the scale ``max(1, |lhs|, |rhs|)``.
    """
    if not u.claims_mvp:
        raise PreconditionError(
            f"field {u.name!r} does not claim the mean-value property on {m.name}"
        )
    p = m.check_point(p)
    X = _unit(m, p, X)
    lhs = directional_derivative(m, u, p, X, fd_step)
    V, _, dH, c, weighted = _sphere_terms(m, u, p, X, r, quad)
    centre = float(u(p[None, :])[0])
    rhs = weighted / V - centre / (r * V) * float(dH @ c)
    return IdentityReport.equality(
        Identity.PROP31, lhs, rhs, tolerance, _context(m, p, r, X, u), floor=1.0
    )


def constant_field_identity(m, p, X, r, quad=DEFAULT_QUADRATURE, tolerance=CONSTANT_FIELD_TOL):
    """``int_S cos(theta_X) dsigma = (1/r) <dH/dr, X>`` on one shared set of sphere nodes."""
    p = m.check_point(p)
    X = _unit(m, p, X)
    nodes = integrals.sphere_nodes(m, p, r, quad)
    c = m.coefficients(p, X)
    lhs = nodes.integrate_over_directions(_cosines(nodes, c))[0]
    dH = nodes.integrate_over_directions(nodes.log_coefficients)[0]
    rhs = float(dH @ c) / r
    return IdentityReport.equality(
        Identity.CONSTANT_FIELD, lhs, rhs, tolerance, _context(m, p, r, X)
    )


def gradient_bound_check(m, u, p, r, quad=DEFAULT_QUADRATURE, slack=GRADIENT_BOUND_SLACK):
    """``max_i |e_i u(p)| <= 2 alpha A(p,r) / V(p,r)`` with ``alpha = u.sup_bound``."""
    if u.sup_bound is None:
        raise PreconditionError(f"field {u.name!r} has no sup bound")
    if not u.claims_mvp:
        raise PreconditionError(
            f"field {u.name!r} does not claim the mean-value property on {m.name}"
        )
    p = m.check_point(p)
    rule, nodes = _ball_and_sphere(m, p, r, quad)
    scal = nodes.integrate_over_directions(np.ones(nodes.density.shape))
    V = float(np.sum(rule.weights * scal[:-1]))
    A = float(scal[-1])
    grads = [abs(directional_derivative(m, u, p, e)) for e in m.orthonormal_basis(p)]
    return IdentityReport.bound(
        Identity.GRADIENT_BOUND,
        max(grads),
        2.0 * u.sup_bound * A / V,
        slack,
        _context(m, p, r, u=u),
    )


def hnorm_bound_check(m, p, r, quad=DEFAULT_QUADRATURE, slack=HNORM_SLACK):
    """``||(1/r) dH/dr|| <= A(p, r)``, since ``|exp_p^-1 q| = r`` on the sphere."""
    p = m.check_point(p)
    nodes = integrals.sphere_nodes(m, p, r, quad)
    A = float(nodes.integrate_over_directions(np.ones(nodes.density.shape))[0])
    dH = nodes.integrate_over_directions(nodes.log_coefficients)[0]
    return IdentityReport.bound(
        Identity.HNORM_BOUND, float(np.linalg.norm(dH)) / r, A, slack, _context(m, p, r)
    )


def area_volume_ratio(m, p, r, quad=DEFAULT_QUADRATURE):
    rule, nodes = _ball_and_sphere(m, p, r, quad)
    scal = nodes.integrate_over_directions(np.ones(nodes.density.shape))
    return float(scal[-1] / np.sum(rule.weights * scal[:-1]))


def kinfinity_scan(m, p, radii, quad=DEFAULT_QUADRATURE):
    """Sphere-area to ball-volume ratios along increasing radii, with a classification.

    ``vanishing``: last ratio < 0.05 and the ratios decrease; ``bounded_nonzero``:
    relative change < 1e-3 over the last two radii; ``unbounded`` otherwise.
    """
    p = m.check_point(p)
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or len(radii) < 2:
        raise PreconditionError("a scan needs at least two radii")
    if np.any(np.diff(radii) <= 0) or radii[0] <= 0:
        raise PreconditionError("radii must be positive and strictly increasing")
    bound = m.injectivity_bound(p)
    if radii[-1] >= bound:
        raise PreconditionError(
            f"{m.name}: scan radius {radii[-1]} reaches the injectivity bound {bound}"
        )
    ratios = np.array([area_volume_ratio(m, p, r, quad) for r in radii])
    steps = np.diff(ratios)
    if np.all(steps < 0):
        trend = "decreasing"
    elif np.all(steps > 0):
        trend = "increasing"
    else:
        trend = "mixed"
    last, prev = ratios[-1], ratios[-2]
    if last < 0.05 and trend == "decreasing":
        cls = "vanishing"
    elif last > 0 and abs(last - prev) / last < 1e-3:
        cls = "bounded_nonzero"
    else:
        cls = "unbounded"
    return KInfinityScan(
        radii, ratios, float(last), cls, trend, domain_limited=bool(np.isfinite(bound))
    )
