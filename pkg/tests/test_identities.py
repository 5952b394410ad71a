import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from horolab import catalog, identities, integrals
from horolab.acceptance import CONFIG_POINTS
from horolab.errors import ContractViolation, DomainError, PreconditionError
from horolab.identities import Identity, IdentityReport, ReportContext, ScalarField
from horolab.integrals import Quadrature
from horolab.manifolds import ConformalSurface, Hyperboloid, Sphere

E2 = catalog.get_manifold("euclidean2")
H2 = catalog.get_manifold("hyperboloid2")
O = H2.origin()


# -- report plumbing ----------------------------------------------------------

CTX = ReportContext("m", (0.0,), 1.0)


@given(
    lhs=st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=3),
    noise=st.floats(-1.0, 1.0),
    tol=st.floats(1e-14, 1.0),
)
def test_report_residual_invariants(lhs, noise, tol):
    lhs = np.array(lhs)
    rhs = lhs + noise
    rep = IdentityReport.equality(Identity.LEMMA21, lhs, rhs, tol, CTX)
    expected = rep.abs_residual / max(np.linalg.norm(lhs), np.linalg.norm(rhs), 1e-12)
    assert rep.rel_residual == pytest.approx(expected, rel=1e-15, abs=0)
    assert rep.passed == (rep.rel_residual <= tol)


def test_bound_report():
    ok = IdentityReport.bound(Identity.HNORM_BOUND, 1.0, 2.0, 1e-10, CTX)
    bad = IdentityReport.bound(Identity.HNORM_BOUND, 3.0, 2.0, 1e-10, CTX)
    assert ok.passed and ok.abs_residual == 0.0 and ok.slack == 1.0
    assert not bad.passed and bad.abs_residual == 1.0


def test_identity_names_match_suites():
    assert {i.value for i in Identity} <= set(catalog.SUITES)


# -- cos_angle ----------------------------------------------------------------


def test_cos_angle_examples():
    assert identities.cos_angle(E2, [0, 0], [1, 0], [0, 1]) == 0.0
    assert identities.cos_angle(E2, [0, 0], [1, 0], [3, 0]) == 1.0
    q = [np.cosh(1), 0, np.sinh(1)]
    assert abs(identities.cos_angle(H2, O, [0, 1, 0], q)) <= 1e-15


def test_cos_angle_errors():
    with pytest.raises(DomainError):
        identities.cos_angle(E2, [0, 0], [1, 0], [0, 0])
    with pytest.raises(ContractViolation):
        identities.cos_angle(E2, [0, 0], [2, 0], [1, 1])


@given(x=st.floats(-3, 3), y=st.floats(-3, 3), a=st.floats(0, 7))
def test_cos_angle_is_clamped(x, y, a):
    if np.hypot(x, y) < 1e-6:
        return
    c = identities.cos_angle(E2, [0, 0], [np.cos(a), np.sin(a)], [x, y])
    assert -1.0 <= c <= 1.0


# -- mean values --------------------------------------------------------------


@pytest.mark.parametrize("name", list(catalog.MANIFOLDS))
def test_constant_mean_value(name):
    m = catalog.get_manifold(name)
    p = catalog.base_point(m, CONFIG_POINTS[name][-1])
    u = catalog.get_field("constant", m)
    assert abs(identities.mean_value(m, u, p, 1.0) - 2.5) <= 1e-12 * 2.5


@given(a=st.floats(-5, 5), b=st.floats(-5, 5), r=st.floats(0.1, 3))
def test_linear_mean_value(a, b, r):
    u = catalog.get_field("linear-x", E2)
    assert abs(identities.mean_value(E2, u, np.array([a, b]), r) - a) <= 1e-10 * max(1.0, abs(a))


def test_busemann_mean_value():
    u = catalog.get_field("busemann-exp", H2)
    val = identities.mean_value(H2, u, O, 1.0)
    fine = identities.mean_value(H2, u, O, 1.0, Quadrature(directions=512, radial=128))
    assert abs(val - 1.0) <= 1e-8
    assert abs(val - fine) <= 1e-12


def test_busemann_field_is_harmonic_on_h3():
    # radial mean of u over geodesic spheres equals u(p) (sphere-mean property)
    m = catalog.get_manifold("hyperboloid3")
    u = catalog.get_field("busemann-exp", m)
    p = catalog.base_point(m, (0.3, 0.5, -0.4))
    for r in (0.5, 2.0):
        mean = integrals.sphere_integral_scalar(m, p, r, u) / integrals.area(m, p, r)
        assert mean == pytest.approx(float(u(p[None])[0]), rel=1e-6)


def test_mvp_check_fails_for_square():
    u = catalog.get_field("square-x", E2)
    for r in (0.5, 1.0, 2.0):
        rep = identities.mvp_check(E2, u, np.zeros(2), r)
        assert not rep.passed
        assert rep.abs_residual == pytest.approx(r * r / 4, rel=1e-12)


def test_sup_bounds_hold_on_working_domain():
    for name in catalog.MANIFOLDS:
        m = catalog.get_manifold(name)
        p = catalog.base_point(m)
        r = 3.0 if isinstance(m, Sphere) else (5.0 if isinstance(m, ConformalSurface) else 5.95)
        q = Quadrature(directions=64, polar=8, azimuth=16, radial=16)
        pts = integrals.ball_nodes(m, p, r, q).points
        if isinstance(m, ConformalSurface):
            assert np.max(np.linalg.norm(pts, axis=-1)) <= catalog.WORKING_RADIUS
        for fname in catalog.fields_for(m):
            u = catalog.get_field(fname, m)
            assert np.max(np.abs(u(pts))) <= u.sup_bound


def test_fields_reject_wrong_manifold():
    from horolab.errors import UsageError

    with pytest.raises(UsageError):
        catalog.get_field("busemann-exp", E2)
    with pytest.raises(UsageError):
        catalog.get_field("nope", E2)


@pytest.mark.parametrize("name", ["euclidean3", "hyperboloid3", "sphere2", "wave-surface"])
def test_analytic_derivatives_match_finite_differences(name):
    m = catalog.get_manifold(name)
    p = catalog.base_point(m, CONFIG_POINTS[name][-1])
    X = m.orthonormal_basis(p)[-1]
    for fname in catalog.fields_for(m):
        u = catalog.get_field(fname, m)
        plain = ScalarField(u.name, u.evaluate)
        a = identities.directional_derivative(m, u, p, X)
        b = identities.directional_derivative(m, plain, p, X)
        assert a == pytest.approx(b, rel=1e-6, abs=1e-6)


# -- Lemma 2.1 ------------------------------------------------------------------


def test_lemma21_homogeneous():
    for m, p in ((E2, np.array([0.7, -0.3])), (H2, catalog.base_point(H2, (0.6, -0.8)))):
        rep = identities.lemma21_residual(m, p, 1.0)
        assert rep.passed
        assert np.max(np.abs(rep.rhs)) <= 1e-12


def test_lemma21_bump(bump):
    rep = identities.lemma21_residual(bump, np.array([1.5, 0.0]), 1.0)
    assert rep.passed and rep.rel_residual <= 1e-3
    assert np.linalg.norm(rep.lhs) > 1e-3 and np.linalg.norm(rep.rhs) > 1e-3
    assert rep.identity is Identity.LEMMA21 and rep.context.manifold == "bump-surface"


# -- moving ball ----------------------------------------------------------------


def test_moving_ball_constant_on_euclidean():
    u = catalog.get_field("constant", E2)
    rep = identities.moving_ball_derivative_check(
        E2, u, np.zeros(2), E2.tangent([0, 0], [1, 0]), 1.0
    )
    assert abs(rep.lhs) <= 1e-9 and abs(rep.rhs) <= 1e-12


def test_moving_ball_analytic():
    u = catalog.get_field("linear-x", E2)
    rep = identities.moving_ball_derivative_check(
        E2, u, np.zeros(2), E2.tangent([0, 0], [1, 0]), 1.0
    )
    assert rep.lhs == pytest.approx(np.pi, abs=1e-10)
    assert rep.rhs == pytest.approx(np.pi, abs=1e-10)


def test_moving_ball_bump(bump):
    p = np.array([0.5, 0.5])
    u = catalog.get_field("x-plus-y", bump)
    rep = identities.moving_ball_derivative_check(bump, u, p, bump.orthonormal_basis(p)[0], 0.8)
    assert rep.passed and abs(rep.lhs) > 0.1


# -- Proposition 3.1 ------------------------------------------------------------


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_prop31_euclidean(r):
    u = catalog.get_field("linear-x", E2)
    rep = identities.prop31_residual(
        E2, u, np.array([0.7, -0.3]), E2.tangent([0.7, -0.3], [1, 0]), r
    )
    assert rep.lhs == 1.0
    assert rep.rhs == pytest.approx(1.0, abs=1e-12)


def test_prop31_busemann_is_radius_independent():
    u = catalog.get_field("busemann-exp", H2)
    for X, expected, tol in (([0, 1, 0], 1.0, 1e-4), ([0, 0, 1], 0.0, 1e-6)):
        lhs = []
        for r in (0.5, 1.0, 2.0):
            rep = identities.prop31_residual(H2, u, O, H2.tangent(O, X), r)
            assert rep.passed
            assert abs(rep.rhs - expected) <= tol
            lhs.append(rep.lhs)
        assert lhs[0] == lhs[1] == lhs[2] == pytest.approx(expected, abs=1e-15)


def test_prop31_busemann_exponential_along_geodesic():
    # u along c(t) = exp(t e1) is e^t, so the finite-difference derivative is 1
    u = catalog.get_field("busemann-exp", H2)
    plain = ScalarField(u.name, u.evaluate, claims_mvp=True)
    assert identities.directional_derivative(
        H2, plain, O, H2.tangent(O, [0, 1, 0])
    ) == pytest.approx(1.0, abs=1e-9)


def test_prop31_requires_mvp():
    u = catalog.get_field("square-x", E2)
    with pytest.raises(PreconditionError):
        identities.prop31_residual(E2, u, np.zeros(2), E2.tangent([0, 0], [1, 0]), 1.0)


# -- constant-field identity ----------------------------------------------------


def test_constant_identity_examples(bump):
    rep = identities.constant_field_identity(E2, np.zeros(2), E2.tangent([0, 0], [1, 0]), 1.0)
    assert rep.lhs == 0.0 and rep.rhs == 0.0 and rep.passed
    p = np.array([1.5, 0.0])
    rep = identities.constant_field_identity(bump, p, bump.orthonormal_basis(p)[0], 1.0)
    assert rep.passed and abs(rep.lhs) > 1e-3
    s2 = catalog.get_manifold("sphere2")
    p = catalog.base_point(s2, (0.36, 0.48, 0.8))
    rep = identities.constant_field_identity(s2, p, s2.orthonormal_basis(p)[0], 2.0)
    assert rep.passed


# -- bounds -------------------------------------------------------------------


def test_gradient_bound_examples():
    c = catalog.get_field("constant", H2)
    assert identities.gradient_bound_check(H2, c, O, 1.0).passed
    u = catalog.get_field("linear-x", E2)
    rep = identities.gradient_bound_check(E2, u, np.zeros(2), 1.0)
    assert rep.lhs == 1.0 and rep.rhs == pytest.approx(24.0, rel=1e-14) and rep.passed
    b = catalog.get_field("busemann-exp", H2)
    assert identities.gradient_bound_check(H2, b, O, 2.0).passed


def test_gradient_bound_preconditions():
    no_bound = ScalarField("u", lambda q: q[..., 0], claims_mvp=True)
    with pytest.raises(PreconditionError):
        identities.gradient_bound_check(E2, no_bound, np.zeros(2), 1.0)
    with pytest.raises(PreconditionError):
        identities.gradient_bound_check(E2, catalog.get_field("square-x", E2), np.zeros(2), 1.0)


def test_hnorm_bound_examples(bump):
    assert identities.hnorm_bound_check(E2, np.zeros(2), 1.0).passed
    rep = identities.hnorm_bound_check(bump, np.array([1.5, 0.0]), 1.0)
    assert rep.passed and rep.lhs < rep.rhs and rep.lhs > 0
    rep = identities.hnorm_bound_check(H2, O, 10.0)
    assert rep.passed and rep.rhs == pytest.approx(2 * np.pi * np.sinh(10), rel=1e-10)


# -- K_infinity -----------------------------------------------------------------


def test_kinfinity_euclidean():
    scan = identities.kinfinity_scan(E2, np.zeros(2), [10, 25, 50, 100])
    np.testing.assert_allclose(scan.ratios, [0.2, 0.08, 0.04, 0.02], rtol=1e-12)
    assert scan.classification == "vanishing" and scan.trend == "decreasing"


def test_kinfinity_hyperbolic():
    r = np.array([2.0, 5.0, 8.0, 10.0])
    scan = identities.kinfinity_scan(H2, O, r)
    np.testing.assert_allclose(scan.ratios, 1 / np.tanh(r / 2), rtol=1e-10)
    assert scan.classification == "bounded_nonzero"
    assert abs(scan.extrapolated_limit - 1.0) <= 1e-3


def test_kinfinity_sphere_is_domain_limited():
    s2 = catalog.get_manifold("sphere2")
    scan = identities.kinfinity_scan(s2, [0, 0, 1], [1.0, 2.0, 3.0])
    assert scan.domain_limited and scan.trend == "decreasing" and np.all(scan.ratios > 0)
    with pytest.raises(PreconditionError):
        identities.kinfinity_scan(s2, [0, 0, 1], [1.0, 2.0, 3.5])


def test_kinfinity_needs_increasing_radii():
    with pytest.raises(PreconditionError):
        identities.kinfinity_scan(E2, np.zeros(2), [2.0, 1.0])
    with pytest.raises(PreconditionError):
        identities.kinfinity_scan(E2, np.zeros(2), [2.0])


def test_kinfinity_unbounded_class():
    # ratios that neither settle nor vanish: a small radius range on H^2
    scan = identities.kinfinity_scan(H2, O, [0.5, 1.0])
    assert scan.classification == "unbounded"


@given(r=st.floats(0.2, 3.0))
def test_hnorm_bound_always_holds_on_hyperboloid3(r):
    m = catalog.get_manifold("hyperboloid3")
    assert isinstance(m, Hyperboloid)
    p = catalog.base_point(m, (0.3, 0.5, -0.4))
    assert identities.hnorm_bound_check(m, p, r, Quadrature(polar=8, azimuth=16, radial=8)).passed
