import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from horolab import catalog, integrals
from horolab.acceptance import CONFIG_POINTS
from horolab.errors import ContractViolation, DomainError
from horolab.integrals import Quadrature
from horolab.manifolds import ConformalSurface
from oracles import chart_ball_quadrature, monte_carlo_h

BUMP_P = np.array([1.5, 0.0])


def one(points):
    return np.ones(points.shape[:-1])


# -- grids and rules ----------------------------------------------------------


@pytest.mark.parametrize("dim,total", [(2, 2 * np.pi), (3, 4 * np.pi)])
def test_direction_grid_weights(dim, total):
    g = integrals.direction_grid(dim)
    assert abs(g.weights.sum() - total) <= 1e-12
    assert np.all(g.weights > 0)
    np.testing.assert_allclose(np.linalg.norm(g.directions, axis=1), 1.0, atol=1e-15)
    half = len(g.directions) // 2
    np.testing.assert_array_equal(g.directions[half:], -g.directions[:half])


def test_odd_quadrature_order_is_rejected():
    with pytest.raises(ContractViolation):
        Quadrature(directions=7)


@given(order=st.integers(1, 40), r=st.floats(0.1, 10), seed=st.integers(0, 2**31))
def test_radial_rule_exactness(order, r, seed):
    rule = integrals.radial_rule(r, order)
    assert np.all((rule.nodes > 0) & (rule.nodes < r)) and np.all(rule.weights > 0)
    c = np.random.default_rng(seed).normal(size=2 * order)
    # integrate sum c_k (s/r)^k exactly: r * sum c_k / (k+1)
    exact = r * np.sum(c / np.arange(1, 2 * order + 1))
    approx = np.sum(rule.weights * np.polynomial.polynomial.polyval(rule.nodes / r, c))
    assert abs(approx - exact) <= 1e-12 * max(1.0, r * np.sum(np.abs(c)))


# -- closed forms -------------------------------------------------------------


def test_sphere_integral_examples():
    e2, h2, s2 = (catalog.get_manifold(n) for n in ("euclidean2", "hyperboloid2", "sphere2"))
    assert integrals.sphere_integral_scalar(e2, np.zeros(2), 2.0, one) == pytest.approx(
        4 * np.pi, rel=1e-14
    )
    assert integrals.area(h2, h2.origin(), 1.0) == pytest.approx(2 * np.pi * np.sinh(1), rel=1e-14)
    assert integrals.area(s2, [0, 0, 1], np.pi / 2) == pytest.approx(2 * np.pi, rel=1e-14)


def test_polygonal_arc_length():
    # brute-force oracle for the circle length
    t = np.linspace(0, 2 * np.pi, 200001)
    pts = 2.0 * np.column_stack([np.cos(t), np.sin(t)])
    length = np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1))
    e2 = catalog.get_manifold("euclidean2")
    assert integrals.area(e2, np.zeros(2), 2.0) == pytest.approx(length, rel=1e-9)


def test_ball_integral_examples():
    e2, h2 = catalog.get_manifold("euclidean2"), catalog.get_manifold("hyperboloid2")
    assert integrals.volume(e2, np.zeros(2), 2.0) == pytest.approx(4 * np.pi, rel=1e-14)
    assert integrals.volume(h2, h2.origin(), 1.0) == pytest.approx(
        2 * np.pi * (np.cosh(1) - 1), rel=1e-14
    )


def test_grid_counting_volume():
    h = 1e-3
    x = np.arange(-2, 2, h) + h / 2
    X, Y = np.meshgrid(x, x)
    count = np.count_nonzero(X * X + Y * Y < 4.0) * h * h
    e2 = catalog.get_manifold("euclidean2")
    assert integrals.volume(e2, np.zeros(2), 2.0) == pytest.approx(count, rel=1e-4)


@given(a=st.floats(-5, 5), b=st.floats(-5, 5), r=st.floats(0.1, 4))
def test_linear_ball_integral(a, b, r):
    e2 = catalog.get_manifold("euclidean2")
    val = integrals.ball_integral(e2, np.array([a, b]), r, lambda q: q[..., 0])
    assert abs(val - a * np.pi * r * r) <= 1e-10 * max(1.0, abs(a) * np.pi * r * r)


@pytest.mark.parametrize(
    "name", ["euclidean2", "euclidean3", "hyperboloid2", "hyperboloid3", "sphere2"]
)
def test_homogeneous_vector_integrals_vanish(name):
    m = catalog.get_manifold(name)
    p = catalog.base_point(m, CONFIG_POINTS[name][-1])
    for r in (0.5, 2.0):
        assert np.linalg.norm(integrals.stability_radial_derivative(m, p, r).components) <= 1e-10
        assert np.linalg.norm(integrals.stability_field(m, p, r).components) <= 1e-10


@pytest.mark.parametrize("name", ["euclidean2", "hyperboloid2", "hyperboloid3"])
def test_volume_gradient_vanishes_on_homogeneous_models(name):
    m = catalog.get_manifold(name)
    p = catalog.base_point(m, CONFIG_POINTS[name][-1])
    g = integrals.grad_volume_fd(m, p, 1.0)
    assert np.max(np.abs(m.coefficients(p, g))) <= (1e-9 if m.kind == "euclidean" else 1e-8)


# -- the bump surface ---------------------------------------------------------


@pytest.fixture(scope="module")
def bump_report(bump):
    return integrals.stability_report(bump, BUMP_P, 1.0)


@pytest.fixture(scope="module")
def chart_oracle(bump):
    return chart_ball_quadrature(bump, BUMP_P, 1.0)


def test_bump_volume_and_h_against_chart_quadrature(bump, bump_report, chart_oracle):
    V, H = chart_oracle
    assert bump_report.V == pytest.approx(V, rel=1e-9)
    c = bump.coefficients(BUMP_P, bump_report.H)
    np.testing.assert_allclose(c, H, atol=1e-9 * bump_report.V)
    # the ball reaches further along +x, where the curvature is negative
    assert c[0] > 1e-3


def test_bump_h_against_monte_carlo(bump, bump_report):
    est, se = monte_carlo_h(bump, BUMP_P, 1.0, n_pairs=4000, seed=2024)
    c = bump.coefficients(BUMP_P, bump_report.H)
    assert np.all(np.abs(est - c) <= 3 * se)


def test_bump_radial_derivative_against_finite_difference(bump, bump_report):
    h = 1e-4
    plus = integrals.stability_field(bump, BUMP_P, 1.0 + h).components
    minus = integrals.stability_field(bump, BUMP_P, 1.0 - h).components
    fd = (plus - minus) / (2 * h)
    assert np.linalg.norm(bump_report.dH_dr.components) > 1e-3
    np.testing.assert_allclose(bump_report.dH_dr.components, fd, atol=1e-6)


def test_bump_volume_gradient_richardson(bump):
    g1 = bump.coefficients(BUMP_P, integrals.grad_volume_fd(bump, BUMP_P, 1.0, h=1e-3))
    g2 = bump.coefficients(BUMP_P, integrals.grad_volume_fd(bump, BUMP_P, 1.0, h=5e-4))
    assert np.linalg.norm(g1) > 1e-3
    np.testing.assert_allclose(g1, g2, atol=1e-6)


def test_report_matches_individual_operations(bump, bump_report):
    assert bump_report.V == pytest.approx(integrals.volume(bump, BUMP_P, 1.0), rel=1e-13)
    assert bump_report.A == pytest.approx(integrals.area(bump, BUMP_P, 1.0), rel=1e-13)
    np.testing.assert_allclose(
        bump_report.H.components,
        integrals.stability_field(bump, BUMP_P, 1.0).components,
        rtol=1e-12,
    )
    assert bump_report.grid_order == 256 and bump_report.radial_order == 64


def test_results_are_bitwise_reproducible(bump):
    a = integrals.stability_report(bump, BUMP_P, 0.7)
    b = integrals.stability_report(bump, BUMP_P.copy(), 0.7)
    assert a.H.components.tobytes() == b.H.components.tobytes()
    assert a.V == b.V and a.A == b.A


# -- properties over the catalog ---------------------------------------------

CONFIGS = [
    ("euclidean3", (0.4, -0.2, 0.9), 2.0),
    ("hyperboloid2", (0.6, -0.8), 2.0),
    ("hyperboloid3", (0.3, 0.5, -0.4), 1.0),
    ("sphere2", (0.36, 0.48, 0.8), 2.0),
    ("bump-surface", (1.5, 0.0), 1.0),
    ("wave-surface", (0.5, 1.0), 2.0),
]


@pytest.mark.parametrize("name,coords,r", CONFIGS)
def test_grid_convergence(name, coords, r):
    m = catalog.get_manifold(name)
    p = catalog.base_point(m, coords)
    base = integrals.stability_report(m, p, r)
    fine = integrals.stability_report(
        m, p, r, Quadrature(directions=512, polar=64, azimuth=128, radial=64)
    )
    assert abs(fine.V - base.V) <= 1e-8 * base.V
    assert abs(fine.A - base.A) <= 1e-8 * base.A
    assert np.linalg.norm(fine.H.components - base.H.components) <= 1e-8 * r * base.V


@pytest.mark.parametrize("name,coords,r", CONFIGS)
def test_coarea_and_coherence(name, coords, r):
    m = catalog.get_manifold(name)
    p = catalog.base_point(m, coords)
    rep = integrals.stability_report(m, p, r)
    h = 1e-4
    dV = (integrals.volume(m, p, r + h) - integrals.volume(m, p, r - h)) / (2 * h)
    assert dV == pytest.approx(rep.A, rel=1e-6)
    assert np.sqrt(max(m.metric_inner(p, rep.dH_dr, rep.dH_dr), 0.0)) <= r * rep.A * (1 + 1e-12)
    assert rep.V > 0 and rep.A > 0
    nodes = integrals.ball_nodes(m, p, r)
    assert np.all(nodes.density > 0)


def test_radius_guards():
    s2 = catalog.get_manifold("sphere2")
    with pytest.raises(DomainError):
        integrals.area(s2, [0, 0, 1], np.pi)
    with pytest.raises(ContractViolation):
        integrals.volume(catalog.get_manifold("euclidean2"), np.zeros(2), 0.0)
    with pytest.raises(ContractViolation):
        integrals.grad_volume_fd(s2, [0, 0, 1], 1.0, h=0.0)


def test_vector_field_integral_with_custom_field():
    e2 = catalog.get_manifold("euclidean2")
    # F(q) = (1, 0) everywhere in T_p: integral is the circumference times e1
    v = integrals.sphere_integral_vector(
        e2, np.zeros(2), 1.5, lambda pts, logs: np.broadcast_to([1.0, 0.0], logs.shape)
    )
    np.testing.assert_allclose(v.components, [3 * np.pi, 0], atol=1e-13)
    assert isinstance(catalog.get_manifold("bump-surface"), ConformalSurface)
