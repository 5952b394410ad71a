"""Built-in acceptance criteria, run by ``horolab verify-all``.

Each criterion is a function returning a list of CSV rows (same columns as
the batch runner) plus a one-line detail. A criterion passes when every row
passes, any extra structural condition holds, and it finishes inside its
wall-time budget.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import catalog, identities, integrals
from .errors import AccuracyError, DomainError
from .manifolds import TangentVector
from .runner import failed_row, fmt, report_row, write_csv

SEED = 20240611


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    elapsed: float
    budget: float
    rows: list
    detail: str = ""

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        n_ok = sum(r["passed"] == "true" for r in self.rows)
        return (
            f"[{status}] criterion {self.number}: {self.title} "
            f"({n_ok}/{len(self.rows)} rows, {self.elapsed:.1f}s of {self.budget:.0f}s)"
            + (f" - {self.detail}" if self.detail else "")
        )


def compare_row(
    suite, manifold, point, radius, direction, field, lhs, rhs, tol, floor=identities.REL_FLOOR
):
    """Row for a relative comparison ``|lhs - rhs| / max(|lhs|, |rhs|, floor) <= tol``."""
    a = np.atleast_1d(np.asarray(lhs, dtype=float))
    b = np.atleast_1d(np.asarray(rhs, dtype=float))
    abs_res = float(np.linalg.norm(a - b))
    rel = abs_res / max(float(np.linalg.norm(a)), float(np.linalg.norm(b)), floor)
    return {
        "suite": suite,
        "manifold": manifold,
        "point": fmt(point),
        "radius": fmt(radius),
        "direction": "-" if direction is None else fmt(direction),
        "field": field or "-",
        "lhs": fmt(lhs),
        "rhs": fmt(rhs),
        "abs_residual": fmt(abs_res),
        "rel_residual": fmt(rel),
        "tolerance": fmt(tol),
        "passed": fmt(rel <= tol),
    }


def _all_pass(rows):
    return all(r["passed"] == "true" for r in rows)


def _guarded(suite, m, p, r, X, u, fn):
    """Run one identity check, turning numerical failures into failed rows."""
    try:
        return report_row(suite, fn())
    except (AccuracyError, DomainError) as exc:
        comps = None if X is None else X.components
        return failed_row(suite, m, p, r, comps, u.name if u else None, exc)


# -- the catalog configurations used by several criteria -----------------------

CONFIG_POINTS = {
    "euclidean2": [None, (0.7, -0.3)],
    "euclidean3": [None, (0.4, -0.2, 0.9)],
    "hyperboloid2": [None, (0.6, -0.8)],
    "hyperboloid3": [None, (0.3, 0.5, -0.4)],
    "sphere2": [None, (0.36, 0.48, 0.8)],
    "bump-surface": [(1.5, 0.0), (0.6, 0.9)],
    "wave-surface": [(0.5, 1.0), (1.2, -0.4)],
}
CONFIG_RADII = (0.5, 1.0, 2.0)


def _generic_direction(m, p, angle=0.3):
    """Unit vector ``cos(a) e1 + sin(a) e2``; avoids symmetry-induced exact zeros."""
    E = m.orthonormal_basis(p)
    return TangentVector(p, np.cos(angle) * E[0].components + np.sin(angle) * E[1].components)


def catalog_configurations():
    for name in catalog.MANIFOLDS:
        m = catalog.get_manifold(name)
        for coords in CONFIG_POINTS[name]:
            p = catalog.base_point(m, coords)
            for r in CONFIG_RADII:
                yield m, p, r


# -- criteria -----------------------------------------------------------------


def criterion_1():
    """Closed-form volumes and areas on R^2, H^2 and S^2."""
    closed = {
        "euclidean2": (lambda r: np.pi * r * r, lambda r: 2 * np.pi * r),
        "hyperboloid2": (lambda r: 2 * np.pi * (np.cosh(r) - 1), lambda r: 2 * np.pi * np.sinh(r)),
        "sphere2": (lambda r: 2 * np.pi * (1 - np.cos(r)), lambda r: 2 * np.pi * np.sin(r)),
    }
    rows = []
    for name, (V, A) in closed.items():
        m = catalog.get_manifold(name)
        p = catalog.base_point(m)
        for r in (0.5, 1.0, 2.0):
            rep = integrals.stability_report(m, p, r)
            rows.append(compare_row("volume", name, p, r, None, None, rep.V, V(r), 1e-8))
            rows.append(compare_row("area", name, p, r, None, None, rep.A, A(r), 1e-8))
    return rows, ""


def _disk_point(x):
    """Inverse of the disk-to-hyperboloid chart map."""
    return x[1:] / (1.0 + x[0])


def criterion_2(n_configs=20):
    """Numerical geodesics on the Poincare disk against hyperboloid closed forms."""
    H = catalog.get_manifold("hyperboloid2")
    D = catalog.poincare_disk()
    rng = np.random.default_rng(SEED)
    rows = []
    tol = 1e-6
    for k in range(n_configs):
        # centre within distance 1 of the origin, q at distance r <= 3 from it
        o = H.origin()
        a = rng.uniform(0, 2 * np.pi)
        p = H.exp_map(o, H.tangent(o, rng.uniform(0, 1) * np.array([0.0, np.cos(a), np.sin(a)])))
        b = rng.uniform(0, 2 * np.pi)
        r = rng.uniform(0.2, 3.0)
        E = H.orthonormal_basis(p)
        u = np.cos(b) * E[0].components + np.sin(b) * E[1].components
        q = H.exp_map(p, H.tangent(p, r * u))
        zp, zq = _disk_point(p), _disk_point(q)
        label = f"config-{k}"
        pt = np.concatenate([zp, zq])
        try:
            v = D.log_map(zp, zq)
            rows.append(
                compare_row(
                    "distance",
                    "poincare-disk",
                    pt,
                    r,
                    None,
                    label,
                    D.norm(zp, v),
                    H.distance(p, q),
                    tol,
                )
            )
            log_h = H.log_map(p, q).components
            rows.append(
                compare_row(
                    "log",
                    "poincare-disk",
                    pt,
                    r,
                    None,
                    label,
                    catalog.disk_vector_to_hyperboloid(zp, v.components),
                    log_h,
                    tol,
                )
            )
            # unit direction at angle b in the disk's orthonormal frame
            c = np.array([np.cos(b), np.sin(b)])
            dens = D.volume_density(zp, D.from_coefficients(zp, c), r)
            rows.append(
                compare_row("density", "poincare-disk", zp, r, c, label, dens, np.sinh(r), tol)
            )
            w = rng.normal(size=2)
            wd = D.tangent(zp, w)
            moved = D.parallel_transport(zp, zq, wd)
            w_h = H.parallel_transport(
                p, q, H.tangent(p, catalog.disk_vector_to_hyperboloid(zp, w))
            )
            rows.append(
                compare_row(
                    "transport",
                    "poincare-disk",
                    pt,
                    r,
                    w,
                    label,
                    catalog.disk_vector_to_hyperboloid(zq, moved.components),
                    w_h.components,
                    tol,
                )
            )
        except (AccuracyError, DomainError) as exc:
            rows.append(failed_row("distance", D, pt, r, None, label, exc))
    return rows, f"{n_configs} seeded configurations"


LEMMA21_POINTS = {
    "bump-surface": [(1.5, 0.0), (0.6, 0.9), (-1.1, 1.7)],
    "wave-surface": [(0.5, 1.0), (1.2, -0.4), (-0.7, 2.0)],
}


def criterion_3():
    """Volume gradient against (1/r) dH/dr on the two non-homogeneous surfaces."""
    rows = []
    notes = []
    ok = True
    for name, points in LEMMA21_POINTS.items():
        m = catalog.get_manifold(name)
        biggest = 0.0
        for coords in points:
            p = np.array(coords)
            for r in (0.3, 0.6, 1.0):
                row = _guarded(
                    "lemma21", m, p, r, None, None, lambda: identities.lemma21_residual(m, p, r)
                )
                rows.append(row)
                if row["rhs"] != "nan":
                    biggest = max(
                        biggest, float(np.linalg.norm([float(c) for c in row["rhs"].split(";")]))
                    )
        notes.append(f"{name} max|rhs|={biggest:.3g}")
        ok = ok and biggest > 1e-6
    return rows, "; ".join(notes), ok


def criterion_4():
    """Moving-ball derivative for fields without the mean-value property."""
    configs = [
        ("euclidean2", (0.7, -0.3), "square-x", 1.0),
        ("euclidean3", (0.4, -0.2, 0.9), "wave-field", 1.0),
        ("hyperboloid2", (0.6, -0.8), "square-x", 1.0),
        ("hyperboloid3", (0.3, 0.5, -0.4), "wave-field", 0.8),
        ("sphere2", (0.36, 0.48, 0.8), "wave-field", 1.0),
        ("bump-surface", (0.5, 0.5), "x-plus-y", 0.8),
        ("wave-surface", (0.5, 1.0), "square-x", 0.6),
    ]
    rows = []
    for name, coords, fname, r in configs:
        m = catalog.get_manifold(name)
        p = catalog.base_point(m, coords)
        u = catalog.get_field(fname, m)
        X = m.orthonormal_basis(p)[0]
        rows.append(
            _guarded(
                "moving-ball",
                m,
                p,
                r,
                X,
                u,
                lambda: identities.moving_ball_derivative_check(m, u, p, X, r),
            )
        )
    # analytic case: u = x on R^2, p = 0, X = e1, r = 1 gives pi on both sides
    m = catalog.get_manifold("euclidean2")
    p = np.zeros(2)
    u = catalog.get_field("linear-x", m)
    X = m.tangent(p, [1.0, 0.0])
    rep = identities.moving_ball_derivative_check(m, u, p, X, 1.0)
    rows.append(report_row("moving-ball", rep))
    rows.append(
        compare_row(
            "moving-ball-analytic", m.name, p, 1.0, X.components, u.name, rep.lhs, np.pi, 1e-10
        )
    )
    rows.append(
        compare_row(
            "moving-ball-analytic", m.name, p, 1.0, X.components, u.name, rep.rhs, np.pi, 1e-10
        )
    )
    return rows, ""


def criterion_5():
    """Derivative formula for mean-value fields, independent of the radius."""
    rows = []
    m = catalog.get_manifold("euclidean2")
    p = np.array([0.7, -0.3])
    u = catalog.get_field("linear-x", m)
    X = m.tangent(p, [1.0, 0.0])
    for r in (0.5, 1.0, 2.0):
        rows.append(report_row("prop31", identities.prop31_residual(m, u, p, X, r, tolerance=1e-8)))
        rows.append(
            compare_row(
                "prop31-lhs", m.name, p, r, X.components, u.name, float(rows[-1]["lhs"]), 1.0, 1e-8
            )
        )
    H = catalog.get_manifold("hyperboloid2")
    o = H.origin()
    b = catalog.get_field("busemann-exp", H)
    for X, expected in (((0.0, 1.0, 0.0), 1.0), ((0.0, 0.0, 1.0), 0.0)):
        X = H.tangent(o, X)
        for r in (0.5, 1.0, 2.0):
            rep = identities.prop31_residual(H, b, o, X, r)
            rows.append(report_row("prop31", rep))
            rows.append(
                compare_row(
                    "prop31-lhs",
                    H.name,
                    o,
                    r,
                    X.components,
                    b.name,
                    rep.lhs,
                    expected,
                    1e-4,
                    floor=1.0,
                )
            )
    return rows, ""


def criterion_6():
    """Constant-field identity on every catalog configuration (shared sphere nodes)."""
    rows = []
    for m, p, r in catalog_configurations():
        X = _generic_direction(m, p)
        rows.append(
            _guarded(
                "constant-identity",
                m,
                p,
                r,
                X,
                None,
                lambda: identities.constant_field_identity(m, p, X, r),
            )
        )
    m = catalog.get_manifold("bump-surface")
    p = np.array([1.5, 0.0])
    X = m.orthonormal_basis(p)[0]
    rows.append(report_row("constant-identity", identities.constant_field_identity(m, p, X, 1.0)))
    return rows, ""


def criterion_7():
    """Norm bound on (1/r) dH/dr and the gradient bound for mean-value fields."""
    rows = []
    for m, p, r in catalog_configurations():
        rows.append(
            _guarded(
                "hnorm-bound", m, p, r, None, None, lambda: identities.hnorm_bound_check(m, p, r)
            )
        )
        for fname, (factory, kinds) in catalog.FIELDS.items():
            if m.kind not in kinds:
                continue
            u = factory(m)
            if u.claims_mvp and u.sup_bound is not None:
                rows.append(
                    _guarded(
                        "gradient-bound",
                        m,
                        p,
                        r,
                        None,
                        u,
                        lambda: identities.gradient_bound_check(m, u, p, r),
                    )
                )
    return rows, ""


def criterion_8():
    """Area-to-volume ratios at large radii: vanishing on R^2, bounded away from 0 on H^2."""
    rows = []
    ok = True
    notes = []
    cases = (
        ("euclidean2", (10.0, 25.0, 50.0, 100.0), lambda r: 2.0 / r, 1e-8, "vanishing", None),
        (
            "hyperboloid2",
            (2.0, 5.0, 8.0, 10.0),
            lambda r: 1.0 / np.tanh(r / 2.0),
            1e-3,
            "bounded_nonzero",
            1.0,
        ),
    )
    for name, radii, ref, tol, expected, limit in cases:
        m = catalog.get_manifold(name)
        p = catalog.base_point(m)
        scan = identities.kinfinity_scan(m, p, radii)
        for r, ratio in zip(scan.radii, scan.ratios):
            rows.append(
                compare_row(
                    "kinfty", name, p, r, None, f"K_inf:{scan.classification}", ratio, ref(r), tol
                )
            )
        ok = ok and scan.classification == expected
        if limit is not None:
            rows.append(
                compare_row(
                    "kinfty-limit",
                    name,
                    p,
                    radii[-1],
                    None,
                    f"K_inf:{scan.classification}",
                    scan.extrapolated_limit,
                    limit,
                    1e-3,
                )
            )
        notes.append(f"{name}: {scan.classification} (limit {scan.extrapolated_limit:.6g})")
    return rows, "; ".join(notes), ok


MVP_POINTS = {
    "euclidean2": [None, (0.7, -0.3), (-1.2, 2.0)],
    "euclidean3": [None, (0.4, -0.2, 0.9), (-1.0, 0.5, 0.3)],
    "hyperboloid2": [None, (0.6, -0.8), (-0.5, 1.2)],
    "hyperboloid3": [None, (0.3, 0.5, -0.4), (-0.6, 0.2, 0.8)],
}


def criterion_9():
    """Mean-value certification, and a non-harmonic field that must fail it."""
    rows = []
    for name in catalog.MANIFOLDS:
        m = catalog.get_manifold(name)
        u = catalog.get_field("constant", m)
        for coords in CONFIG_POINTS[name][:1]:
            p = catalog.base_point(m, coords)
            rows.append(
                report_row("mvp-check", identities.mvp_check(m, u, p, 1.0, tolerance=1e-12))
            )
    for name, points in MVP_POINTS.items():
        m = catalog.get_manifold(name)
        harmonic = [
            f for f in ("linear-x", "saddle", "busemann-exp") if m.kind in catalog.FIELDS[f][1]
        ]
        for fname in harmonic:
            u = catalog.get_field(fname, m)
            if not u.claims_mvp:
                continue
            for coords in points:
                p = catalog.base_point(m, coords)
                for r in (0.5, 1.0, 2.0):
                    rows.append(report_row("mvp-check", identities.mvp_check(m, u, p, r)))
    # u = x^2 on R^2 at the origin: ball mean r^2/4 against u(0) = 0
    m = catalog.get_manifold("euclidean2")
    u = catalog.get_field("square-x", m)
    p = np.zeros(2)
    ok = True
    notes = []
    for r in (0.5, 1.0, 2.0):
        rep = identities.mvp_check(m, u, p, r)
        expected_fail = (not rep.passed) and rep.abs_residual >= r * r / 4.0 - 1e-6
        ok = ok and expected_fail
        row = compare_row(
            "mvp-negative", m.name, p, r, None, u.name, rep.abs_residual, r * r / 4.0, 1e-6
        )
        row["passed"] = fmt(expected_fail)
        rows.append(row)
        notes.append(f"r={r:g}: residual {rep.abs_residual:.6g}")
    return rows, "x^2 fails the check as required (" + ", ".join(notes) + ")", ok


CRITERIA = (
    (1, "closed-form volumes and areas", criterion_1, 5.0),
    (2, "disk geodesics vs hyperboloid closed forms", criterion_2, 60.0),
    (3, "volume gradient identity on curved surfaces", criterion_3, 120.0),
    (4, "moving-ball derivative", criterion_4, 120.0),
    (5, "derivative formula for mean-value fields", criterion_5, 60.0),
    (6, "constant-field identity", criterion_6, 30.0),
    (7, "norm and gradient bounds", criterion_7, 60.0),
    (8, "area-to-volume ratio scans", criterion_8, 60.0),
    (9, "mean-value certification", criterion_9, 30.0),
)


def run_criterion(number):
    for n, title, fn, budget in CRITERIA:
        if n == number:
            break
    else:
        raise KeyError(number)
    t0 = time.perf_counter()
    out = fn()
    elapsed = time.perf_counter() - t0
    rows, detail = out[0], out[1]
    extra_ok = out[2] if len(out) > 2 else True
    passed = _all_pass(rows) and extra_ok and elapsed < budget
    if elapsed >= budget:
        detail = (detail + "; " if detail else "") + "over the time budget"
    return CriterionResult(n, title, passed, elapsed, budget, rows, detail)


def verify_all(out_dir=None, stream=None, numbers=None):
    """Run the criteria in order, print one line each and optionally write CSVs.

    Returns the list of :class:`CriterionResult`.
    """
    results = []
    for n, *_ in CRITERIA:
        if numbers is not None and n not in numbers:
            continue
        res = run_criterion(n)
        results.append(res)
        if out_dir is not None:
            write_csv(res.rows, Path(out_dir) / f"criterion_{n}.csv")
        if stream is not None:
            print(res.line(), file=stream, flush=True)
    return results
