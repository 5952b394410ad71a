"""Batch experiment runner: config parsing, cell execution and CSV output.

Config files are UTF-8 text with one ``key = value`` per line and ``#``
comments. A ``[section]`` header prefixes the keys below it, so
``[quadrature]`` followed by ``radial = 32`` is the same as
``quadrature.radial = 32``. Recognised keys::

    manifold            catalog name (``manifold.name`` is an alias)
    manifold.<param>    numeric factory parameter, e.g. manifold.a = 0.2
    points              ';'-separated points, coordinates separated by ','
    radii               ','-separated radii
    fields              ','-separated catalog field names
    suites              ','-separated suite names
    directions          'basis' or ','-separated basis indices
    quadrature.{directions,polar,azimuth,radial,steps}
    output              CSV path (relative paths resolve against the config)
"""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import catalog, identities
from .errors import AccuracyError, DomainError, HorolabError, UsageError
from .integrals import Quadrature
from .manifolds import Euclidean, Hyperboloid, Sphere

COLUMNS = (
    "suite",
    "manifold",
    "point",
    "radius",
    "direction",
    "field",
    "lhs",
    "rhs",
    "abs_residual",
    "rel_residual",
    "tolerance",
    "passed",
)

KINFTY_TOL = 1e-6

_QUAD_KEYS = {
    "quadrature.directions": "directions",
    "quadrature.polar": "polar",
    "quadrature.azimuth": "azimuth",
    "quadrature.radial": "radial",
    "quadrature.steps": "geodesic_steps",
}


@dataclass
class ExperimentPlan:
    manifold: str
    points: list
    radii: list
    suites: list
    fields: list = field(default_factory=list)
    directions: list | None = None
    manifold_params: dict = field(default_factory=dict)
    quadrature: Quadrature = field(default_factory=Quadrature)
    output: Path | None = None

    def build_manifold(self):
        return catalog.get_manifold(self.manifold, **self.manifold_params)


# -- parsing --------------------------------------------------------------


def _floats(text, line, key):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}", line, key) from None


def _names(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def parse_config(text, base_dir=None):
    """Parse config text into an :class:`ExperimentPlan` (validated)."""
    entries = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip() or None
            continue
        if "=" not in line:
            raise UsageError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if section:
            key = f"{section}.{key}"
        if key == "manifold.name":
            key = "manifold"
        if key in entries:
            raise UsageError("duplicate key", lineno, key)
        entries[key] = (value, lineno)

    def take(key, default=None):
        return entries.pop(key, (default, None))

    name, ln = take("manifold")
    if name is None:
        raise UsageError("missing required key", None, "manifold")
    if name not in catalog.MANIFOLDS:
        raise UsageError(
            f"unknown manifold {name!r}; known: {', '.join(catalog.MANIFOLDS)}", ln, "manifold"
        )
    params = {}
    for key in [k for k in entries if k.startswith("manifold.")]:
        value, pl = entries.pop(key)
        params[key.split(".", 1)[1]] = _floats(value, pl, key)[0]

    quad_args = {}
    for key, attr in _QUAD_KEYS.items():
        value, ql = take(key)
        if value is not None:
            try:
                quad_args[attr] = int(value)
            except ValueError:
                raise UsageError(f"expected an integer, got {value!r}", ql, key) from None
    try:
        quad = Quadrature(**quad_args)
    except HorolabError as exc:
        raise UsageError(str(exc), None, "quadrature") from None

    suites_text, sl = take("suites")
    if not suites_text:
        raise UsageError("at least one suite is required", sl, "suites")
    suites = _names(suites_text)
    for s in suites:
        if s not in catalog.SUITES:
            raise UsageError(
                f"unknown suite {s!r}; known: {', '.join(catalog.SUITES)}", sl, "suites"
            )

    radii_text, rl = take("radii")
    if radii_text is None:
        raise UsageError("missing required key", None, "radii")
    radii = _floats(radii_text, rl, "radii")
    if not radii:
        raise UsageError("no radii given", rl, "radii")

    points_text, pl = take("points")
    points = []
    if points_text:
        for chunk in points_text.split(";"):
            if chunk.strip():
                points.append(_floats(chunk, pl, "points"))

    fields_text, fl = take("fields")
    fields = _names(fields_text) if fields_text else []

    dirs_text, dl = take("directions", "basis")
    if dirs_text.strip() == "basis":
        directions = None
    else:
        try:
            directions = [int(t) for t in _names(dirs_text)]
        except ValueError:
            raise UsageError(
                "directions must be 'basis' or basis indices", dl, "directions"
            ) from None

    out_text, _ = take("output")
    output = None
    if out_text:
        output = Path(out_text)
        if base_dir is not None and not output.is_absolute():
            output = Path(base_dir) / output

    if entries:
        key, (_, kl) = next(iter(entries.items()))
        raise UsageError("unknown key", kl, key)

    plan = ExperimentPlan(
        manifold=name,
        points=points,
        radii=radii,
        suites=suites,
        fields=fields,
        directions=directions,
        manifold_params=params,
        quadrature=quad,
        output=output,
    )
    validate(plan, lines={"radii": rl, "points": pl, "fields": fl, "directions": dl})
    return plan


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    plan = parse_config(text, base_dir=path.parent)
    if plan.output is None:
        plan.output = path.with_suffix(".csv")
    return plan


def validate(plan, lines=None):
    lines = lines or {}
    try:
        m = plan.build_manifold()
    except TypeError as exc:
        raise UsageError(f"bad manifold parameters: {exc}", None, "manifold") from None
    pts = []
    for coords in plan.points or [None]:
        try:
            pts.append(catalog.base_point(m, coords))
        except HorolabError as exc:
            raise UsageError(str(exc), lines.get("points"), "points") from None
    for r in plan.radii:
        if not r > 0:
            raise UsageError(f"radius {r} must be positive", lines.get("radii"), "radii")
        for p in pts:
            bound = m.injectivity_bound(p)
            if r >= bound:
                raise UsageError(
                    f"radius {r} is not below the injectivity bound {bound:g} of {m.name}",
                    lines.get("radii"),
                    "radii",
                )
    for name in plan.fields:
        try:
            catalog.get_field(name, m)
        except UsageError as exc:
            raise UsageError(str(exc), lines.get("fields"), "fields") from None
    if plan.directions is not None:
        for i in plan.directions:
            if not 0 <= i < m.dim:
                raise UsageError(
                    f"basis index {i} out of range for dim {m.dim}",
                    lines.get("directions"),
                    "directions",
                )
    if "kinfty" in plan.suites:
        if len(plan.radii) < 2 or np.any(np.diff(plan.radii) <= 0):
            raise UsageError(
                "kinfty needs at least two strictly increasing radii", lines.get("radii"), "radii"
            )
    return m, pts


# -- execution ------------------------------------------------------------


def fmt(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, str):
        return x
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        return f"{float(arr):.17g}"
    return ";".join(f"{v:.17g}" for v in arr.ravel())


def report_row(suite, report, direction=None):
    ctx = report.context
    return {
        "suite": suite,
        "manifold": ctx.manifold,
        "point": fmt(np.array(ctx.p)),
        "radius": fmt(ctx.r),
        "direction": fmt(np.array(direction if direction is not None else ctx.X))
        if (direction is not None or ctx.X is not None)
        else "-",
        "field": ctx.field or "-",
        "lhs": fmt(report.lhs),
        "rhs": fmt(report.rhs),
        "abs_residual": fmt(report.abs_residual),
        "rel_residual": fmt(report.rel_residual),
        "tolerance": fmt(report.tolerance),
        "passed": fmt(bool(report.passed)),
    }


def failed_row(suite, m, p, r, X, field_name, exc):
    return {
        "suite": suite,
        "manifold": m.name,
        "point": fmt(p),
        "radius": fmt(r),
        "direction": fmt(X) if X is not None else "-",
        "field": field_name or "-",
        "lhs": "nan",
        "rhs": "nan",
        "abs_residual": "nan",
        "rel_residual": "nan",
        "tolerance": "",
        "passed": "false",
        "error": f"{type(exc).__name__}: {exc}",
    }


def closed_form_ratio(m, r):
    """``A(r) / V(r)`` for the homogeneous models, ``None`` otherwise."""
    n = m.dim
    if isinstance(m, Euclidean):
        return n / r
    if isinstance(m, Hyperboloid) and n == 2:
        return np.sinh(r) / (np.cosh(r) - 1.0)
    if isinstance(m, Hyperboloid) and n == 3:
        return 4.0 * np.sinh(r) ** 2 / (np.sinh(2 * r) - 2 * r)
    if isinstance(m, Sphere) and n == 2:
        return np.sin(r) / (1.0 - np.cos(r))
    return None


def kinfty_rows(m, p, scan):
    rows = []
    for r, ratio in zip(scan.radii, scan.ratios):
        ref = closed_form_ratio(m, r)
        if ref is None:
            rhs, abs_res, rel, ok = float("nan"), float("nan"), float("nan"), bool(ratio > 0)
        else:
            abs_res = abs(ratio - ref)
            rel = abs_res / max(abs(ratio), abs(ref), identities.REL_FLOOR)
            rhs, ok = ref, rel <= KINFTY_TOL
        rows.append(
            {
                "suite": "kinfty",
                "manifold": m.name,
                "point": fmt(p),
                "radius": fmt(r),
                "direction": "-",
                "field": f"K_inf:{scan.classification}",
                "lhs": fmt(ratio),
                "rhs": fmt(rhs),
                "abs_residual": fmt(abs_res),
                "rel_residual": fmt(rel),
                "tolerance": fmt(KINFTY_TOL),
                "passed": fmt(ok),
            }
        )
    return rows


NUMERICAL_ERRORS = (AccuracyError, DomainError)


def _cells(plan, m, pts):
    dirs = range(m.dim) if plan.directions is None else plan.directions
    fields = [catalog.get_field(f, m) for f in (plan.fields or catalog.fields_for(m))]
    cells = []
    for suite in plan.suites:
        for p in pts:
            if suite == "kinfty":
                cells.append((suite, p, None, None, None))
                continue
            for r in plan.radii:
                if suite in ("lemma21", "hnorm-bound"):
                    cells.append((suite, p, r, None, None))
                elif suite == "constant-identity":
                    cells.extend((suite, p, r, i, None) for i in dirs)
                elif suite == "moving-ball":
                    cells.extend((suite, p, r, i, u) for i in dirs for u in fields)
                elif suite == "prop31":
                    cells.extend((suite, p, r, i, u) for i in dirs for u in fields if u.claims_mvp)
                elif suite == "gradient-bound":
                    cells.extend(
                        (suite, p, r, None, u)
                        for u in fields
                        if u.claims_mvp and u.sup_bound is not None
                    )
                elif suite == "mvp-check":
                    # without an explicit field list only fields expected to pass are certified
                    cells.extend(
                        (suite, p, r, None, u) for u in fields if plan.fields or u.claims_mvp
                    )
    return cells


def _run_cell(m, plan, cell):
    suite, p, r, i, u = cell
    q = plan.quadrature
    X = m.orthonormal_basis(p)[i] if i is not None else None
    try:
        if suite == "kinfty":
            return kinfty_rows(m, p, identities.kinfinity_scan(m, p, plan.radii, q))
        if suite == "lemma21":
            rep = identities.lemma21_residual(m, p, r, quad=q)
        elif suite == "hnorm-bound":
            rep = identities.hnorm_bound_check(m, p, r, quad=q)
        elif suite == "constant-identity":
            rep = identities.constant_field_identity(m, p, X, r, quad=q)
        elif suite == "moving-ball":
            rep = identities.moving_ball_derivative_check(m, u, p, X, r, quad=q)
        elif suite == "prop31":
            rep = identities.prop31_residual(m, u, p, X, r, quad=q)
        elif suite == "gradient-bound":
            rep = identities.gradient_bound_check(m, u, p, r, quad=q)
        else:
            rep = identities.mvp_check(m, u, p, r, quad=q)
    except NUMERICAL_ERRORS as exc:
        return [
            failed_row(
                suite, m, p, r, None if X is None else X.components, u.name if u else None, exc
            )
        ]
    return [report_row(suite, rep)]


def worker_count():
    raw = os.environ.get("HOROLAB_THREADS")
    default = min(4, os.cpu_count() or 1)
    if raw is None or raw == "":
        return default
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise UsageError(f"HOROLAB_THREADS must be a positive integer, got {raw!r}")
    return min(n, default) if default else n


@dataclass
class RunResult:
    rows: list
    summary: str

    @property
    def passed(self):
        return all(r["passed"] == "true" for r in self.rows)

    @property
    def exit_status(self):
        return 0 if self.passed else 1


def execute(plan, threads=None):
    """Run every cell of ``plan``; rows come back in plan order."""
    m, pts = validate(plan)
    cells = _cells(plan, m, pts)
    threads = threads or worker_count()
    if threads > 1 and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(lambda c: _run_cell(m, plan, c), cells))
    else:
        chunks = [_run_cell(m, plan, c) for c in cells]
    rows = [row for chunk in chunks for row in chunk]
    return RunResult(rows, summarize(rows))


def summarize(rows):
    n_pass = sum(r["passed"] == "true" for r in rows)
    lines = [f"{len(rows)} rows: {n_pass} passed, {len(rows) - n_pass} failed"]
    classes = sorted(
        {(r["manifold"], r["point"], r["field"]) for r in rows if r["suite"] == "kinfty"}
    )
    for manifold, point, label in classes:
        lines.append(f"kinfty {manifold} at ({point}): {label.split(':', 1)[1]}")
    for r in rows:
        if "error" in r:
            lines.append(f"error in {r['suite']} at ({r['point']}), r={r['radius']}: {r['error']}")
    return "\n".join(lines)


def csv_text(rows):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=COLUMNS, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def write_csv(rows, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(csv_text(rows), encoding="utf-8")
    return path


def run(plan, threads=None):
    """Execute ``plan``, write its CSV (when an output path is set) and return the result."""
    result = execute(plan, threads)
    if plan.output is not None:
        write_csv(result.rows, plan.output)
    return result
