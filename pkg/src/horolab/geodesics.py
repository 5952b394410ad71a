"""Numerical geodesics on conformal surfaces ``g = exp(2 lam) (dx^2 + dy^2)``.

Everything here is vectorized over batches of geodesics: the quadrature
code integrates thousands of polar rays at once with the same fixed-step
classical Runge-Kutta scheme. A geodesic ``t -> exp_p(t v)``, ``t in [0, 1]``,
uses ``DEFAULT_STEPS`` steps whatever the length of ``v``; accuracy is
policed through the drift of the metric speed, and a batch whose drift
exceeds ``DRIFT_TOL`` is re-run with half the step (at most ``MAX_HALVINGS``
times).

With conformal Christoffel symbols the geodesic equations read

    x'' = -lam_x (x'^2 - y'^2) - 2 lam_y x' y'
    y'' = +lam_y (x'^2 - y'^2) - 2 lam_x x' y'
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError, ConjugatePointError, ContractViolation, ShootingError
from .manifolds import TangentVector

DEFAULT_STEPS = 256
DRIFT_TOL = 1e-7
MAX_HALVINGS = 6
FD_JACOBIAN_STEP = 1e-6
SHOOT_TOL = 1e-11
SHOOT_MAX_ITER = 50
CHUNK = 4096


@dataclass(frozen=True, eq=False)
class GeodesicPath:
    t: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    step: float
    energy_drift: float

    @property
    def samples(self):
        return [
            (float(t), x, TangentVector(x, v))
            for t, x, v in zip(self.t, self.positions, self.velocities)
        ]

    @property
    def start(self):
        return self.positions[0]

    @property
    def endpoint(self):
        return self.positions[-1]


@dataclass(frozen=True, eq=False)
class ShootingResult:
    velocity: np.ndarray
    iterations: int
    terminal_error: float


def gauss_curvature(s, p):
    """``K = -exp(-2 lam) * laplacian(lam)``; accepts broadcastable coordinates."""
    p = np.asarray(p, dtype=float)
    x, y = p[..., 0], p[..., 1]
    return -np.exp(-2.0 * s.factor.lam(x, y)) * s.factor.laplacian(x, y)


def _geodesic_accel(gx, gy, vx, vy):
    dot = vx * gx + vy * gy
    v2 = vx * vx + vy * vy
    return v2 * gx - 2.0 * dot * vx, v2 * gy - 2.0 * dot * vy


# States are stored component-first, shape (k, ...), so each component is contiguous.


def _rhs_plain(factor, Y, _):
    x, y, vx, vy = Y
    lam, gx, gy = factor.first_jet(x, y)
    ax, ay = _geodesic_accel(gx, gy, vx, vy)
    return np.array([vx, vy, ax, ay]), lam


def _rhs_jacobi(factor, Y, speed2):
    x, y, vx, vy, j, dj = Y
    lam, gx, gy, lap = factor.jet(x, y)
    ax, ay = _geodesic_accel(gx, gy, vx, vy)
    # unit-speed Jacobi equation j'' + K j = 0 rescaled to the affine parameter,
    # with K = -exp(-2 lam) lap
    return np.array([vx, vy, ax, ay, dj, speed2 * np.exp(-2.0 * lam) * lap * j]), lam


def _rhs_transport(factor, Y, _):
    x, y, vx, vy, wx, wy = Y
    lam, gx, gy = factor.first_jet(x, y)
    ax, ay = _geodesic_accel(gx, gy, vx, vy)
    vg = vx * gx + vy * gy
    wg = wx * gx + wy * gy
    vw = vx * wx + vy * wy
    dY = np.array([vx, vy, ax, ay, -(vg * wx + wg * vx - vw * gx), -(vg * wy + wg * vy - vw * gy)])
    return dY, lam


def _rk4(rhs, factor, Y0, h, n_steps, aux=None, record=False):
    """Fixed-step classical RK4; returns final state, max speed drift and optional track.

    The speed of each accepted state is read off the first stage of the next
    step, so the drift monitor costs no extra metric evaluations.
    """
    Y = Y0
    drift = np.zeros(Y0.shape[1:])
    speed0 = None
    track = [Y0] if record else None
    half = 0.5 * h
    sixth = h / 6.0
    for _ in range(n_steps):
        k1, lam = rhs(factor, Y, aux)
        speed = np.exp(lam) * np.hypot(Y[2], Y[3])
        if speed0 is None:
            speed0 = speed
        else:
            np.maximum(drift, np.abs(speed - speed0), out=drift)
        k2, _ = rhs(factor, Y + half * k1, aux)
        k3, _ = rhs(factor, Y + half * k2, aux)
        k4, _ = rhs(factor, Y + h * k3, aux)
        k2 += k3
        k2 *= 2.0
        k1 += k2
        k1 += k4
        Y = Y + sixth * k1
        if record:
            track.append(Y)
    speed = np.exp(factor.lam(Y[0], Y[1])) * np.hypot(Y[2], Y[3])
    if speed0 is not None:
        drift = np.maximum(drift, np.abs(speed - speed0))
    return Y, drift, track


def _refined(rhs, factor, Y0, T, n_steps, aux=None, record=False):
    for _ in range(MAX_HALVINGS + 1):
        Y, drift, track = _rk4(rhs, factor, Y0, T / n_steps, n_steps, aux, record)
        worst = float(np.max(drift)) if drift.size else 0.0
        if not np.all(np.isfinite(Y)):
            worst = np.inf
        if worst <= DRIFT_TOL:
            return Y, worst, track, n_steps
        n_steps *= 2
    raise AccuracyError(
        f"geodesic speed drift {worst:.3e} exceeds {DRIFT_TOL:g} after {MAX_HALVINGS} step halvings"
    )


def _flow(rhs, factor, Y0, T, n_steps, aux=None):
    """:func:`_refined` over a (k, N) batch, processed in fixed-size column chunks.

    Chunking keeps temporaries small (large numpy temporaries are much slower
    to allocate); chunks are refined independently and results do not depend
    on how many chunks there are.
    """
    N = Y0.shape[1]
    out = np.empty_like(Y0)
    for lo in range(0, N, CHUNK):
        hi = min(lo + CHUNK, N)
        a = None if aux is None else aux[lo:hi]
        out[:, lo:hi] = _refined(rhs, factor, Y0[:, lo:hi], T, n_steps, a)[0]
    return out


def integrate_geodesic(s, p, v, T, step):
    """Integrate the geodesic from ``p`` with chart velocity ``v`` over ``[0, T]``.

    Raises :class:`AccuracyError` when the speed drift exceeds ``DRIFT_TOL``;
    see :func:`integrate_geodesic_refined` for the retrying variant.
    """
    if not step > 0:
        raise ContractViolation("step must be positive")
    p = np.asarray(p, dtype=float)
    v = np.asarray(v.components if isinstance(v, TangentVector) else v, dtype=float)
    n = max(1, int(np.ceil(T / step - 1e-9)))
    h = T / n
    Y0 = np.concatenate([p, v])
    _, drift, track = _rk4(_rhs_plain, s.factor, Y0, h, n, record=True)
    track = np.array(track)
    drift = float(drift)
    if not drift <= DRIFT_TOL:
        raise AccuracyError(f"geodesic speed drift {drift:.3e} exceeds {DRIFT_TOL:g} (step {h:g})")
    return GeodesicPath(
        t=h * np.arange(n + 1),
        positions=track[:, :2],
        velocities=track[:, 2:4],
        step=h,
        energy_drift=drift,
    )


def integrate_geodesic_refined(s, p, v, T, n_steps=DEFAULT_STEPS):
    """:func:`integrate_geodesic` with the halve-and-retry policy."""
    step = T / n_steps
    for _ in range(MAX_HALVINGS + 1):
        try:
            return integrate_geodesic(s, p, v, T, step)
        except AccuracyError as exc:
            last = exc
            step /= 2.0
    raise last


def endpoints(s, p, V, n_steps=DEFAULT_STEPS):
    """``exp_p(v)`` for every row of ``V``."""
    V = np.atleast_2d(np.asarray(V, dtype=float))
    Y0 = np.concatenate([np.broadcast_to(p, V.shape), V], axis=-1).T.copy()
    Y = _flow(_rhs_plain, s.factor, Y0, 1.0, n_steps)
    return Y[:2].T


def exp_point(s, p, v, n_steps=DEFAULT_STEPS):
    return endpoints(s, p, v[None, :], n_steps)[0]


def _segment_steps(radii, n_steps):
    """Steps per segment ``[s_{k-1}, s_k]`` so that every step is at most ``s_k / n_steps``."""
    edges = np.concatenate([[0.0], radii])
    return np.maximum(1, np.ceil(n_steps * np.diff(edges) / radii - 1e-9).astype(int))


def _march(factor, Y0, radii, n_steps):
    """Unit-speed rays with Jacobi fields, stopped at every (sorted) radius.

    Each ray is integrated once through all radii; the step on the segment
    ending at ``s_k`` is at most ``s_k / n_steps``, i.e. no coarser than a
    separate geodesic of length ``s_k`` with ``n_steps`` steps. Speed drift
    is tracked over the whole ray; on excess drift all steps are halved.
    Returns states of shape ``(len(radii), 6, N)``.
    """
    speed2 = np.ones(Y0.shape[1])
    speed0 = _speed(factor, Y0)
    for _ in range(MAX_HALVINGS + 1):
        out = np.empty((len(radii),) + Y0.shape)
        Y, worst, start = Y0, 0.0, 0.0
        for k, (s_k, m_k) in enumerate(zip(radii, _segment_steps(radii, n_steps))):
            if s_k > start:
                offset = np.abs(_speed(factor, Y) - speed0)
                Y, drift, _ = _rk4(_rhs_jacobi, factor, Y, (s_k - start) / m_k, m_k, speed2)
                worst = max(worst, float(np.max(offset + drift)))
            out[k], start = Y, s_k
        if not np.all(np.isfinite(out)):
            worst = np.inf
        if worst <= DRIFT_TOL:
            return out
        n_steps *= 2
    raise AccuracyError(
        f"geodesic speed drift {worst:.3e} exceeds {DRIFT_TOL:g} after {MAX_HALVINGS} step halvings"
    )


def _speed(factor, Y):
    return np.exp(factor.lam(Y[0], Y[1])) * np.hypot(Y[2], Y[3])


def polar_batch(s, p, E, directions, radii, n_steps=DEFAULT_STEPS):
    """Points ``exp_p(r u)`` and polar densities for all radii x unit directions.

    ``directions`` are orthonormal-basis coefficients, ``E`` the basis matrix.
    Returns arrays of shape ``(len(radii), len(directions), 2)`` and
    ``(len(radii), len(directions))``.
    """
    p = np.asarray(p, dtype=float)
    radii = np.asarray(radii, dtype=float)
    U = np.asarray(directions, dtype=float) @ E
    nu = len(U)
    order = np.argsort(radii, kind="stable")
    Y0 = np.concatenate(
        [np.broadcast_to(p, (nu, 2)), U, np.zeros((nu, 1)), np.ones((nu, 1))], axis=-1
    ).T.copy()
    pts = np.empty((len(radii), nu, 2))
    j = np.empty((len(radii), nu))
    for lo in range(0, nu, CHUNK):
        hi = min(lo + CHUNK, nu)
        out = _march(s.factor, Y0[:, lo:hi], radii[order], n_steps)
        pts[order, lo:hi] = np.moveaxis(out[:, :2], 1, -1)
        j[order, lo:hi] = out[:, 4]
    if np.any(j <= 0):
        raise ConjugatePointError(
            f"{s.name}: Jacobi density vanished (conjugate point) around {p.tolist()}"
        )
    return pts, j


def jacobi_density(s, p, phi, r, n_steps=DEFAULT_STEPS):
    """Polar density ``j(r)`` along the unit-speed geodesic leaving ``p`` at angle ``phi``.

    ``phi`` is measured in the orthonormal frame at ``p``.
    """
    if not r > 0:
        raise ContractViolation("radius must be positive")
    p = s.check_point(p)
    _, dens = polar_batch(
        s, p, s.basis_matrix(p), np.array([[np.cos(phi), np.sin(phi)]]), np.array([r]), n_steps
    )
    return float(dens[0, 0])


def _shoot_batch(s, p, Q, tol, max_iter, n_steps):
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    V = Q - p
    end = endpoints(s, p, V, n_steps)
    res = np.linalg.norm(end - Q, axis=1)
    iters = np.ones(len(Q), dtype=int)
    h = FD_JACOBIAN_STEP
    for it in range(2, max_iter + 1):
        active = np.flatnonzero(res > tol)
        if active.size == 0:
            break
        Va, Qa, Ea, Ra = V[active], Q[active], end[active], res[active]
        probes = np.concatenate(
            [Va + h * e for e in np.eye(2)] + [Va - h * e for e in np.eye(2)], axis=0
        )
        P = endpoints(s, p, probes, n_steps).reshape(4, len(active), 2)
        J = np.stack([(P[0] - P[2]) / (2 * h), (P[1] - P[3]) / (2 * h)], axis=-1)
        delta = np.linalg.solve(J, (Qa - Ea)[..., None])[..., 0]
        scale = np.ones(len(active))
        trial_V = Va + delta
        trial_E = endpoints(s, p, trial_V, n_steps)
        trial_R = np.linalg.norm(trial_E - Qa, axis=1)
        for _ in range(30):
            worse = ~(trial_R < Ra)
            if not worse.any():
                break
            scale[worse] *= 0.5
            trial_V[worse] = Va[worse] + scale[worse, None] * delta[worse]
            trial_E[worse] = endpoints(s, p, trial_V[worse], n_steps)
            trial_R[worse] = np.linalg.norm(trial_E[worse] - Qa[worse], axis=1)
        improved = trial_R < Ra
        idx = active[improved]
        V[idx], end[idx], res[idx] = trial_V[improved], trial_E[improved], trial_R[improved]
        iters[active] = it
        if not improved.any():
            break
    return V, iters, res


def shoot_log(s, p, q, tol=SHOOT_TOL, max_iter=SHOOT_MAX_ITER, n_steps=DEFAULT_STEPS):
    """Inverse exponential map by damped Newton shooting from the chart difference ``q - p``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.array_equal(p, q):
        return ShootingResult(np.zeros(2), 0, 0.0)
    V, iters, res = _shoot_batch(s, p, q[None, :], tol, max_iter, n_steps)
    if not res[0] <= tol:
        raise ShootingError(
            f"{s.name}: shooting from {p.tolist()} to {q.tolist()} stalled at residual {res[0]:.3e}",
            best_residual=float(res[0]),
            iterations=int(iters[0]),
        )
    return ShootingResult(V[0], int(iters[0]), float(res[0]))


def shoot_log_batch(s, p, Q, tol=SHOOT_TOL, max_iter=SHOOT_MAX_ITER, n_steps=DEFAULT_STEPS):
    """Vectorized :func:`shoot_log`; returns velocities, iteration counts and residuals."""
    return _shoot_batch(s, np.asarray(p, dtype=float), Q, tol, max_iter, n_steps)


def _metric_norm(factor, x, w):
    return np.exp(factor.lam(x[..., 0], x[..., 1])) * np.hypot(w[..., 0], w[..., 1])


def transport_track(s, path, v):
    """Parallel transport of ``v`` sampled at every node of ``path``."""
    comps = np.asarray(v.components if isinstance(v, TangentVector) else v, dtype=float)
    if isinstance(v, TangentVector) and np.max(np.abs(v.base - path.start)) > 1e-10:
        raise ContractViolation("vector is not based at the start of the path")
    n = len(path.t) - 1
    Y0 = np.concatenate([path.start, path.velocities[0], comps])
    _, _, track = _rk4(_rhs_transport, s.factor, Y0, path.step, n, record=True)
    track = np.array(track)
    norms = _metric_norm(s.factor, track[:, :2], track[:, 4:6])
    drift = float(np.max(np.abs(norms - norms[0])))
    if drift > DRIFT_TOL * max(1.0, norms[0]):
        raise AccuracyError(f"transported norm drifted by {drift:.3e}")
    return track[:, :2], track[:, 4:6]


def transport_along(s, path, v):
    pos, W = transport_track(s, path, v)
    return TangentVector(pos[-1], W[-1])
