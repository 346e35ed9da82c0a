"""
Radial geodesics, parallel frames and Jacobi fields.

A ray from p in unit direction u carries the state

    x (3)   chart position (constant for homogeneous families)
    v (3)   velocity, chart (or frame) components
    E (2×3) parallel orthonormal frame of the plane orthogonal to v
    J (2×2) transverse Jacobi matrix, J[a, b] = ⟨J_b, E_a⟩
    J′ (2×2)

integrated as one flat vector of 20 numbers per ray:

    ẋ = v,  v̇^k = −Γ^k_ij v^i v^j,  Ė_a^k = −Γ^k_ij v^i E_a^j,
    J″ = −R̃ J,  R̃_ab = ⟨R(E_a, v)v, E_b⟩.

Rays are batched: every array below has a leading ray axis, and the whole fan
is advanced interval by interval on a shared sample grid (t0, then equal steps). Each
interval is covered by RK4 substeps whose count doubles until two successive
results agree to the requested tolerance.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from geoball.curvature import geometry_arrays, operator_matrix, ricci_matrix, to_frame
from geoball.errors import ConstraintError, OutOfChart, PastConjugate
from geoball.manifolds.base import TangentVector, frame_matrix

logger = logging.getLogger(__name__)

STATE_SIZE = 20
CONJUGATE_TOL = 1e-8
TOUCH_TOL = 1e-10


@dataclass(frozen=True)
class RayOptions:
    """
    Integration settings shared by every ray of a fan.

    Args:
        t_max: end of the sample grid
        step: target spacing of the sample grid
        t0: where the Jacobi series initial condition is applied
        tol: local error tolerance per sample interval
        allow_beyond_safe: permit t_max above the family's safe_radius
        max_halvings: cap on substep doublings per interval
    """

    t_max: float
    step: float = 0.01
    t0: float = 1e-4
    tol: float = 1e-10
    allow_beyond_safe: bool = False
    max_halvings: int = 12

    def validate(self, family):
        if not self.step > 0:
            raise ConstraintError(f"step must be positive, got step={self.step}")
        if not 0 < self.t0 < self.t_max:
            raise ConstraintError(f"need 0 < t0 < t_max, got t0={self.t0}, t_max={self.t_max}")
        if not self.t0 < 0.5 * min(self.step, self.t_max):
            raise ConstraintError(
                f"t0={self.t0} must lie below the first grid step (step={self.step}, t_max={self.t_max})")
        if self.t_max > family.trusted_radius and not self.allow_beyond_safe:
            raise ConstraintError(
                f"t_max={self.t_max} exceeds safe_radius={family.trusted_radius:.6g} of {family.describe()}; "
                f"set allow_beyond_safe to override")

    def t_grid(self):
        """t0, then n equal steps h = t_max/n ≤ step, so t_max and its round fractions are samples."""
        n = max(2, math.ceil(self.t_max / self.step - 1e-9))
        return np.concatenate([[self.t0], self.t_max * np.arange(1, n + 1) / n])

    @property
    def velocities(self):
        return self.states[:, 3:6]

    @property
    def frames(self):
        return self.states[:, 6:12].reshape(-1, 2, 3)

    @property
    def J(self):
        return self.states[:, 12:16].reshape(-1, 2, 2)

    @property
    def Jprime(self):
        return self.states[:, 16:20].reshape(-1, 2, 2)

    @property
    def trace_shape(self):
        return np.trace(self.shape, axis1=-2, axis2=-1)


def _unpack(y):
    n = y.shape[0]
    return (y[:, 0:3], y[:, 3:6], y[:, 6:12].reshape(n, 2, 3),
            y[:, 12:16].reshape(n, 2, 2), y[:, 16:20].reshape(n, 2, 2))


def _jacobi_curvature(lowered, E, v):
    """R̃_ab = ⟨R(E_a, v)v, E_b⟩ (batched)."""
    return np.einsum("nijkl,nai,nj,nk,nbl->nab", lowered, E, v, v, E)


def make_rhs(family, chart_id):
    """Right-hand side of the ray system for a family in one chart."""
    moving = family.backend != "homogeneous"

    def rhs(y):
        x, v, E, J, Jp = _unpack(y)
        _, gamma, lowered = geometry_arrays(family, x, chart_id)
        dx = v if moving else np.zeros_like(v)
        dv = -np.einsum("nkij,ni,nj->nk", gamma, v, v)
        dE = -np.einsum("nkij,ni,naj->nak", gamma, v, E)
        Rt = _jacobi_curvature(lowered, E, v)
        dJp = -Rt @ J
        n = y.shape[0]
        return np.concatenate([dx, dv, dE.reshape(n, 6), Jp.reshape(n, 4), dJp.reshape(n, 4)], axis=1)

    return rhs


def rk4(rhs, y, h, substeps):
    """Classic RK4 with `substeps` equal steps over a per-ray span h."""
    dt = (np.asarray(h, dtype=float) / substeps)[:, None]
    for _ in range(substeps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * dt * k1)
        k3 = rhs(y + 0.5 * dt * k2)
        k4 = rhs(y + dt * k3)
        y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def advance(rhs, y, h, tol, substeps=1, max_halvings=12):
    """
    Advance every ray by h with RK4, doubling the substep count until the
    step-halving estimate |y_2n − y_n| / 15 (relative to 1 + |y|) is ≤ tol.

    Returns:
        (y_new, substeps used by the accepted coarse solution, error estimate)
    """
    coarse = rk4(rhs, y, h, substeps)
    err = math.inf
    for _ in range(max_halvings):
        fine = rk4(rhs, y, h, 2 * substeps)
        err = float(np.max(np.abs(fine - coarse) / (1.0 + np.abs(fine)))) / 15.0
        if err <= tol:
            return fine, substeps, err
        coarse, substeps = fine, 2 * substeps
    logger.warning("step-halving did not reach tol=%.1e (estimate %.3e with %d substeps)", tol, err, substeps)
    return coarse, substeps, err


def complete_frames(u):
    """
    Orthonormal (E1, E2) completing unit frame-coordinate directions u.

    E1 is the normalized projection of e_z (e_x when |u_z| > 0.9) orthogonal
    to u and E2 = u × E1, so (E1, E2, u) is positively oriented.
    """
    u = np.asarray(u, dtype=float)
    aux = np.zeros_like(u)
    use_x = np.abs(u[:, 2]) > 0.9
    aux[use_x, 0] = 1.0
    aux[~use_x, 2] = 1.0
    e1 = aux - np.sum(aux * u, axis=1)[:, None] * u
    e1 /= np.linalg.norm(e1, axis=1)[:, None]
    e2 = np.cross(u, e1)
    return e1, e2


def _check_inside(family, x, chart_id, t, directions):
    inside = family.in_chart(x, chart_id)
    if not np.all(inside):
        bad = int(np.nonzero(~inside)[0][0])
        raise OutOfChart(f"ray {bad} in direction {tuple(directions[bad])} left chart '{chart_id}' "
                         f"of {family.describe()} before t={t:.6g}")


def _sample_geometry(family, chart_id, y):
    """Jacobi and curvature diagnostics for a batch of states."""
    x, v, E, J, Jp = _unpack(y)
    g, _, lowered = geometry_arrays(family, x, chart_id)
    lam = np.linalg.det(J)
    shape = np.full(J.shape, np.nan)
    ok = lam > 0
    if np.any(ok):
        shape[ok] = Jp[ok] @ np.linalg.inv(J[ok])

    frame = np.concatenate([np.swapaxes(E, 1, 2), v[:, :, None]], axis=2)
    gram = np.einsum("nia,nij,njb->nab", frame, g, frame)
    frame_riemann = to_frame(lowered, frame)
    Rt = frame_riemann[:, :2, 2, 2, :2]
    sec12 = frame_riemann[:, 0, 1, 1, 0]
    ric_radial = np.trace(Rt, axis1=1, axis2=2)
    op = operator_matrix(frame_riemann)
    ric = ricci_matrix(frame_riemann)
    return {
        "lam": lam,
        "shape": shape,
        "sec_tangent": sec12,
        "ric_radial": ric_radial,
        "scal": 2.0 * (sec12 + ric_radial),
        "ric_top": np.linalg.eigvalsh(0.5 * (ric + np.swapaxes(ric, 1, 2)))[:, -1],
        "sec_top": np.linalg.eigvalsh(0.5 * (op + np.swapaxes(op, 1, 2)))[:, -1],
        "speed_drift": np.abs(gram[:, 2, 2] - 1.0),
        "frame_drift": np.max(np.abs(gram - np.eye(3)), axis=(1, 2)),
    }


def _lam_rate(y):
    """λ = det J and λ′ = tr(adj(J)·J′) for states with any leading shape."""
    lead = y.shape[:-1]
    J = y[..., 12:16].reshape(lead + (2, 2))
    Jp = y[..., 16:20].reshape(lead + (2, 2))
    adj = np.empty_like(J)
    adj[..., 0, 0] = J[..., 1, 1]
    adj[..., 0, 1] = -J[..., 0, 1]
    adj[..., 1, 0] = -J[..., 1, 0]
    adj[..., 1, 1] = J[..., 0, 0]
    return np.linalg.det(J), np.trace(adj @ Jp, axis1=-2, axis2=-1)


def _lam_after(rhs, y, h, options):
    out, _, _ = advance(rhs, y, h, options.tol, 1, options.max_halvings)
    return _lam_rate(out)


def _bisect(rhs, y_before, t_before, t_after, options, still_before, tol):
    t_before = np.asarray(t_before, dtype=float)
    lo = t_before.copy()
    hi = np.array(t_after, dtype=float)
    while np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        before = still_before(*_lam_after(rhs, y_before, mid - t_before, options))
        lo = np.where(before, mid, lo)
        hi = np.where(before, hi, mid)
    return 0.5 * (lo + hi)


def locate_conjugate(rhs, y_before, t_before, t_after, options, tol=CONJUGATE_TOL):
    """
    Bisect for the zero of det J between two samples, for a batch of rays.

    Args:
        y_before: states at t_before (λ > 0 there)
        t_before, t_after: per-ray bracketing sample times

    Returns:
        array of conjugate times, accurate to tol
    """
    return _bisect(rhs, y_before, t_before, t_after, options, lambda lam, rate: lam > 0, tol)


def locate_touch(rhs, y_before, t_before, t_after, options, tol=CONJUGATE_TOL):
    """Bisect for the minimum of det J (λ′ = 0); returns (times, λ there)."""
    t = _bisect(rhs, y_before, t_before, t_after, options, lambda lam, rate: rate < 0, tol)
    lam, _ = _lam_after(rhs, y_before, t - np.asarray(t_before, dtype=float), options)
    return t, lam


def find_conjugate_times(rhs, states, t_grid, options):
    """
    First conjugate time of every ray, NaN where there is none on the grid.

    states has shape (T, n, 20). A simple zero of λ = det J is a sign change.
    When both Jacobi fields vanish together λ only touches zero, so each
    interval where λ′ turns from negative to positive is bisected for the
    minimum of λ; a minimum below TOUCH_TOL times the largest earlier λ
    counts as a conjugate point.
    """
    lam, rate = _lam_rate(states)
    T, n = lam.shape
    crossing = lam[1:] <= 0
    sign_k = np.where(np.any(crossing, axis=0), np.argmax(crossing, axis=0) + 1, T)

    conjugate = np.full(n, np.nan)
    turns = (rate[:-1] < 0) & (rate[1:] >= 0) & (lam[:-1] > 0) & (lam[1:] > 0)
    ks, rays = np.nonzero(turns)
    ks = ks + 1
    keep = ks < sign_k[rays]
    ks, rays = ks[keep], rays[keep]
    if ks.size:
        t_min, lam_min = locate_touch(rhs, states[ks - 1, rays], t_grid[ks - 1], t_grid[ks], options)
        peak = np.maximum.accumulate(lam, axis=0)[ks - 1, rays]
        touched = np.nonzero(lam_min <= TOUCH_TOL * peak)[0]
        for j in touched[np.argsort(t_min[touched], kind="stable")]:
            if np.isnan(conjugate[rays[j]]):
                conjugate[rays[j]] = t_min[j]

    pending = np.nonzero(np.isnan(conjugate) & (sign_k < T))[0]
    if pending.size:
        k = sign_k[pending]
        conjugate[pending] = locate_conjugate(rhs, states[k - 1, pending], t_grid[k - 1], t_grid[k], options)
    return conjugate


def frame_directions(family, p, u):
    """Chart components of unit directions given in frame coordinates at p."""
    g, _, _ = family.metric_arrays(p.array(), p.chart_id)
    F = frame_matrix(g)
    return np.einsum("ia,na->ni", F, np.asarray(u, dtype=float)), F


def integrate_fan(family, p, directions, opts, frame_coordinates=False):
    """
    Integrate a batch of radial rays from p.

    Args:
        family: MetricFamily
        p: ChartPoint base point
        directions: (n, 3) unit directions; chart components unless
            frame_coordinates is set, in which case they are components in
            the orthonormal frame at p
        opts: RayOptions

    Returns:
        list of RadialData, one per direction, in input order

    Raises:
        OutOfChart: a ray leaves the chart before t_max
        ConstraintError: invalid options
    """
    opts.validate(family)
    family.check_chart(p)
    chart_id = p.chart_id
    g0, _, _ = family.metric_arrays(p.array(), chart_id)
    F = frame_matrix(g0)
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    if frame_coordinates:
        u = directions
    else:
        # frame components: F⁻¹d = Lᵀd for the Cholesky factor L
        u = np.einsum("ai,ni->na", np.linalg.inv(F), directions)
    norms = np.linalg.norm(u, axis=1)
    if np.max(np.abs(norms - 1.0)) > 1e-8:
        raise ValueError(f"directions must be unit vectors, got norms in [{norms.min():.6g}, {norms.max():.6g}]")
    u = u / norms[:, None]
    e1, e2 = complete_frames(u)

    n = u.shape[0]
    y = np.zeros((n, STATE_SIZE))
    y[:, 0:3] = p.array()
    y[:, 3:6] = u @ F.T
    y[:, 6:9] = e1 @ F.T
    y[:, 9:12] = e2 @ F.T
    chart_dirs = y[:, 3:6].copy()

    rhs = make_rhs(family, chart_id)
    t_grid = opts.t_grid()
    t0 = opts.t0
    y, _, _ = advance(rhs, y, np.full(n, t0), opts.tol, 1, opts.max_halvings)

    # Jacobi series at t0 with the first curvature correction
    _, _, lowered = geometry_arrays(family, y[:, 0:3], chart_id)
    x, v, E, _, _ = _unpack(y)
    Rt = _jacobi_curvature(lowered, E, v)
    eye = np.eye(2)
    y[:, 12:16] = (t0 * eye - t0 ** 3 / 6.0 * Rt).reshape(n, 4)
    y[:, 16:20] = (eye - 0.5 * t0 ** 2 * Rt).reshape(n, 4)

    states = np.empty((len(t_grid), n, STATE_SIZE))
    states[0] = y
    substeps = 1
    worst = 0.0
    for k in range(1, len(t_grid)):
        h = np.full(n, t_grid[k] - t_grid[k - 1])
        y, substeps, err = advance(rhs, y, h, opts.tol, substeps, opts.max_halvings)
        worst = max(worst, err)
        if family.backend != "homogeneous":
            _check_inside(family, y[:, 0:3], chart_id, t_grid[k], chart_dirs)
        states[k] = y
    logger.debug("integrated %d rays of %s to t=%.6g (%d samples, worst local error %.2e)",
                 n, family.describe(), opts.t_max, len(t_grid), worst)

    samples = [_sample_geometry(family, chart_id, states[k]) for k in range(len(t_grid))]
    fields = {key: np.stack([s[key] for s in samples], axis=1) for key in samples[0]}

    conjugate = find_conjugate_times(rhs, states, t_grid, opts)
    hits = int(np.count_nonzero(~np.isnan(conjugate)))
    if hits:
        logger.info("%d of %d rays reach a conjugate point before t=%.6g", hits, n, opts.t_max)

    out = []
    for i in range(n):
        out.append(RadialData(
            family=family,
            options=opts,
            chart_id=chart_id,
            direction=TangentVector(p, chart_dirs[i]),
            t_grid=t_grid,
            states=states[:, i],
            conjugate_t=None if np.isnan(conjugate[i]) else float(conjugate[i]),
            **{key: value[i] for key, value in fields.items()},
        ))
    return out


def integrate_radial(family, p, direction, opts):
    """Integrate one ray; see integrate_fan."""
    return integrate_fan(family, p, direction.array()[None, :], opts)[0]


def shape_operator(rd, t):
    """
    Shape operator S = J′J⁻¹ of the geodesic sphere at distance t.

    Returns:
        (S, tr S, ‖S‖²)

    Raises:
        PastConjugate: t at or past the first conjugate point
    """
    if rd.conjugate_t is not None and t >= rd.conjugate_t:
        raise PastConjugate(f"t={t} is at or past the conjugate point t*={rd.conjugate_t:.10g}")
    if not rd.t_grid[0] <= t <= rd.t_grid[-1]:
        raise ValueError(f"t={t} outside the integrated range [{rd.t_grid[0]}, {rd.t_grid[-1]}]")
    k = int(np.searchsorted(rd.t_grid, t))
    if k < len(rd.t_grid) and rd.t_grid[k] == t:
        S = rd.shape[k]
    else:
        J = CubicSpline(rd.t_grid, rd.J, axis=0)(t)
        Jp = CubicSpline(rd.t_grid, rd.Jprime, axis=0)(t)
        S = Jp @ np.linalg.inv(J)
    sym = 0.5 * (S + S.T)
    return S, float(np.trace(S)), float(np.sum(sym * sym))


def small_t_coefficient(rd, t_small=0.1, t_min=0.01):
    """Samples t in [t_min, t_small] and (tr S(t) − 2/t) / t there."""
    mask = (rd.t_grid <= t_small) & (rd.t_grid >= t_min)
    if rd.conjugate_t is not None:
        mask &= rd.t_grid < rd.conjugate_t
    if not np.any(mask):
        raise ValueError(f"no samples in [{t_min}, {t_small}]; use a finer step")
    t = rd.t_grid[mask]
    return t, (rd.trace_shape[mask] - 2.0 / t) / t


def mean_curvature_small_t_check(rd, t_small=0.1, t_min=0.01):
    """max |tr S(t) − 2/t| / t over samples in [t_min, t_small], the O(t) coefficient of H."""
    _, coefficient = small_t_coefficient(rd, t_small, t_min)
    return float(np.max(np.abs(coefficient)))


def conjugate_point_scan(rd):
    """First conjugate point along the ray, bisected to 1e-8; None if there is none up to t_max."""
    rhs = make_rhs(rd.family, rd.chart_id)
    t = find_conjugate_times(rhs, rd.states[:, None, :], rd.t_grid, rd.options)[0]
    return None if np.isnan(t) else float(t)


def riccati_residual(rd, n_points=10, delta=1e-3):
    """
    max ‖S′ + S² + R̃‖ at n_points interior samples.

    S′ is a five-point central difference of S = J′J⁻¹ resampled at
    t ± delta, t ± 2·delta by integrating from the stored state.
    """
    upper = len(rd.t_grid) - 1
    if rd.conjugate_t is not None:
        upper = int(np.searchsorted(rd.t_grid, rd.conjugate_t)) - 1
    picks = np.unique(np.linspace(upper // 3, upper - 1, n_points).astype(int))
    rhs = make_rhs(rd.family, rd.chart_id)
    offsets = np.array([-2.0, -1.0, 1.0, 2.0]) * delta
    worst = 0.0
    for k in picks:
        y = np.repeat(rd.states[k][None, :], len(offsets), axis=0)
        moved, _, _ = advance(rhs, y, offsets, rd.options.tol, 1, rd.options.max_halvings)
        J = moved[:, 12:16].reshape(-1, 2, 2)
        Jp = moved[:, 16:20].reshape(-1, 2, 2)
        S = Jp @ np.linalg.inv(J)
        dS = (S[0] - 8 * S[1] + 8 * S[2] - S[3]) / (12 * delta)
        x, v, E, _, _ = _unpack(rd.states[k][None, :])
        _, _, lowered = geometry_arrays(rd.family, x, rd.chart_id)
        Rt = _jacobi_curvature(lowered, E, v)[0]
        Sk = rd.shape[k]
        worst = max(worst, float(np.max(np.abs(dS + Sk @ Sk + Rt))))
    return worst
