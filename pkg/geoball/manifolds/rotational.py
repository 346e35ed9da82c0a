"""
Rotationally symmetric metrics dr² + f(r)²·(round metric of S²).

The warping function f is piecewise analytic. Two charts are offered:

    cartesian: x ∈ ℝ³ with r = |x|; g = h(s)δ + q(s)xxᵀ where s = |x|²,
               h = f²/r² and q = (1 − h)/s. Regular at the pole, so rays can
               start there. Near the pole h and q are evaluated from their
               power series in s.
    polar:     (r, θ, φ) with g = diag(1, f², f² sin²θ).
"""

import math

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import polynomial as P

from geoball.errors import BadProfile, ConstraintError

from .base import MetricFamily

SERIES_RADIUS = 0.5
SERIES_TERMS = 30


class SnSegment:
    """f = sn_κ(r), the solution of f″ + κf = 0 with f(0) = 0, f′(0) = 1."""

    def __init__(self, kappa):
        self.kappa = float(kappa)

    def evaluate(self, r):
        k = self.kappa
        if k > 0:
            rk = math.sqrt(k)
            f, f1 = np.sin(rk * r) / rk, np.cos(rk * r)
        elif k < 0:
            rk = math.sqrt(-k)
            f, f1 = np.sinh(rk * r) / rk, np.cosh(rk * r)
        else:
            f, f1 = np.array(r, dtype=float), np.ones_like(r, dtype=float)
        return f, f1, -k * f

    def h_coefficients(self):
        """Power series of h(s) = sn_κ(√s)²/s in s."""
        n = np.arange(1, SERIES_TERMS + 1)
        return np.array([(-1.0) ** (m + 1) * 2.0 * (4.0 * self.kappa) ** (m - 1) / math.factorial(2 * m)
                         for m in n])


class PolySegment:
    """Polynomial in u = r − start."""

    def __init__(self, start, coefficients):
        self.start = float(start)
        self.poly = Polynomial(coefficients)
        self._d1 = self.poly.deriv(1)
        self._d2 = self.poly.deriv(2)

    def evaluate(self, r):
        u = np.asarray(r, dtype=float) - self.start
        return self.poly(u), self._d1(u), self._d2(u)


class AffineSegment:
    def __init__(self, alpha, beta):
        self.alpha = float(alpha)
        self.beta = float(beta)

    def evaluate(self, r):
        r = np.asarray(r, dtype=float)
        return self.alpha * r + self.beta, np.full_like(r, self.alpha), np.zeros_like(r)


class RotProfile:
    """
    Piecewise warping function: segments[i] is used on [joins[i-1], joins[i]).

    The first segment must be an SnSegment so that f(0) = 0, f′(0) = 1.
    """

    def __init__(self, segments, joins=()):
        if not segments or not isinstance(segments[0], SnSegment):
            raise BadProfile("a profile must start with an sn segment at the pole")
        if len(joins) != len(segments) - 1:
            raise BadProfile(f"{len(segments)} segments need {len(segments) - 1} joins, got {len(joins)}")
        if any(b <= a for a, b in zip(joins, joins[1:])) or any(j <= 0 for j in joins):
            raise BadProfile(f"joins must be positive and increasing: {list(joins)}")
        self.segments = list(segments)
        self.joins = np.asarray(joins, dtype=float)

    def evaluate(self, r):
        """Return (f, f′, f″) at r (any shape)."""
        r = np.asarray(r, dtype=float)
        index = np.searchsorted(self.joins, r, side="right")
        f = np.zeros_like(r)
        f1 = np.zeros_like(r)
        f2 = np.zeros_like(r)
        for i, segment in enumerate(self.segments):
            mask = index == i
            if np.any(mask):
                vals = segment.evaluate(r[mask])
                f[mask], f1[mask], f2[mask] = vals
        return f, f1, f2

    def join_residuals(self):
        """Largest jump of f, f′, f″ across any join."""
        worst = 0.0
        for i, r in enumerate(self.joins):
            left = np.array(self.segments[i].evaluate(np.array([r])))
            right = np.array(self.segments[i + 1].evaluate(np.array([r])))
            worst = max(worst, float(np.max(np.abs(left - right))))
        return worst

    def first_zero(self):
        """First r > 0 with f(r) = 0, or None if f stays positive."""
        first = self.segments[0]
        end = self.joins[0] if len(self.joins) else math.inf
        if first.kappa > 0 and math.pi / math.sqrt(first.kappa) < end:
            return math.pi / math.sqrt(first.kappa)
        for i, segment in enumerate(self.segments[1:], start=1):
            lo = self.joins[i - 1]
            hi = self.joins[i] if i < len(self.joins) else lo + 50.0
            grid = np.linspace(lo, hi, 2001)
            f, _, _ = segment.evaluate(grid)
            bad = np.nonzero(f <= 0)[0]
            if bad.size:
                return float(grid[bad[0]])
        return None

    def h_q(self, s):
        """
        h(s), q(s) and their first two s-derivatives at s = r².

        Returns:
            (h, h1, h2, q, q1, q2), each shaped like s
        """
        s = np.asarray(s, dtype=float)
        out = [np.zeros_like(s) for _ in range(6)]
        near = s < min(SERIES_RADIUS, self.joins[0] if len(self.joins) else SERIES_RADIUS) ** 2
        if np.any(near):
            hc = self.segments[0].h_coefficients()
            qc = -hc[1:]
            sn = s[near]
            vals = (P.polyval(sn, hc), P.polyval(sn, P.polyder(hc)), P.polyval(sn, P.polyder(hc, 2)),
                    P.polyval(sn, qc), P.polyval(sn, P.polyder(qc)), P.polyval(sn, P.polyder(qc, 2)))
            for arr, val in zip(out, vals):
                arr[near] = val
        far = ~near
        if np.any(far):
            sf = s[far]
            r = np.sqrt(sf)
            f, f1, f2 = self.evaluate(r)
            H = f * f / sf
            H1 = 2 * f * f1 / sf - 2 * f * f / (sf * r)
            H2 = 2 * (f1 * f1 + f * f2) / sf - 8 * f * f1 / (sf * r) + 6 * f * f / (sf * sf)
            h1 = H1 / (2 * r)
            h2 = (H2 - H1 / r) / (4 * sf)
            one_minus = 1.0 - H
            q = one_minus / sf
            q1 = -h1 / sf - one_minus / sf ** 2
            q2 = -h2 / sf + 2 * h1 / sf ** 2 + 2 * one_minus / sf ** 3
            for arr, val in zip(out, (H, h1, h2, q, q1, q2)):
                arr[far] = val
        return tuple(out)


class RotSymmetric(MetricFamily):
    """Rotationally symmetric metric with warping profile f; base point at the pole."""

    name = "rot_symmetric"
    charts = ("cartesian", "polar")

    def __init__(self, profile, spec=None, safe_radius=None):
        self.profile = profile
        self.spec = dict(spec) if spec else {"profile": "sn", "kappa": profile.segments[0].kappa}
        super().__init__(safe_radius)

    @property
    def parameters(self):
        return dict(self.spec)

    def default_safe_radius(self):
        zero = self.profile.first_zero()
        return 3.0 if zero is None else 0.9 * zero

    def in_chart(self, x, chart_id=None):
        x = np.asarray(x, dtype=float)
        ok = np.all(np.isfinite(x), axis=-1)
        zero = self.profile.first_zero()
        if chart_id == "polar":
            ok &= (x[..., 0] > 0) & (x[..., 1] > 0) & (x[..., 1] < math.pi)
            radius = x[..., 0]
        else:
            radius = np.sqrt(np.sum(x * x, axis=-1))
        if zero is not None:
            ok &= radius < zero
        return ok

    def metric_arrays(self, x, chart_id=None):
        if chart_id == "polar":
            return self._polar_arrays(x)
        return self._cartesian_arrays(x)

    def _cartesian_arrays(self, x):
        x = np.asarray(x, dtype=float)
        s = np.sum(x * x, axis=-1)
        h, h1, h2, q, q1, q2 = (v[..., None, None] for v in self.profile.h_q(s))
        eye = np.eye(3)
        xx = x[..., :, None] * x[..., None, :]
        g = h * eye + q * xx

        # dg[i, j, k] = 2h′x_k δ_ij + 2q′x_k x_i x_j + q(δ_ik x_j + δ_jk x_i)
        xk = x[..., None, None, :]
        dg = (2 * h1[..., None] * eye[..., None] * xk
              + 2 * q1[..., None] * xx[..., None] * xk
              + q[..., None] * (np.einsum("ik,...j->...ijk", eye, x) + np.einsum("jk,...i->...ijk", eye, x)))

        xxxx = np.einsum("...i,...j,...k,...l->...ijkl", x, x, x, x)
        e_ij_kl = np.einsum("ij,kl->ijkl", eye, eye)
        d2g = (4 * h2[..., None, None] * np.einsum("ij,...k,...l->...ijkl", eye, x, x)
               + 2 * h1[..., None, None] * e_ij_kl
               + 4 * q2[..., None, None] * xxxx
               + 2 * q1[..., None, None] * (np.einsum("kl,...i,...j->...ijkl", eye, x, x)
                                            + np.einsum("il,...k,...j->...ijkl", eye, x, x)
                                            + np.einsum("jl,...k,...i->...ijkl", eye, x, x)
                                            + np.einsum("ik,...l,...j->...ijkl", eye, x, x)
                                            + np.einsum("jk,...l,...i->...ijkl", eye, x, x))
               + q[..., None, None] * (np.einsum("ik,jl->ijkl", eye, eye) + np.einsum("jk,il->ijkl", eye, eye)))
        return g, dg, d2g

    def _polar_arrays(self, x):
        x = np.asarray(x, dtype=float)
        lead = x.shape[:-1]
        f, f1, f2 = self.profile.evaluate(x[..., 0])
        s, c = np.sin(x[..., 1]), np.cos(x[..., 1])
        ff = f * f
        d_ff = 2 * f * f1
        dd_ff = 2 * (f1 * f1 + f * f2)

        g = np.zeros(lead + (3, 3))
        dg = np.zeros(lead + (3, 3, 3))
        d2g = np.zeros(lead + (3, 3, 3, 3))
        g[..., 0, 0] = 1.0
        g[..., 1, 1] = ff
        g[..., 2, 2] = ff * s * s
        dg[..., 1, 1, 0] = d_ff
        dg[..., 2, 2, 0] = d_ff * s * s
        dg[..., 2, 2, 1] = ff * 2 * s * c
        d2g[..., 1, 1, 0, 0] = dd_ff
        d2g[..., 2, 2, 0, 0] = dd_ff * s * s
        d2g[..., 2, 2, 0, 1] = d2g[..., 2, 2, 1, 0] = d_ff * 2 * s * c
        d2g[..., 2, 2, 1, 1] = ff * 2 * (c * c - s * s)
        return g, dg, d2g


def sn_profile(kappa=0.0, safe_radius=None):
    """RotSymmetric family with f = sn_κ (flat for κ = 0, round for κ > 0)."""
    return RotSymmetric(RotProfile([SnSegment(kappa)]), {"profile": "sn", "kappa": float(kappa)},
                        safe_radius=safe_radius)


def quintic_blend(start, width, left, right):
    """Coefficients in u = r − start of the quintic matching (f, f′, f″) at both ends."""
    rows = []
    rhs = []
    for u, values in ((0.0, left), (width, right)):
        for order, value in enumerate(values):
            poly = np.zeros(6)
            for n in range(order, 6):
                poly[n] = math.factorial(n) / math.factorial(n - order) * u ** (n - order)
            rows.append(poly)
            rhs.append(value)
    return np.linalg.solve(np.array(rows), np.array(rhs))


def make_cap_metric(r0, delta, safe_radius=None):
    """
    Round cap glued to a flat end.

    f = sin r on [0, r0], a quintic C² blend on [r0, r0 + delta] and
    f = r + β beyond, so the metric is flat outside r0 + delta and K+ has
    compact support. The blend ends at the average of the two slopes.

    Raises:
        ConstraintError: r0 or delta out of range
        BadProfile: blend not positive, or C² join residual above 1e-10
    """
    r0, delta = float(r0), float(delta)
    if not 0 < r0 < 0.5 * math.pi:
        raise ConstraintError(f"cap metric requires 0 < r0 < pi/2, got r0={r0}")
    if not delta > 0:
        raise ConstraintError(f"cap metric requires delta > 0, got delta={delta}")

    alpha = 1.0
    r1 = r0 + delta
    left = (math.sin(r0), math.cos(r0), -math.sin(r0))
    f_end = left[0] + delta * 0.5 * (left[1] + alpha)
    beta = f_end - alpha * r1
    coeffs = quintic_blend(r0, delta, left, (f_end, alpha, 0.0))

    profile = RotProfile([SnSegment(1.0), PolySegment(r0, coeffs), AffineSegment(alpha, beta)], (r0, r1))
    blend_f, _, _ = profile.evaluate(np.linspace(r0, r1, 401))
    if np.min(blend_f) <= 0:
        raise BadProfile(f"cap blend is not positive (min f = {np.min(blend_f):.3e})")
    residual = profile.join_residuals()
    if residual > 1e-10:
        raise BadProfile(f"cap blend C2 join residual {residual:.3e} exceeds 1e-10")
    return RotSymmetric(profile, {"profile": "cap", "r0": r0, "delta": delta}, safe_radius=safe_radius)
