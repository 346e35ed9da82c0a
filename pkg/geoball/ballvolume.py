"""
Geodesic sphere areas and ball volumes from fans of radial rays.

A(t) = Σ w λ(t, u), A′(t) = Σ w tr S λ and the sphere integrals of curvature
quantities are reduced over the direction nodes of a product quadrature in a
fixed order, so a profile is bit-reproducible for a given configuration.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline

from geoball.errors import BoundaryPoint, ConjugateInsideRange, QuadratureUnderResolved
from geoball.geodesics import integrate_fan

logger = logging.getLogger(__name__)

V_SERIES_TERMS = 30

# per-ray arrays shipped between ray evaluators and the reduction
FAN_FIELDS = ("lam", "trS", "hess_sq", "trS_sq", "detS", "sec_tangent", "ric_radial", "scal", "ric_top", "sec_top")


@dataclass(frozen=True)
class SphereQuadrature:
    """Product rule on the unit sphere of T_pM, nodes in frame coordinates."""

    level: int
    n_polar: int
    n_azimuth: int
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def degree(self):
        """Polynomial degree integrated exactly."""
        return 2 * self.n_polar - 1

    def integrate(self, values):
        """Weighted sum over the node axis (axis 0)."""
        return np.tensordot(self.weights, np.asarray(values, dtype=float), axes=(0, 0))


def sphere_quadrature(level):
    """
    Gauss–Legendre in cos θ (n = 8·level nodes) × 2n uniform azimuths.

    Nodes are ordered polar-major; weights w_GL·π/n sum to 4π.
    """
    if level < 1:
        raise ValueError(f"quadrature level must be >= 1, got {level}")
    n = 8 * int(level)
    z, w = leggauss(n)
    phi = 2.0 * math.pi * np.arange(2 * n) / (2 * n)
    rho = np.sqrt(1.0 - z * z)
    nodes = np.stack([
        np.outer(rho, np.cos(phi)).ravel(),
        np.outer(rho, np.sin(phi)).ravel(),
        np.repeat(z, 2 * n),
    ], axis=1)
    weights = np.repeat(w * math.pi / n, 2 * n)
    return SphereQuadrature(int(level), n, 2 * n, nodes, weights)


def fan_fields(family, p, u, opts):
    """
    Integrate rays in frame-coordinate directions u and collect per-ray samples.

    Returns:
        dict of (n_rays, n_t) arrays keyed by FAN_FIELDS, plus "t_grid" and
        "conjugate_t" (NaN where the ray has no conjugate point)
    """
    rays = integrate_fan(family, p, u, opts, frame_coordinates=True)
    shape = np.stack([rd.shape for rd in rays])
    sym = 0.5 * (shape + np.swapaxes(shape, -1, -2))
    trS = np.trace(shape, axis1=-2, axis2=-1)
    out = {
        "t_grid": rays[0].t_grid,
        "conjugate_t": np.array([np.nan if rd.conjugate_t is None else rd.conjugate_t for rd in rays]),
        "lam": np.stack([rd.lam for rd in rays]),
        "trS": trS,
        "hess_sq": np.sum(sym * sym, axis=(-2, -1)),
        "trS_sq": trS * trS,
        "detS": np.linalg.det(shape),
    }
    for key in ("sec_tangent", "ric_radial", "scal", "ric_top", "sec_top"):
        out[key] = np.stack([getattr(rd, key) for rd in rays])
    return out


@dataclass(frozen=True)
class BallProfile:
    """
    Sphere and ball integrals on the shared ray grid t_grid = [t0, ..., t_max].

    The *_integral arrays are integrals over the geodesic sphere S_t;
    ricci_max and sec_max are the sampled curvature maxima over the direction
    nodes at each t.
    """

    t_grid: np.ndarray
    A: np.ndarray
    Aprime: np.ndarray
    V: np.ndarray
    ric_radial_integral: np.ndarray
    scal_integral: np.ndarray
    hess_sq_integral: np.ndarray
    trS_sq_integral: np.ndarray
    gauss_curvature_integral: np.ndarray
    ricci_max: np.ndarray
    sec_max: np.ndarray
    quad_meta: dict = field(default_factory=dict)
    family_spec: dict = field(default_factory=dict)

    @property
    def step(self):
        """Spacing of the equal steps after t0."""
        return float(self.t_grid[2] - self.t_grid[1])

    def ball_integral(self, sphere_integral):
        """∫_{B_t} f dV from per-sphere integrals ∫_{S_t} f dA (Simpson, flat sliver on [0, t0])."""
        sphere_integral = np.asarray(sphere_integral, dtype=float)
        t0 = self.t_grid[0]
        return sphere_integral[0] * t0 / 3.0 + cumulative_simpson(sphere_integral, x=self.t_grid, initial=0.0)

    def restrict(self, t_max):
        """Profile truncated to t ≤ t_max."""
        keep = self.t_grid <= t_max + 1e-12
        arrays = {name: getattr(self, name)[keep] for name in (
            "t_grid", "A", "Aprime", "V", "ric_radial_integral", "scal_integral", "hess_sq_integral",
            "trS_sq_integral", "gauss_curvature_integral", "ricci_max", "sec_max")}
        meta = dict(self.quad_meta, restricted_to=float(t_max))
        return BallProfile(quad_meta=meta, family_spec=self.family_spec, **arrays)


def local_evaluator(family, p, u, opts):
    return fan_fields(family, p, u, opts)


def ball_functions(family, p=None, opts=None, quad=None, evaluator=None, chunk_size=None, resolution_tol=None):
    """
    A, A′, V and the sphere curvature integrals for balls around p.

    Args:
        family: MetricFamily
        p: base point, defaults to family.base_point()
        opts: RayOptions
        quad: SphereQuadrature
        evaluator: callable(family, p, u, opts) -> fan fields; defaults to
            in-process integration (see messaging.ray_client for a remote one)
        chunk_size: rays per evaluator call; all rays at once when None
        resolution_tol: when set, also compute at doubled level and raise
            QuadratureUnderResolved if A(t_max) moves by more than this
            relative amount

    Raises:
        ConjugateInsideRange: some ray meets a conjugate point before t_max
        QuadratureUnderResolved: see resolution_tol
    """
    p = family.base_point() if p is None else p
    opts.validate(family)
    evaluator = evaluator or local_evaluator
    u = quad.nodes
    n = len(u)
    chunk_size = n if not chunk_size else int(chunk_size)

    parts = [evaluator(family, p, u[i:i + chunk_size], opts) for i in range(0, n, chunk_size)]
    fields = {key: np.concatenate([part[key] for part in parts], axis=0) for key in FAN_FIELDS + ("conjugate_t",)}
    t = np.asarray(parts[0]["t_grid"], dtype=float)
    logger.info("ball_functions: %d rays of %s at level %d, %d samples up to t=%.6g",
                n, family.describe(), quad.level, len(t), t[-1])

    conj = fields["conjugate_t"]
    if np.any(np.isfinite(conj)):
        worst = int(np.nanargmin(conj))
        raise ConjugateInsideRange(
            f"ray in frame direction {tuple(np.round(u[worst], 12))} reaches a conjugate point at "
            f"t={conj[worst]:.10g} <= t_max={t[-1]}",
            direction=tuple(u[worst]), conjugate_t=float(conj[worst]))

    lam = fields["lam"]
    w = quad.weights
    A = w @ lam
    Aprime = w @ (fields["trS"] * lam)
    V = (4.0 / 3.0) * math.pi * t[0] ** 3 + cumulative_simpson(A, x=t, initial=0.0)

    profile = BallProfile(
        t_grid=t,
        A=A,
        Aprime=Aprime,
        V=V,
        ric_radial_integral=w @ (fields["ric_radial"] * lam),
        scal_integral=w @ (fields["scal"] * lam),
        hess_sq_integral=w @ (fields["hess_sq"] * lam),
        trS_sq_integral=w @ (fields["trS_sq"] * lam),
        gauss_curvature_integral=w @ ((fields["sec_tangent"] + fields["detS"]) * lam),
        ricci_max=np.max(fields["ric_top"], axis=0),
        sec_max=np.max(fields["sec_top"], axis=0),
        quad_meta={
            "level": quad.level,
            "n_polar": quad.n_polar,
            "n_azimuth": quad.n_azimuth,
            "n_directions": n,
            "t0": opts.t0,
            "step": opts.step,
            "t_max": opts.t_max,
            "tol": opts.tol,
            "beyond_safe_radius": bool(opts.t_max > family.trusted_radius),
            "safe_radius": float(family.trusted_radius),
        },
        family_spec=family.to_spec(),
    )

    if resolution_tol is not None:
        change = quadrature_convergence(family, p, opts, quad.level, evaluator=evaluator,
                                        chunk_size=chunk_size, coarse=profile)
        if change > resolution_tol:
            raise QuadratureUnderResolved(
                f"A(t_max) changed by {change:.3e} (relative) when the level doubled from {quad.level}; "
                f"tolerance {resolution_tol:.1e}")
    return profile


def quadrature_convergence(family, p, opts, level, evaluator=None, chunk_size=None, coarse=None):
    """Relative change of A(t_max) between quadrature levels `level` and 2·level."""
    p = family.base_point() if p is None else p
    if coarse is None:
        coarse = ball_functions(family, p, opts, sphere_quadrature(level), evaluator=evaluator, chunk_size=chunk_size)
    fine = ball_functions(family, p, opts, sphere_quadrature(2 * level), evaluator=evaluator, chunk_size=chunk_size)
    change = abs(fine.A[-1] - coarse.A[-1]) / abs(fine.A[-1])
    logger.debug("quadrature level %d -> %d: relative change of A(t_max) = %.3e", level, 2 * level, change)
    return float(change)


@dataclass(frozen=True)
class ModelSpace:
    """sn_κ and the sphere area / ball volume of the constant curvature κ space form."""

    kappa: float

    def sn(self, t):
        t = np.asarray(t, dtype=float)
        k = self.kappa
        if k > 0:
            return np.sin(math.sqrt(k) * t) / math.sqrt(k)
        if k < 0:
            return np.sinh(math.sqrt(-k) * t) / math.sqrt(-k)
        return t.copy()

    def sn_prime(self, t):
        t = np.asarray(t, dtype=float)
        k = self.kappa
        if k > 0:
            return np.cos(math.sqrt(k) * t)
        if k < 0:
            return np.cosh(math.sqrt(-k) * t)
        return np.ones_like(t)

    def sn_second(self, t):
        return -self.kappa * self.sn(t)

    def A(self, t):
        return 4.0 * math.pi * self.sn(t) ** 2

    def Aprime(self, t):
        return 8.0 * math.pi * self.sn(t) * self.sn_prime(t)

    def Asecond(self, t):
        return 8.0 * math.pi * (self.sn_prime(t) ** 2 - self.kappa * self.sn(t) ** 2)

    def V(self, t):
        """
        Ball volume; the closed form below cancels badly for small |κ|t², where
        the series 8π Σ (−1)^{n+1} (4κ)^{n−1} t^{2n+1} / (2n+1)! is used.
        """
        t = np.asarray(t, dtype=float)
        k = self.kappa
        out = np.empty_like(t)
        small = np.abs(k) * t * t < 0.5
        if np.any(small):
            ts = t[small]
            total = np.zeros_like(ts)
            for n in range(V_SERIES_TERMS, 0, -1):
                total += (-1.0) ** (n + 1) * (4.0 * k) ** (n - 1) * ts ** (2 * n + 1) / math.factorial(2 * n + 1)
            out[small] = 8.0 * math.pi * total
        big = ~small
        if np.any(big):
            tb = t[big]
            if k > 0:
                rk = math.sqrt(k)
                out[big] = 2.0 * math.pi / k * (tb - np.sin(2 * rk * tb) / (2 * rk))
            else:
                rk = math.sqrt(-k)
                out[big] = 2.0 * math.pi / -k * (np.sinh(2 * rk * tb) / (2 * rk) - tb)
        return out


def model_space(kappa):
    return ModelSpace(float(kappa))


# full-grid positions where second_derivative_grid reports A″; the stencils
# stay on the equal steps after t0
FD_INTERIOR = slice(3, -2)


def second_derivative_grid(profile):
    """
    A″ at interior nodes by the fourth-order central difference of A′.

    The error estimate compares with the same stencil at spacing 2h
    (|D_h − D_2h| / 15) and falls back to |D_h − central 2nd-order| where the
    wide stencil does not fit. A floor of 1e-10·max|A′|/h covers the noise
    of the sampled A′.

    Returns:
        (t_inner, values, errors) for t_grid[FD_INTERIOR]
    """
    t = profile.t_grid[1:]
    a = profile.Aprime[1:]
    if len(t) < 5:
        raise BoundaryPoint(f"need at least 5 equally spaced grid points for A'', got {len(t)}")
    h = float(t[1] - t[0])
    k = np.arange(2, len(t) - 2)
    d4 = (-a[k + 2] + 8 * a[k + 1] - 8 * a[k - 1] + a[k - 2]) / (12 * h)
    d2 = (a[k + 1] - a[k - 1]) / (2 * h)
    err = np.abs(d4 - d2)
    wide = (k >= 4) & (k <= len(t) - 5)
    kw = k[wide]
    d4_wide = (-a[kw + 4] + 8 * a[kw + 2] - 8 * a[kw - 2] + a[kw - 4]) / (24 * h)
    err[wide] = np.abs(d4[wide] - d4_wide) / 15.0
    err += 1e-10 * float(np.max(np.abs(a))) / h
    return t[k], d4, err


def second_derivative_A(profile, t):
    """
    A″(t) and its error estimate, interpolated from second_derivative_grid.

    Raises:
        BoundaryPoint: t outside the span of the interior nodes
    """
    grid = profile.t_grid
    if len(grid) < 6 or not grid[3] <= t <= grid[-3]:
        raise BoundaryPoint(f"t={t} needs two equal-step grid neighbours on each side of [{grid[0]}, {grid[-1]}]")
    t_inner, values, errors = second_derivative_grid(profile)
    return float(CubicSpline(t_inner, values)(t)), float(np.interp(t, t_inner, errors))
