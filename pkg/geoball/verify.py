"""
Residual-and-verdict checks over ball profiles and curvature samples.

Every check returns a CheckResult whose verdict is a pure function of its
residuals and per-t tolerances; comparisons additionally return the
ComparisonCurve they were judged on. Curvature bounds are certified only on
the sampled points (ray grid × direction nodes) carried by the profile.
"""

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from geoball.ballvolume import (
    FD_INTERIOR,
    ball_functions,
    model_space,
    quadrature_convergence,
    second_derivative_grid,
)
from geoball.curvature import curvature_at, total_k_plus
from geoball.errors import DivergentIntegral, HypothesisViolated, QuadratureUnderResolved
from geoball.geodesics import integrate_fan, riccati_residual, small_t_coefficient
from geoball.manifolds import BergerSphere, ChartPoint, DoublyWarped, ProductS2R, RotSymmetric, SpaceForm

logger = logging.getLogger(__name__)

EIGEN_POINTS = 5
RICCI_SLACK = 1e-9


@dataclass(frozen=True)
class CheckResult:
    name: str
    t_grid: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    residuals: np.ndarray
    tolerance: np.ndarray
    inputs_digest: dict
    notes: tuple = ()

    @property
    def max_abs_residual(self):
        return float(np.max(np.abs(self.residuals))) if len(self.residuals) else 0.0

    @property
    def passed(self):
        return bool(np.all(np.abs(self.residuals) <= self.tolerance))

    @property
    def digest(self):
        return self.inputs_digest.get("sha256", "")


@dataclass(frozen=True)
class ComparisonCurve:
    t_grid: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    extra: dict = field(default_factory=dict)

    @property
    def margin(self):
        return self.lhs - self.rhs


def make_digest(**inputs):
    """Inputs of a check plus a sha256 over their canonical JSON form."""
    payload = json.dumps(inputs, sort_keys=True, default=float)
    out = dict(inputs)
    out["sha256"] = hashlib.sha256(payload.encode()).hexdigest()
    return out


def profile_digest(profile, check, **extra):
    return make_digest(check=check, family=profile.family_spec, quadrature=profile.quad_meta, **extra)


def _result(name, t, lhs, rhs, residuals, tolerance, digest, notes=()):
    t = np.asarray(t, dtype=float)
    tolerance = np.broadcast_to(np.asarray(tolerance, dtype=float), t.shape).copy()
    result = CheckResult(name, t, np.asarray(lhs, dtype=float), np.asarray(rhs, dtype=float),
                         np.asarray(residuals, dtype=float), tolerance, digest, tuple(notes))
    log = logger.info if result.passed else logger.warning
    log("%s: max residual %.3e (%s)", name, result.max_abs_residual, "pass" if result.passed else "FAIL")
    return result


# Identities


def check_gauss_bonnet_identity(profile, tol=1e-4):
    """∫_{B_t}(scal − Ric(∇r,∇r)) dV + A′(t) = 8πt."""
    t = profile.t_grid
    ball = profile.ball_integral(profile.scal_integral - profile.ric_radial_integral)
    lhs = ball + profile.Aprime
    rhs = 8.0 * math.pi * t
    return _result("gauss_bonnet", t, lhs, rhs, lhs - rhs, tol * (1.0 + rhs),
                   profile_digest(profile, "gauss_bonnet", tol=tol))


def check_constant_curvature_corollary(kappa, t_set=None, tol=1e-12):
    """4κV_κ(t) + V_κ″(t) = 8πt from closed forms only."""
    t = np.linspace(0.05, 1.5, 20) if t_set is None else np.asarray(t_set, dtype=float)
    model = model_space(kappa)
    volume_term = 4.0 * kappa * model.V(t)
    curvature_term = model.Aprime(t)
    lhs = volume_term + curvature_term
    rhs = 8.0 * math.pi * t
    scale = np.maximum(1.0, np.maximum(np.abs(volume_term), np.abs(curvature_term)))
    return _result("corollary", t, lhs, rhs, lhs - rhs, tol * scale,
                   make_digest(check="corollary", kappa=float(kappa), t=[float(x) for x in t], tol=tol))


def check_second_variation(profile, tol=1e-4):
    """A″ = ∫_{S_t}(−Ric(∇r,∇r) − ‖Hess r‖² + (Δr)²) dA, with A″ from finite differences of A′."""
    t, second, fd_err = second_derivative_grid(profile)
    idx = FD_INTERIOR
    rhs = (-profile.ric_radial_integral + profile.trS_sq_integral - profile.hess_sq_integral)[idx]
    return _result("second_variation", t, second, rhs, second - rhs, tol * (1.0 + np.abs(rhs)) + fd_err,
                   profile_digest(profile, "second_variation", tol=tol))


def check_second_variation_scalar(profile, tol=1e-4):
    """A″ = 8π − ∫_{S_t}(scal − Ric(∇r,∇r)) dA."""
    t, second, fd_err = second_derivative_grid(profile)
    idx = FD_INTERIOR
    rhs = 8.0 * math.pi - (profile.scal_integral - profile.ric_radial_integral)[idx]
    return _result("second_variation_scalar", t, second, rhs, second - rhs, tol * (1.0 + np.abs(rhs)) + fd_err,
                   profile_digest(profile, "second_variation_scalar", tol=tol))


def check_sphere_gauss_bonnet(profile, tol=1e-4):
    """2∫_{S_t} K_G dA = 8π with K_G = sec(E1, E2) + det S."""
    t = profile.t_grid
    lhs = 2.0 * profile.gauss_curvature_integral
    rhs = np.full_like(t, 8.0 * math.pi)
    return _result("sphere_gauss_bonnet", t, lhs, rhs, lhs - rhs, tol * (1.0 + rhs),
                   profile_digest(profile, "sphere_gauss_bonnet", tol=tol))


def check_small_t(family, p, opts, t_small=0.1, t_min=0.01, tol=1e-4, rays=8):
    """
    The O(t) coefficient (tr S − 2/t) / t near the base point is stable under
    halving the sample step.

    Both fans run to min(t_max, t_small); the halved grid contains every
    sample of the first one, and the coefficients are compared there.
    """
    t_end = min(opts.t_max, t_small)
    n = max(2, math.ceil(t_end / opts.step - 1e-9))
    coarse_opts = replace(opts, t_max=t_end, step=t_end / n)
    fine_opts = replace(opts, t_max=t_end, step=t_end / (2 * n))
    directions = _spread_directions(rays)
    coarse = integrate_fan(family, p, directions, coarse_opts, frame_coordinates=True)
    fine = integrate_fan(family, p, directions, fine_opts, frame_coordinates=True)
    t, lhs, rhs = [], [], []
    for rc, rf in zip(coarse, fine):
        tc, cc = small_t_coefficient(rc, t_small, t_min)
        tf, cf = small_t_coefficient(rf, t_small, t_min)
        shared = np.isin(tf, tc)
        t.append(tc)
        lhs.append(cc)
        rhs.append(cf[shared])
    t, lhs, rhs = (np.concatenate(parts) for parts in (t, lhs, rhs))
    digest = make_digest(check="small_t", family=family.to_spec(), rays=rays, step=coarse_opts.step,
                         t_small=t_small, t_min=t_min, tol=tol)
    return _result("small_t", t, lhs, rhs, lhs - rhs, tol * (1.0 + np.abs(rhs)), digest)


# Curvature certificates


def certify_ricci_bound(profile, kappa_bound):
    """Sampled certificate for Ric ≤ 2κ; raises HypothesisViolated when it fails."""
    worst = float(np.max(profile.ricci_max))
    if worst > 2.0 * kappa_bound + RICCI_SLACK:
        raise HypothesisViolated(
            f"sampled Ricci maximum {worst:.12g} exceeds 2*kappa_bound = {2.0 * kappa_bound:.12g}")
    return worst


def certify_sectional_bound(profile, sec_bound):
    worst = float(np.max(profile.sec_max))
    if worst > sec_bound + RICCI_SLACK:
        raise HypothesisViolated(f"sampled sectional maximum {worst:.12g} exceeds sec_bound = {sec_bound:.12g}")
    return worst


def _truncate(profile, kappa, factor, reason):
    """Restrict to t ≤ factor·π/√κ when κ > 0; returns (profile, notes)."""
    if kappa <= 0:
        return profile, ()
    limit = factor * math.pi / math.sqrt(kappa)
    if profile.t_grid[-1] <= limit:
        return profile, ()
    logger.warning("%s: t restricted to <= %.6g (kappa=%.6g)", reason, limit, kappa)
    return profile.restrict(limit), (f"t restricted to <= {limit:.12g}",)


# Volume comparison under Ric ≤ 2κ


def check_theorem1(profile, kappa_bound, tol=1e-6):
    """
    V(t) ≥ V_κ(t) under the sampled certificate Ric ≤ 2κ.

    Returns:
        (ComparisonCurve, CheckResult); residuals are the negative part of
        the margin
    """
    certified = certify_ricci_bound(profile, kappa_bound)
    profile, notes = _truncate(profile, kappa_bound, 1.0, "theorem1")
    t = profile.t_grid
    rhs = model_space(kappa_bound).V(t)
    curve = ComparisonCurve(t, profile.V, rhs)
    margin = curve.margin
    notes += (f"certified sampled Ricci max {certified:.12g}",
              "margin nonnegative" if np.all(margin >= 0) else "margin dips below zero within tolerance")
    result = _result("theorem1", t, profile.V, rhs, np.minimum(margin, 0.0), tol,
                     profile_digest(profile, "theorem1", kappa_bound=kappa_bound, tol=tol), notes)
    return curve, result


def _sturm_parts(profile, kappa_bound):
    model = model_space(kappa_bound)
    model4 = model_space(4.0 * kappa_bound)
    t = profile.t_grid
    Z = profile.V - model.V(t)
    Zp = profile.A - model.A(t)
    return t, Z, Zp, model4.sn(t), model4.sn_prime(t)


def check_sturm_monotonicity(profile, kappa_bound, tol=1e-6):
    """W = Z′ sn_{4κ} − Z sn′_{4κ} is nonnegative and nondecreasing, Z = V − V_κ."""
    certify_ricci_bound(profile, kappa_bound)
    profile, notes = _truncate(profile, kappa_bound, 0.5, "sturm")
    t, Z, Zp, sn4, sn4p = _sturm_parts(profile, kappa_bound)
    W = Zp * sn4 - Z * sn4p
    running = np.maximum.accumulate(W)
    residuals = np.maximum(0.0, np.maximum(running - W, -W))
    return _result("sturm", t, W, running, residuals, tol,
                   profile_digest(profile, "sturm", kappa_bound=kappa_bound, tol=tol), notes)


def check_margin_ratio(profile, kappa_bound, tol=1e-6):
    """Z / sn_{4κ} is nondecreasing."""
    certify_ricci_bound(profile, kappa_bound)
    profile, notes = _truncate(profile, kappa_bound, 0.5, "margin_ratio")
    t, Z, _, sn4, _ = _sturm_parts(profile, kappa_bound)
    ratio = Z / sn4
    running = np.maximum.accumulate(ratio)
    return _result("margin_ratio", t, ratio, running, running - ratio, tol,
                   profile_digest(profile, "margin_ratio", kappa_bound=kappa_bound, tol=tol), notes)


# Volume lower bound from the total positive Ricci curvature


def theorem2_constant(family, truncate=False):
    """
    C = ∫_M K+ dV for the families where it is finite.

    Raises:
        HypothesisViolated: ∫K+ is infinite
        QuadratureUnderResolved: the two quadrature rules disagree beyond 1e-6
    """
    if isinstance(family, RotSymmetric):
        try:
            adaptive = total_k_plus(family, rule="adaptive", truncate=truncate)
            gauss = total_k_plus(family, rule="gauss", truncate=truncate)
        except DivergentIntegral as exc:
            raise HypothesisViolated(f"theorem2 needs a finite total K+: {exc}") from exc
        if abs(adaptive - gauss) > 1e-6 * max(abs(adaptive), 1e-300):
            raise QuadratureUnderResolved(f"total K+ rules disagree: adaptive {adaptive:.12g}, gauss {gauss:.12g}")
        return adaptive
    if isinstance(family, SpaceForm):
        k = family.kappa
        return 0.0 if k <= 0 else 2.0 * k * 2.0 * math.pi ** 2 * k ** -1.5
    if isinstance(family, BergerSphere):
        return (4.0 - 2.0 * family.epsilon ** 2) * family.volume()
    raise HypothesisViolated(f"{family.describe()} has infinite total K+ (positive constant K+, infinite volume)")


def check_theorem2(profile, C, tol=1e-6):
    """V(t) ≥ (4/3)πt³ − Ct²."""
    if C is None or not math.isfinite(C):
        raise HypothesisViolated(f"theorem2 needs a finite constant C, got {C}")
    t = profile.t_grid
    rhs = 4.0 / 3.0 * math.pi * t ** 3 - C * t * t
    curve = ComparisonCurve(t, profile.V, rhs)
    result = _result("theorem2", t, profile.V, rhs, np.minimum(curve.margin, 0.0), tol,
                     profile_digest(profile, "theorem2", C=C, tol=tol))
    return curve, result


# Bishop–Günter


def compare_bishop_gunter(profile, sec_bound, ric_bound):
    """
    Computed V against the sectional-bound and Ricci-bound model volumes.

    ric_bound is the half-Ricci constant κ of Ric ≤ 2κ. The curve's rhs is the
    Ricci model; extra["sec_model"] is the sectional model.
    """
    certify_sectional_bound(profile, sec_bound)
    certify_ricci_bound(profile, ric_bound)
    profile, _ = _truncate(profile, max(sec_bound, ric_bound), 1.0, "bishop_gunter")
    t = profile.t_grid
    return ComparisonCurve(t, profile.V, model_space(ric_bound).V(t),
                           extra={"sec_model": model_space(sec_bound).V(t)})


def check_bishop_gunter_ordering(curve, tol=1e-6, digest=None):
    """V_sec ≤ V_ric ≤ V pointwise."""
    sec_model = curve.extra["sec_model"]
    residuals = np.maximum(0.0, np.maximum(sec_model - curve.rhs, curve.rhs - curve.lhs))
    return _result("bishop_gunter", curve.t_grid, sec_model, curve.lhs, residuals, tol,
                   digest or make_digest(check="bishop_gunter", tol=tol))


# Curvature properties


def sample_points(family, count=EIGEN_POINTS, seed=0):
    """Deterministic points of the canonical chart, well inside the safe ball."""
    if family.backend == "homogeneous":
        return [family.base_point()] * count
    rng = np.random.default_rng(seed)
    scale = min(1.0, 0.5 * family.safe_radius)
    chart = family.canonical_chart
    points = []
    while len(points) < count:
        coords = rng.uniform(-scale, scale, size=3)
        if family.in_chart(coords, chart):
            points.append(ChartPoint(coords, chart))
    return points


def check_example_eigenvalues(family, tol=1e-9, points=None):
    """
    Curvature operator and Ricci eigenvalues against the closed forms.

    t_grid holds the sample index; per point the six rows are the three
    operator eigenvalues then the three Ricci eigenvalues (ascending).
    """
    expected = family.expected_eigenvalues()
    if expected is None:
        raise ValueError(f"no closed-form eigenvalues known for {family.describe()}")
    op_expected, ric_expected = (np.sort(e) for e in expected)
    points = points or sample_points(family)
    lhs, rhs, index = [], [], []
    for i, p in enumerate(points):
        data = curvature_at(family, p)
        lhs.extend(data.op_eigenvalues)
        lhs.extend(data.ricci_eigenvalues)
        rhs.extend(op_expected)
        rhs.extend(ric_expected)
        index.extend([i] * 6)
    lhs, rhs = np.array(lhs), np.array(rhs)
    digest = make_digest(check="eigenvalues", family=family.to_spec(),
                         points=[list(p.coords) for p in points], tol=tol)
    return _result("eigenvalues", index, lhs, rhs, lhs - rhs, tol, digest)


def check_symmetries(family, count=20, seed=1, tol=1e-10):
    """Antisymmetries, pair symmetry, first Bianchi, self-adjointness and tr Ric = scal, relative to |R|."""
    points = sample_points(family, count, seed)
    residuals = []
    for p in points:
        data = curvature_at(family, p)
        residuals.append(max(data.antisymmetry_residual(), data.pair_symmetry_residual(),
                             data.bianchi_residual(), data.self_adjoint_residual(),
                             data.trace_residual()) / data.scale())
    residuals = np.array(residuals)
    digest = make_digest(check="symmetries", family=family.to_spec(), count=count, seed=seed, tol=tol)
    return _result("symmetries", np.arange(count), residuals, np.zeros(count), residuals, tol, digest)


def _spread_directions(count):
    """Fixed unit directions in frame coordinates spread over the sphere."""
    golden = math.pi * (3.0 - math.sqrt(5.0))
    k = np.arange(count) + 0.5
    z = 1.0 - 2.0 * k / count
    rho = np.sqrt(1.0 - z * z)
    return np.stack([rho * np.cos(golden * k), rho * np.sin(golden * k), z], axis=1)


def check_riccati(family, p, opts, tol=1e-6, rays=3):
    """‖S′ + S² + R̃‖ at interior samples of a few rays."""
    fan = integrate_fan(family, p, _spread_directions(rays), opts, frame_coordinates=True)
    values = np.array([riccati_residual(rd) for rd in fan])
    digest = make_digest(check="riccati", family=family.to_spec(), t_max=opts.t_max, step=opts.step, tol=tol)
    return _result("riccati", np.arange(rays), values, np.zeros(rays), values, tol, digest)


def check_ray_drift(family, p, opts, tol=1e-8, rays=16):
    """Arc-length and frame orthonormality drift along a fan of rays."""
    fan = integrate_fan(family, p, _spread_directions(rays), opts, frame_coordinates=True)
    t = fan[0].t_grid
    drift = np.max([np.maximum(rd.speed_drift, rd.frame_drift) for rd in fan], axis=0)
    digest = make_digest(check="ray_drift", family=family.to_spec(), t_max=opts.t_max, step=opts.step, tol=tol)
    return _result("ray_drift", t, drift, np.zeros_like(t), drift, tol, digest)


def check_quadrature(family, p, opts, level, tol=1e-7, evaluator=None, chunk_size=None, coarse=None):
    """
    A(t_max) moves by at most tol (relative) when the direction level doubles.

    coarse, when given, is the profile already computed at `level` and is reused.
    """
    change = quadrature_convergence(family, p, opts, level, evaluator=evaluator, chunk_size=chunk_size, coarse=coarse)
    digest = make_digest(check="quadrature", family=family.to_spec(), level=level, t_max=opts.t_max, tol=tol)
    return _result("quadrature", [opts.t_max], [change], [0.0], [change], tol, digest)


def _profile_bytes(profile):
    arrays = (profile.t_grid, profile.A, profile.Aprime, profile.V, profile.ric_radial_integral,
              profile.scal_integral, profile.hess_sq_integral, profile.trS_sq_integral)
    return b"".join(np.ascontiguousarray(a).tobytes() for a in arrays)


def check_reproducibility(profile, recompute):
    """A recomputed profile is bit-identical to the first one."""
    again = recompute()
    first, second = _profile_bytes(profile), _profile_bytes(again)
    same = first == second
    digest = profile_digest(profile, "reproducibility",
                            first=hashlib.sha256(first).hexdigest(), second=hashlib.sha256(second).hexdigest())
    return _result("reproducibility", [profile.t_grid[-1]], [0.0 if same else 1.0], [0.0],
                   [0.0 if same else 1.0], 0.0, digest)


# Suite


@dataclass
class SuiteContext:
    """
    Everything a named check may need. The ball profile is computed once on
    first use.
    """

    family: object
    p: object
    opts: object
    quad: object
    kappa_bound: float = None
    sec_bound: float = None
    ric_bound: float = None
    tol_identity: float = 1e-4
    tol_margin: float = 1e-6
    tol_eigen: float = 1e-9
    tol_corollary: float = 1e-12
    corollary_kappas: tuple = (-2.0, -1.0, 0.0, 1.0, 2.0)
    evaluator: object = None
    chunk_size: int = None
    resolution_tol: float = None
    curves: dict = field(default_factory=dict)
    _profile: object = None

    @property
    def profile(self):
        if self._profile is None:
            self._profile = self.compute_profile()
        return self._profile

    def compute_profile(self):
        return ball_functions(self.family, self.p, self.opts, self.quad, evaluator=self.evaluator,
                              chunk_size=self.chunk_size, resolution_tol=self.resolution_tol)

    def half_ricci_bound(self):
        if self.kappa_bound is not None:
            return self.kappa_bound
        bound = self.family.ricci_half_bound()
        return 0.5 * float(np.max(self.profile.ricci_max)) if bound is None else bound


def _run_theorem1(ctx):
    curve, result = check_theorem1(ctx.profile, ctx.half_ricci_bound(), ctx.tol_margin)
    ctx.curves["theorem1"] = curve
    return [result]


def _run_theorem2(ctx):
    curve, result = check_theorem2(ctx.profile, theorem2_constant(ctx.family), ctx.tol_margin)
    ctx.curves["theorem2"] = curve
    return [result]


def _run_bishop_gunter(ctx):
    sec = ctx.sec_bound if ctx.sec_bound is not None else ctx.family.sectional_bound()
    ric = ctx.ric_bound if ctx.ric_bound is not None else ctx.half_ricci_bound()
    if sec is None:
        raise HypothesisViolated(f"no sectional bound given or known for {ctx.family.describe()}")
    curve = compare_bishop_gunter(ctx.profile, sec, ric)
    ctx.curves["bishop_gunter"] = curve
    digest = profile_digest(ctx.profile, "bishop_gunter", sec_bound=sec, ric_bound=ric, tol=ctx.tol_margin)
    return [check_bishop_gunter_ordering(curve, ctx.tol_margin, digest)]


def _run_small_t(ctx):
    return [check_small_t(ctx.family, ctx.p, ctx.opts)]


CHECKS = {
    "gauss_bonnet": lambda ctx: [check_gauss_bonnet_identity(ctx.profile, ctx.tol_identity)],
    "corollary": lambda ctx: [check_constant_curvature_corollary(k, tol=ctx.tol_corollary)
                              for k in ctx.corollary_kappas],
    "second_variation": lambda ctx: [check_second_variation(ctx.profile, ctx.tol_identity)],
    "second_variation_scalar": lambda ctx: [check_second_variation_scalar(ctx.profile, ctx.tol_identity)],
    "sphere_gauss_bonnet": lambda ctx: [check_sphere_gauss_bonnet(ctx.profile, ctx.tol_identity)],
    "theorem1": _run_theorem1,
    "sturm": lambda ctx: [check_sturm_monotonicity(ctx.profile, ctx.half_ricci_bound(), ctx.tol_margin)],
    "margin_ratio": lambda ctx: [check_margin_ratio(ctx.profile, ctx.half_ricci_bound(), ctx.tol_margin)],
    "theorem2": _run_theorem2,
    "bishop_gunter": _run_bishop_gunter,
    "eigenvalues": lambda ctx: [check_example_eigenvalues(ctx.family, ctx.tol_eigen)],
    "symmetries": lambda ctx: [check_symmetries(ctx.family)],
    "riccati": lambda ctx: [check_riccati(ctx.family, ctx.p, ctx.opts)],
    "ray_drift": lambda ctx: [check_ray_drift(ctx.family, ctx.p, ctx.opts)],
    "quadrature": lambda ctx: [check_quadrature(ctx.family, ctx.p, ctx.opts, ctx.quad.level, evaluator=ctx.evaluator,
                                                chunk_size=ctx.chunk_size, coarse=ctx.profile)],
    "reproducibility": lambda ctx: [check_reproducibility(ctx.profile, ctx.compute_profile)],
    "small_t": _run_small_t,
}


def applicable_checks(family):
    """The checks `--all` runs for a family: everything whose inputs exist."""
    names = list(CHECKS)
    if family.expected_eigenvalues() is None:
        names.remove("eigenvalues")
    if family.sectional_bound() is None:
        names.remove("bishop_gunter")
    if isinstance(family, (DoublyWarped, ProductS2R)):
        names.remove("theorem2")
    if isinstance(family, RotSymmetric):
        try:
            total_k_plus(family)
        except DivergentIntegral:
            names.remove("theorem2")
    return names


def run_suite(names, ctx):
    """
    Run named checks in request order.

    Raises:
        ValueError: unknown check name
        HypothesisViolated, QuadratureUnderResolved: propagated from checks
    """
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ValueError(f"unknown checks {unknown}; available: {sorted(CHECKS)}")
    results = []
    for name in names:
        logger.debug("running check %s on %s", name, ctx.family.describe())
        results.extend(CHECKS[name](ctx))
    return results
