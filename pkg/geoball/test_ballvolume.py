import math

import numpy as np
import pytest
from scipy import integrate

from geoball.ballvolume import (
    ball_functions,
    local_evaluator,
    model_space,
    quadrature_convergence,
    second_derivative_A,
    second_derivative_grid,
    sphere_quadrature,
)
from geoball.errors import BoundaryPoint, ConjugateInsideRange, QuadratureUnderResolved
from geoball.geodesics import RayOptions
from geoball.manifolds import BergerSphere, DoublyWarped, SpaceForm


def product_volume(kappa, t):
    """Ball volume in S²(κ)×ℝ: spherical caps of radius √(t² − z²) stacked over z."""
    cap = lambda z: 2 * math.pi / kappa * (1 - math.cos(math.sqrt(kappa) * math.sqrt(t * t - z * z)))
    return integrate.quad(cap, -t, t, epsabs=1e-14, epsrel=1e-13)[0]


def product_area(kappa, t):
    def slice_rate(z):
        r = math.sqrt(t * t - z * z)
        if r == 0.0:
            return 2 * math.pi * t
        return 2 * math.pi / math.sqrt(kappa) * math.sin(math.sqrt(kappa) * r) * t / r
    return integrate.quad(slice_rate, -t, t, epsabs=1e-14, epsrel=1e-13)[0]


def test_sphere_quadrature_moments():
    for level in (1, 2):
        quad = sphere_quadrature(level)
        assert quad.n_polar == 8 * level
        assert quad.n_azimuth == 16 * level
        assert len(quad.nodes) == len(quad.weights) == 128 * level * level
        assert quad.degree == 16 * level - 1
        np.testing.assert_allclose(np.linalg.norm(quad.nodes, axis=1), 1.0, atol=1e-15)
        assert quad.integrate(np.ones(len(quad.nodes))) == pytest.approx(4 * math.pi, rel=1e-14)
        x, y, z = quad.nodes.T
        for second_moment in (x * x, y * y, z * z):
            assert quad.integrate(second_moment) == pytest.approx(4 * math.pi / 3, rel=1e-13)
        for odd in (x, y, z, x * y * z, z ** 3, x * y ** 2):
            assert abs(quad.integrate(odd)) <= 1e-13
        assert quad.integrate(z ** 4) == pytest.approx(4 * math.pi / 5, rel=1e-13)


def test_sphere_quadrature_rejects_level_zero():
    with pytest.raises(ValueError):
        sphere_quadrature(0)


def test_flat_area_and_volume(flat_profile):
    t = flat_profile.t_grid
    np.testing.assert_allclose(flat_profile.A, 4 * math.pi * t ** 2, rtol=1e-12)
    np.testing.assert_allclose(flat_profile.Aprime, 8 * math.pi * t, rtol=1e-10)
    np.testing.assert_allclose(flat_profile.V, 4 * math.pi * t ** 3 / 3, rtol=1e-12)
    assert flat_profile.V[-1] == pytest.approx(4.1887902047863905, rel=1e-12)
    np.testing.assert_allclose(flat_profile.ric_radial_integral, 0.0, atol=1e-12)


def test_flat_sphere_integrals(flat_profile):
    t = flat_profile.t_grid
    # S = I/t on the round sphere of radius t: |Hess r|² = 2/t², H² = 4/t²
    np.testing.assert_allclose(flat_profile.hess_sq_integral, 8 * math.pi * np.ones_like(t), rtol=1e-9)
    np.testing.assert_allclose(flat_profile.trS_sq_integral, 16 * math.pi * np.ones_like(t), rtol=1e-9)
    np.testing.assert_allclose(flat_profile.gauss_curvature_integral, 4 * math.pi, rtol=1e-9)


@pytest.mark.parametrize("fixture,kappa", [("sphere_profile", 1.0), ("hyperbolic_profile", -1.0)])
def test_space_form_volumes_match_model(request, fixture, kappa):
    profile = request.getfixturevalue(fixture)
    model = model_space(kappa)
    t = profile.t_grid
    np.testing.assert_allclose(profile.A, model.A(t), rtol=1e-8)
    np.testing.assert_allclose(profile.Aprime, model.Aprime(t), rtol=1e-7)
    np.testing.assert_allclose(profile.V, model.V(t), rtol=1e-7, atol=1e-12)
    np.testing.assert_allclose(profile.scal_integral, 6 * kappa * profile.A, rtol=1e-8, atol=1e-12)
    np.testing.assert_allclose(profile.ricci_max, 2 * kappa, atol=1e-8)


@pytest.mark.parametrize("kappa", [-1.0, 0.0, 1.0])
def test_space_forms_at_round_radii(kappa):
    family = SpaceForm(kappa)
    profile = ball_functions(family, None, RayOptions(t_max=1.0, step=0.01), sphere_quadrature(2))
    model = model_space(kappa)
    for t in (0.25, 0.5, 1.0):
        k = int(np.flatnonzero(profile.t_grid == t)[0])
        assert profile.A[k] == pytest.approx(float(model.A(np.array([t]))[0]), rel=1e-7)
        assert profile.V[k] == pytest.approx(float(model.V(np.array([t]))[0]), rel=1e-7)


def test_sphere_volume_at_one():
    assert float(model_space(1.0).V(np.array([1.0]))[0]) == pytest.approx(2 * math.pi * (1 - math.sin(2.0) / 2), rel=1e-14)


def test_product_volume_matches_slices(product_profile):
    t = product_profile.t_grid
    for k in (len(t) // 2, len(t) - 1):
        assert product_profile.V[k] == pytest.approx(product_volume(1.0, t[k]), rel=1e-7)
        assert product_profile.A[k] == pytest.approx(product_area(1.0, t[k]), rel=1e-8)


def test_ball_integral_of_area_is_volume(flat_profile, warped_profile):
    for profile in (flat_profile, warped_profile):
        np.testing.assert_allclose(profile.ball_integral(profile.A), profile.V, rtol=1e-13, atol=1e-15)


def test_restrict(sphere_profile):
    short = sphere_profile.restrict(0.5)
    assert short.t_grid[-1] <= 0.5 + 1e-12
    assert len(short.A) == len(short.t_grid) == len(short.sec_max)
    np.testing.assert_array_equal(short.V, sphere_profile.V[:len(short.t_grid)])
    assert short.quad_meta["restricted_to"] == 0.5
    assert short.family_spec == sphere_profile.family_spec


def test_profile_metadata(berger_profile):
    meta = berger_profile.quad_meta
    assert meta["level"] == 1
    assert meta["n_directions"] == 128
    assert meta["beyond_safe_radius"] is False
    assert berger_profile.family_spec == {"name": "berger", "epsilon": 0.5, "safe_radius": 0.45 * math.pi}
    assert meta["safe_radius"] == pytest.approx(0.45 * math.pi)
    assert berger_profile.step == pytest.approx(0.01)
    assert berger_profile.t_grid[1] == pytest.approx(0.01)


@pytest.mark.parametrize("kappa", [-2.0, -0.5, 0.0, 0.5, 1.0, 2.0])
def test_model_space_identities(kappa):
    model = model_space(kappa)
    t = np.linspace(0.05, 1.5, 30)
    h = 1e-5
    np.testing.assert_allclose((model.V(t + h) - model.V(t - h)) / (2 * h), model.A(t), rtol=1e-8)
    np.testing.assert_allclose((model.A(t + h) - model.A(t - h)) / (2 * h), model.Aprime(t), rtol=1e-7, atol=1e-9)
    np.testing.assert_allclose((model.Aprime(t + h) - model.Aprime(t - h)) / (2 * h), model.Asecond(t),
                               rtol=1e-6, atol=1e-8)
    np.testing.assert_allclose(model.sn_second(t), -kappa * model.sn(t))


def test_model_volume_is_continuous_at_series_switch():
    for kappa in (-1.0, 1.0):
        edge = math.sqrt(0.5 / abs(kappa))
        below, above = model_space(kappa).V(np.array([edge * (1 - 1e-12), edge * (1 + 1e-12)]))
        assert below == pytest.approx(above, rel=1e-11)
    np.testing.assert_allclose(model_space(0.0).V(np.array([0.5, 2.0])), [math.pi / 6, 32 * math.pi / 3])


def test_second_derivative_of_area(flat_profile, sphere_profile, hyperbolic_profile):
    value, err = second_derivative_A(flat_profile, 0.5)
    assert value == pytest.approx(8 * math.pi, rel=1e-8)
    assert err < 1e-6
    value, err = second_derivative_A(sphere_profile, 1.0)
    assert value == pytest.approx(8 * math.pi * math.cos(2.0), abs=1e-5)
    assert err < 1e-5
    t_inner, values, errors = second_derivative_grid(sphere_profile)
    np.testing.assert_allclose(values, 8 * math.pi * np.cos(2 * t_inner), atol=1e-5)
    assert np.all(errors > 0)
    assert 1.0 in hyperbolic_profile.t_grid
    value, _ = second_derivative_A(hyperbolic_profile, 1.0)
    assert value == pytest.approx(8 * math.pi * math.cosh(2.0), rel=1e-5)


def test_second_derivative_needs_interior_points(flat_profile):
    with pytest.raises(BoundaryPoint):
        second_derivative_A(flat_profile, flat_profile.t_grid[1])
    with pytest.raises(BoundaryPoint):
        second_derivative_A(flat_profile, flat_profile.t_grid[-1])


def test_conjugate_point_inside_range_is_reported():
    family = BergerSphere(0.5)
    opts = RayOptions(t_max=6.4, step=0.05, allow_beyond_safe=True)
    with pytest.raises(ConjugateInsideRange) as info:
        ball_functions(family, None, opts, sphere_quadrature(1))
    # the fibre ray is conjugate at π/ε; sec ≤ 4 − 3ε² keeps every ray beyond π/√3.25
    assert math.pi / math.sqrt(3.25) - 1e-6 <= info.value.conjugate_t <= 2 * math.pi + 1e-6
    assert len(info.value.direction) == 3


def test_quadrature_convergence():
    opts = RayOptions(t_max=1.0, step=0.02)
    assert quadrature_convergence(SpaceForm(-1.0), None, opts, 1) <= 1e-9
    assert quadrature_convergence(BergerSphere(0.5), None, opts, 2) <= 1e-7


def test_doubly_warped_default_level_is_resolved():
    family = DoublyWarped(2.0)
    opts = RayOptions(t_max=0.5, step=0.02)
    assert quadrature_convergence(family, None, opts, family.quadrature_level) <= 1e-7


def test_resolution_check_raises_when_levels_disagree():
    calls = []

    def biased(family, p, u, opts):
        # the first call is the level-1 fan, later ones belong to the doubled level
        calls.append(len(u))
        fields = local_evaluator(family, p, u, opts)
        if len(calls) > 1:
            fields["lam"] = fields["lam"] * (1 + 1e-3)
        return fields

    opts = RayOptions(t_max=0.5, step=0.05)
    with pytest.raises(QuadratureUnderResolved):
        ball_functions(SpaceForm(0.0), None, opts, sphere_quadrature(1), evaluator=biased, resolution_tol=1e-6)
    ball_functions(SpaceForm(0.0), None, opts, sphere_quadrature(1), resolution_tol=1e-6)


def test_chunked_evaluation_matches_single_batch():
    family = DoublyWarped(2.0)
    opts = RayOptions(t_max=0.5, step=0.02)
    whole = ball_functions(family, None, opts, sphere_quadrature(1))
    chunked = ball_functions(family, None, opts, sphere_quadrature(1), chunk_size=32)
    np.testing.assert_allclose(chunked.A, whole.A, rtol=1e-8)
    np.testing.assert_allclose(chunked.V, whole.V, rtol=1e-8)
    again = ball_functions(family, None, opts, sphere_quadrature(1), chunk_size=32)
    assert again.A.tobytes() == chunked.A.tobytes()
    assert again.V.tobytes() == chunked.V.tobytes()
