import math

import numpy as np
import pytest

from geoball.errors import ConstraintError, OutOfChart, PastConjugate
from geoball.geodesics import (
    RayOptions,
    complete_frames,
    conjugate_point_scan,
    integrate_fan,
    integrate_radial,
    mean_curvature_small_t_check,
    riccati_residual,
    shape_operator,
)
from geoball.manifolds import BergerSphere, ChartPoint, DoublyWarped, SpaceForm, TangentVector


class BoxedFlat(SpaceForm):
    """Flat space on the half space x < 0.5, to watch rays leave the chart."""

    def __init__(self):
        super().__init__(0.0)

    def in_chart(self, x, chart_id=None):
        return super().in_chart(x, chart_id) & (np.asarray(x)[..., 0] < 0.5)


def sn(kappa, t):
    if kappa > 0:
        return math.sin(math.sqrt(kappa) * t) / math.sqrt(kappa)
    if kappa < 0:
        return math.sinh(math.sqrt(-kappa) * t) / math.sqrt(-kappa)
    return t


def ray(family, direction, t_max, **kwargs):
    p = family.base_point()
    return integrate_radial(family, p, TangentVector(p, direction), RayOptions(t_max=t_max, **kwargs))


@pytest.fixture(scope="module")
def antipodal_ray():
    # starts on the chart sphere |x| = 2 (the equator) and runs through the origin to the antipode
    family = SpaceForm(1.0)
    p = ChartPoint((-2.0, 0.0, 0.0), "conformal")
    opts = RayOptions(t_max=4.0, allow_beyond_safe=True)
    return integrate_radial(family, p, TangentVector(p, (2.0, 0.0, 0.0)), opts)


def test_flat_jacobi_matrix_grows_linearly():
    rd = ray(SpaceForm(0.0), (0.0, 0.6, 0.8), 1.0)
    expected = rd.t_grid[:, None, None] * np.eye(2)
    np.testing.assert_allclose(rd.J, expected, atol=1e-12)
    np.testing.assert_allclose(rd.Jprime, np.broadcast_to(np.eye(2), rd.Jprime.shape), atol=1e-12)
    np.testing.assert_allclose(rd.positions[-1], [0.0, 0.6, 0.8], atol=1e-12)
    assert rd.conjugate_t is None


@pytest.mark.parametrize("kappa", [-1.0, 1.0])
def test_space_form_jacobian_is_sn_squared(kappa):
    rd = ray(SpaceForm(kappa), (0.6, 0.0, 0.8), 1.2)
    expected = np.array([sn(kappa, t) ** 2 for t in rd.t_grid])
    np.testing.assert_allclose(rd.lam, expected, rtol=1e-8)


@pytest.mark.parametrize("kappa,t,expected", [
    (1.0, 0.5, 2.0 / math.tan(0.5)),
    (-1.0, 0.5, 2.0 / math.tanh(0.5)),
    (-1.0, 1.0, 2.0 / math.tanh(1.0)),
])
def test_space_form_mean_curvature(kappa, t, expected):
    rd = ray(SpaceForm(kappa), (1.0, 0.0, 0.0), 1.2)
    _, trace, _ = shape_operator(rd, t)
    assert trace == pytest.approx(expected, rel=1e-6)


def test_flat_shape_operator():
    rd = ray(SpaceForm(0.0), (1.0, 0.0, 0.0), 1.0)
    S, trace, norm_sq = shape_operator(rd, 0.5)
    np.testing.assert_allclose(S, 2.0 * np.eye(2), rtol=1e-8)
    assert trace == pytest.approx(4.0, rel=1e-8)
    assert norm_sq == pytest.approx(8.0, rel=1e-8)


def test_shape_operator_outside_grid():
    rd = ray(SpaceForm(0.0), (1.0, 0.0, 0.0), 1.0)
    with pytest.raises(ValueError):
        shape_operator(rd, 1.5)


def test_conjugate_point_of_round_sphere_is_at_pi(antipodal_ray):
    assert antipodal_ray.conjugate_t == pytest.approx(math.pi, abs=1e-6)
    assert conjugate_point_scan(antipodal_ray) == pytest.approx(math.pi, abs=1e-6)
    np.testing.assert_allclose(antipodal_ray.positions[np.argmin(np.abs(antipodal_ray.t_grid - math.pi))],
                               [2.0, 0.0, 0.0], atol=0.05)


def test_shape_operator_past_conjugate_point(antipodal_ray):
    shape_operator(antipodal_ray, 3.0)
    with pytest.raises(PastConjugate):
        shape_operator(antipodal_ray, 3.5)


def test_no_conjugate_point_within_berger_safe_radius():
    family = BergerSphere(0.5)
    u = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.6, 0.0, 0.8], [0.0, 0.8, -0.6]])
    rays = integrate_fan(family, family.base_point(), u, RayOptions(t_max=1.4), frame_coordinates=True)
    assert all(rd.conjugate_t is None for rd in rays)
    assert all(np.all(rd.lam[1:] > 0) for rd in rays)


def test_berger_fiber_ray_sees_constant_curvature():
    family = BergerSphere(0.5)
    rays = integrate_fan(family, family.base_point(), [[1.0, 0.0, 0.0]], RayOptions(t_max=1.4),
                         frame_coordinates=True)
    # E1 spans the shrunk fibre; planes containing it have curvature ε²
    np.testing.assert_allclose(rays[0].lam, [sn(0.25, t) ** 2 for t in rays[0].t_grid], rtol=1e-8)


def test_riccati_equation_holds_along_rays():
    family = DoublyWarped(2.0)
    d = np.array([1.0, 1.0, 1.0]) / math.sqrt(3.0)
    rd = ray(family, d, 0.8)
    assert riccati_residual(rd) <= 1e-6


def test_speed_and_frame_are_preserved():
    for family, t_max in ((DoublyWarped(2.0), 0.8), (SpaceForm(1.0), 2.0), (BergerSphere(0.5), 1.4)):
        p = family.base_point()
        rays = integrate_fan(family, p, [[0.6, 0.0, 0.8], [0.0, 1.0, 0.0]], RayOptions(t_max=t_max),
                             frame_coordinates=True)
        for rd in rays:
            assert np.max(rd.speed_drift) <= 1e-8
            assert np.max(rd.frame_drift) <= 1e-8


def test_small_t_mean_curvature():
    flat = ray(SpaceForm(0.0), (1.0, 0.0, 0.0), 0.2)
    assert mean_curvature_small_t_check(flat) <= 1e-6
    sphere = ray(SpaceForm(1.0), (1.0, 0.0, 0.0), 0.2)
    # tr S = 2/t − Ric(u, u)·t/3 + O(t³) with Ric = 2
    assert mean_curvature_small_t_check(sphere) == pytest.approx(2.0 / 3.0, abs=1e-3)


def test_fan_keeps_direction_order():
    family = SpaceForm(-1.0)
    u = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 0.6, 0.8]])
    rays = integrate_fan(family, family.base_point(), u, RayOptions(t_max=0.5))
    for rd, direction in zip(rays, u):
        np.testing.assert_allclose(rd.direction.array(), direction)
        assert np.dot(rd.positions[-1], direction) > 0.0


def test_complete_frames_are_positively_oriented():
    u = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.6, -0.8], [0.48, 0.6, 0.64]])
    e1, e2 = complete_frames(u)
    for a, b, c in zip(e1, e2, u):
        frame = np.stack([a, b, c])
        np.testing.assert_allclose(frame @ frame.T, np.eye(3), atol=1e-14)
        assert np.linalg.det(frame) == pytest.approx(1.0, abs=1e-14)


def test_ray_options_are_validated():
    family = SpaceForm(1.0)
    p = family.base_point()
    d = TangentVector(p, (1.0, 0.0, 0.0))
    with pytest.raises(ConstraintError):
        integrate_radial(family, p, d, RayOptions(t_max=3.0))
    with pytest.raises(ConstraintError):
        integrate_radial(family, p, d, RayOptions(t_max=1.0, step=0.0))
    with pytest.raises(ConstraintError):
        integrate_radial(family, p, d, RayOptions(t_max=1e-5))
    with pytest.raises(ValueError):
        integrate_radial(family, p, TangentVector(p, (2.0, 0.0, 0.0)), RayOptions(t_max=1.0))


def test_t_grid_spans_t0_to_t_max():
    grid = RayOptions(t_max=1.0, step=0.01).t_grid()
    assert grid[0] == 1e-4
    assert grid[-1] == 1.0
    assert np.all(np.diff(grid) <= 0.01 + 1e-15)
    np.testing.assert_allclose(np.diff(grid[1:]), 0.01, rtol=1e-12)


@pytest.mark.parametrize("t_max, step", [(1.0, 0.01), (1.5, 0.01), (1.3, 0.01), (0.8, 0.05), (1.0, 0.05)])
def test_t_grid_lands_on_round_radii(t_max, step):
    grid = RayOptions(t_max=t_max, step=step).t_grid()
    for t in (0.25, 0.5, 1.0):
        if t <= t_max:
            assert t in grid


def test_t_grid_with_step_not_dividing_t_max():
    grid = RayOptions(t_max=1.0, step=0.3).t_grid()
    np.testing.assert_allclose(grid, [1e-4, 0.25, 0.5, 0.75, 1.0])
    with pytest.raises(ConstraintError):
        RayOptions(t_max=1.0, step=1e-4).validate(SpaceForm(0.0))


def test_ray_leaving_the_chart():
    family = BoxedFlat()
    with pytest.raises(OutOfChart):
        ray(family, (1.0, 0.0, 0.0), 1.0)
    ray(family, (-1.0, 0.0, 0.0), 1.0)
    with pytest.raises(OutOfChart):
        integrate_radial(SpaceForm(-1.0), ChartPoint((2.5, 0.0, 0.0), "conformal"),
                         TangentVector(ChartPoint((2.5, 0.0, 0.0), "conformal"), (1.0, 0.0, 0.0)),
                         RayOptions(t_max=1.0))
