import math

import numpy as np
import pytest

from geoball.curvature import (
    curvature_at,
    curvature_operator_at,
    k_plus_at,
    k_plus_profile,
    ricci_at,
    riemann_at,
    sectional_at,
    sectional_max_at,
    total_k_plus,
)
from geoball.errors import DegeneratePlane, DivergentIntegral
from geoball.manifolds import (
    BergerSphere,
    ChartPoint,
    DoublyWarped,
    ProductS2R,
    SpaceForm,
    TangentVector,
    make_cap_metric,
    orthonormal_frame_at,
    sn_profile,
)

POINTS = [
    (SpaceForm(1.0), (0.4, -0.2, 0.7), "conformal"),
    (SpaceForm(-1.0), (0.4, -0.2, 0.7), "conformal"),
    (DoublyWarped(2.0), (0.5, 0.3, -1.2), "warped"),
    (ProductS2R(1.0), (0.6, -0.3, 2.0), "stereo"),
    (ProductS2R(2.0), (1.1, 0.4, -0.5), "polar"),
    (BergerSphere(0.5), (0.0, 0.0, 0.0), "frame"),
    (sn_profile(1.0), (0.3, 0.2, -0.1), "cartesian"),
    (sn_profile(-1.0), (0.7, -0.5, 0.9), "cartesian"),
    (make_cap_metric(1.0, 0.2), (0.6, 0.7, -0.4), "cartesian"),
]


def test_unit_sphere_has_sectional_curvature_one():
    family = SpaceForm(1.0)
    p = ChartPoint((0.3, 0.1, -0.2), "conformal")
    v = TangentVector(p, (1.0, 0.0, 0.0))
    w = TangentVector(p, (0.0, 1.0, 0.0))
    assert sectional_at(family, p, v, w) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("kappa", [-2.0, -1.0, 0.0, 0.5, 1.0, 2.0])
def test_space_form_sectional_curvature_on_random_planes(kappa, rng):
    family = SpaceForm(kappa)
    chart = family.canonical_chart
    for _ in range(5):
        p = ChartPoint(rng.uniform(-0.4, 0.4, 3), chart)
        v = TangentVector(p, rng.normal(size=3))
        w = TangentVector(p, rng.normal(size=3))
        assert sectional_at(family, p, v, w) == pytest.approx(kappa, abs=1e-9)


@pytest.mark.parametrize("kappa", [-1.0, 0.0, 1.0, 2.0])
def test_space_form_riemann_components(kappa, rng):
    family = SpaceForm(kappa)
    p = ChartPoint(rng.uniform(-0.4, 0.4, 3), family.canonical_chart)
    g, _, _ = family.metric_arrays(p.array())
    eye = np.eye(3)
    # R(∂_i, ∂_j)∂_k = κ(g_jk ∂_i − g_ik ∂_j)
    expected = kappa * (np.einsum("jk,il->ijkl", g, eye) - np.einsum("ik,jl->ijkl", g, eye))
    data = riemann_at(family, p)
    np.testing.assert_allclose(data.riemann, expected, atol=1e-10)
    np.testing.assert_allclose(data.riemann_0_4, np.einsum("ijkm,ml->ijkl", expected, g), atol=1e-10)
    assert data.riemann[0, 1, 1, 0] == pytest.approx(kappa * g[1, 1], abs=1e-10)


@pytest.mark.parametrize("family", [
    SpaceForm(0.5), SpaceForm(1.0), SpaceForm(2.0), SpaceForm(-1.0),
    DoublyWarped(1.5), DoublyWarped(2.0), DoublyWarped(3.0),
    BergerSphere(0.25), BergerSphere(0.5), BergerSphere(0.9),
    ProductS2R(0.5), ProductS2R(1.0), ProductS2R(2.0),
], ids=lambda f: f.describe())
def test_eigenvalues_match_closed_forms(family):
    op_expected, ric_expected = family.expected_eigenvalues()
    data = curvature_at(family, family.base_point())
    np.testing.assert_allclose(data.op_eigenvalues, op_expected, atol=1e-9)
    np.testing.assert_allclose(data.ricci_eigenvalues, ric_expected, atol=1e-9)
    assert data.scalar == pytest.approx(float(np.sum(ric_expected)), abs=1e-9)


def test_doubly_warped_eigenvalues_at_a_equals_two():
    family = DoublyWarped(2.0)
    p = ChartPoint((0.3, 1.0, -2.0), "warped")
    _, eigenvalues = curvature_operator_at(family, p)
    np.testing.assert_allclose(eigenvalues, [-9.0, -1.0, 3.0], atol=1e-9)
    _, ric_eigenvalues, scalar = ricci_at(family, p)
    np.testing.assert_allclose(ric_eigenvalues, [-10.0, -6.0, 2.0], atol=1e-9)
    assert scalar == pytest.approx(-14.0, abs=1e-9)


def test_berger_eigenvalues():
    family = BergerSphere(0.5)
    _, eigenvalues = curvature_operator_at(family, family.base_point())
    np.testing.assert_allclose(eigenvalues, [0.25, 0.25, 3.25], atol=1e-12)
    assert sectional_max_at(family, family.base_point()) == pytest.approx(3.25, abs=1e-12)
    assert k_plus_at(family, family.base_point()).value == pytest.approx(3.5, abs=1e-12)


def test_product_eigenvalues_in_both_charts():
    family = ProductS2R(1.0)
    for p in (family.base_point(), family.polar_base_point()):
        _, eigenvalues = curvature_operator_at(family, p)
        np.testing.assert_allclose(eigenvalues, [0.0, 0.0, 1.0], atol=1e-10)


def test_product_sectional_curvature_of_mixed_planes():
    family = ProductS2R(1.0)
    p = family.polar_base_point()
    e_theta = TangentVector(p, (1.0, 0.0, 0.0))
    e_phi = TangentVector(p, (0.0, 1.0, 0.0))
    e_z = TangentVector(p, (0.0, 0.0, 1.0))
    assert sectional_at(family, p, e_theta, e_phi) == pytest.approx(1.0, abs=1e-12)
    assert sectional_at(family, p, e_theta, e_z) == pytest.approx(0.0, abs=1e-12)
    assert sectional_at(family, p, e_phi, e_z) == pytest.approx(0.0, abs=1e-12)


def test_degenerate_plane_is_rejected():
    family = SpaceForm(1.0)
    p = family.base_point()
    v = TangentVector(p, (1.0, 2.0, 0.0))
    with pytest.raises(DegeneratePlane):
        sectional_at(family, p, v, TangentVector(p, (2.0, 4.0, 0.0)))
    with pytest.raises(DegeneratePlane):
        sectional_at(family, p, v, TangentVector(p, (0.0, 0.0, 0.0)))


def test_k_plus_is_clamped_at_zero():
    assert k_plus_at(SpaceForm(-1.0), SpaceForm(-1.0).base_point()).value == 0.0
    assert k_plus_at(DoublyWarped(2.0), DoublyWarped(2.0).base_point()).value == pytest.approx(2.0, abs=1e-9)
    assert k_plus_at(SpaceForm(1.0), SpaceForm(1.0).base_point()).value == pytest.approx(2.0, abs=1e-10)


@pytest.mark.parametrize("family,coords,chart", POINTS, ids=lambda v: getattr(v, "describe", lambda: str(v))())
def test_curvature_symmetries(family, coords, chart):
    data = curvature_at(family, ChartPoint(coords, chart))
    tol = 1e-10 * data.scale()
    assert data.antisymmetry_residual() <= tol
    assert data.pair_symmetry_residual() <= tol
    assert data.bianchi_residual() <= tol
    assert data.self_adjoint_residual() <= tol
    assert data.trace_residual() <= tol


@pytest.mark.parametrize("family,coords,chart", POINTS, ids=lambda v: getattr(v, "describe", lambda: str(v))())
def test_ricci_diagonal_is_sum_of_sectional_curvatures(family, coords, chart):
    p = ChartPoint(coords, chart)
    frame = orthonormal_frame_at(family, p)
    ric, _, _ = ricci_at(family, p)
    for b in range(3):
        total = sum(sectional_at(family, p, frame[a], frame[b]) for a in range(3) if a != b)
        assert ric[b, b] == pytest.approx(total, abs=1e-9 * max(1.0, abs(total)))


def test_operator_diagonal_holds_coordinate_plane_curvatures():
    family = DoublyWarped(2.0)
    p = ChartPoint((0.2, 0.0, 0.0), "warped")
    op, _ = curvature_operator_at(family, p)
    # e1∧e2, e1∧e3, e2∧e3 are the (r,θ), (r,φ), (θ,φ) planes
    np.testing.assert_allclose(np.diag(op), [-9.0, -1.0, 3.0], atol=1e-9)


@pytest.mark.parametrize("r", [0.3, 0.8, 1.1, 1.5, 2.5])
def test_profile_k_plus_agrees_with_tensor_pipeline(cap_family, r):
    p = ChartPoint((r / math.sqrt(3),) * 3, "cartesian")
    _, _, k_plus = k_plus_profile(cap_family.profile, np.array([r]))
    assert k_plus_at(cap_family, p).value == pytest.approx(float(k_plus[0]), abs=1e-8)


def test_round_profile_ricci_eigenvalues():
    radial, tangential, k_plus = k_plus_profile(sn_profile(1.0).profile, np.array([0.4, 1.2, 2.0]))
    np.testing.assert_allclose(radial, 2.0, atol=1e-12)
    np.testing.assert_allclose(tangential, 2.0, atol=1e-12)
    np.testing.assert_allclose(k_plus, 2.0, atol=1e-12)


def test_total_k_plus_of_flat_profile_is_zero():
    assert total_k_plus(sn_profile(0.0)) == 0.0


def test_total_k_plus_of_round_hemisphere():
    family = sn_profile(1.0)
    for rule in ("adaptive", "gauss"):
        assert total_k_plus(family, math.pi / 2, rule=rule, truncate=True) == pytest.approx(
            2 * math.pi ** 2, rel=1e-10)


def test_total_k_plus_diverges_when_curvature_persists():
    with pytest.raises(DivergentIntegral):
        total_k_plus(sn_profile(1.0), 2.0)


def test_total_k_plus_of_cap_metric(cap_family):
    adaptive = total_k_plus(cap_family)
    gauss = total_k_plus(cap_family, rule="gauss")
    assert adaptive == pytest.approx(gauss, rel=1e-6)
    # K+ = 2 on the round part, the blend only adds
    round_part = 4 * math.pi - 2 * math.pi * math.sin(2.0)
    assert total_k_plus(cap_family, 1.0, truncate=True) == pytest.approx(round_part, rel=1e-10)
    assert adaptive >= round_part


def test_total_k_plus_rejects_other_families():
    with pytest.raises(ValueError):
        total_k_plus(SpaceForm(1.0))
    with pytest.raises(ValueError):
        total_k_plus(sn_profile(1.0), math.pi / 2, rule="simpson", truncate=True)
