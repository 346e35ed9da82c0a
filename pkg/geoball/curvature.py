"""
Riemann tensor, curvature operator, Ricci and scalar curvature, and K+.

Conventions:
    R(X, Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z
    riemann[..., i, j, k, l]  = R^l_ijk, i.e. R(∂_i, ∂_j)∂_k = R^l_ijk ∂_l
    lowered[..., i, j, k, l]  = g(R(∂_i, ∂_j)∂_k, ∂_l)
    sec(X, Y) = lowered(X, Y, Y, X) / (|X|²|Y|² − g(X, Y)²)

With these signs the round unit sphere has sec ≡ +1. The curvature operator
is written in the orthonormal bivector basis e1∧e2, e1∧e3, e2∧e3 with
op[A, B] = lowered(e_i, e_j, e_l, e_k) for A = (i, j), B = (k, l), so its
diagonal holds the sectional curvatures of the coordinate planes.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate, optimize

from geoball.errors import DegeneratePlane, DivergentIntegral, QuadratureUnderResolved
from geoball.manifolds.base import christoffel_from_metric, frame_matrix, inverse_metric
from geoball.manifolds.rotational import RotSymmetric

logger = logging.getLogger(__name__)

BIVECTORS = ((0, 1), (0, 2), (1, 2))


@dataclass(frozen=True)
class CurvatureAtPoint:
    riemann: np.ndarray
    riemann_0_4: np.ndarray
    frame: np.ndarray
    frame_riemann: np.ndarray
    op_matrix: np.ndarray
    op_eigenvalues: np.ndarray
    ricci: np.ndarray
    ricci_eigenvalues: np.ndarray
    scalar: float

    def antisymmetry_residual(self):
        r = self.riemann_0_4
        return float(max(np.max(np.abs(r + np.swapaxes(r, 0, 1))),
                         np.max(np.abs(r + np.swapaxes(r, 2, 3)))))

    def pair_symmetry_residual(self):
        r = self.riemann_0_4
        return float(np.max(np.abs(r - np.einsum("ijkl->klij", r))))

    def bianchi_residual(self):
        r = self.riemann_0_4
        cyc = r + np.einsum("jkil->ijkl", r) + np.einsum("kijl->ijkl", r)
        return float(np.max(np.abs(cyc)))

    def self_adjoint_residual(self):
        return float(np.max(np.abs(self.op_matrix - self.op_matrix.T)))

    def trace_residual(self):
        return abs(float(np.trace(self.ricci)) - self.scalar)

    def scale(self):
        return max(1.0, float(np.max(np.abs(self.riemann_0_4))))


@dataclass(frozen=True)
class KPlusValue:
    value: float


def riemann_from_metric(g, dg, d2g):
    """
    R^l_ijk and g(R(∂_i,∂_j)∂_k, ∂_l) from exact metric derivatives (batched).

    Returns:
        (gamma, riemann, lowered)
    """
    ginv = inverse_metric(g)
    gamma = christoffel_from_metric(g, dg, ginv)
    # first[m, j, k] = Γ_mjk with the first index lowered
    first = 0.5 * (np.einsum("...kmj->...mjk", dg)
                   + np.einsum("...jmk->...mjk", dg)
                   - np.einsum("...jkm->...mjk", dg))
    d_first = 0.5 * (np.einsum("...kmji->...imjk", d2g)
                     + np.einsum("...jmki->...imjk", d2g)
                     - np.einsum("...jkmi->...imjk", d2g))
    # ∂_i g^{lm} = −g^{la} ∂_i g_ab g^{bm}
    d_ginv = -np.einsum("...la,...abi,...bm->...ilm", ginv, dg, ginv)
    d_gamma = (np.einsum("...ilm,...mjk->...iljk", d_ginv, first)
               + np.einsum("...lm,...imjk->...iljk", ginv, d_first))

    riemann = (np.einsum("...iljk->...ijkl", d_gamma)
               - np.einsum("...jlik->...ijkl", d_gamma)
               + np.einsum("...lim,...mjk->...ijkl", gamma, gamma)
               - np.einsum("...ljm,...mik->...ijkl", gamma, gamma))
    lowered = np.einsum("...ijkm,...ml->...ijkl", riemann, g)
    return gamma, riemann, lowered


def riemann_from_structure(structure_constants):
    """
    Curvature of a left-invariant metric in its orthonormal frame.

    With Γ_ijk = ⟨∇_{E_i}E_j, E_k⟩:
        ⟨R(E_i,E_j)E_l, E_n⟩ = Σ_m (Γ_jlm Γ_imn − Γ_ilm Γ_jmn − c_ijm Γ_mln)
    """
    c = np.asarray(structure_constants, dtype=float)
    lowered_gamma = 0.5 * (c - np.einsum("jki->ijk", c) + np.einsum("kij->ijk", c))
    G = lowered_gamma
    return (np.einsum("jlm,imn->ijln", G, G)
            - np.einsum("ilm,jmn->ijln", G, G)
            - np.einsum("ijm,mln->ijln", c, G))


def geometry_arrays(family, x, chart_id=None):
    """
    Metric, Christoffel symbols and lowered Riemann tensor at a batch of points.

    Homogeneous families return their constant frame data broadcast to x.
    """
    x = np.asarray(x, dtype=float)
    lead = x.shape[:-1]
    if family.backend == "homogeneous":
        c = family.data.structure_constants
        g = np.broadcast_to(np.eye(3), lead + (3, 3))
        gamma = np.broadcast_to(family.frame_connection(), lead + (3, 3, 3))
        lowered = np.broadcast_to(riemann_from_structure(c), lead + (3, 3, 3, 3))
        return g, gamma, lowered
    g, dg, d2g = family.metric_arrays(x, chart_id)
    gamma, _, lowered = riemann_from_metric(g, dg, d2g)
    return g, gamma, lowered


def to_frame(lowered, frame):
    """Components of a lowered (0,4) tensor in the frame F[..., :, a] = e_a."""
    return np.einsum("...ai,...bj,...ck,...dl,...abcd->...ijkl", frame, frame, frame, frame, lowered)


def operator_matrix(frame_riemann):
    """Curvature operator on the orthonormal bivector basis (batched)."""
    lead = frame_riemann.shape[:-4]
    op = np.zeros(lead + (3, 3))
    for A, (i, j) in enumerate(BIVECTORS):
        for B, (k, l) in enumerate(BIVECTORS):
            op[..., A, B] = frame_riemann[..., i, j, l, k]
    return op


def ricci_matrix(frame_riemann):
    """Ric(e_b, e_c) = Σ_a ⟨R(e_a, e_b)e_c, e_a⟩."""
    return np.einsum("...abca->...bc", frame_riemann)


def curvature_at(family, p):
    """Full curvature data at p."""
    family.check_chart(p)
    x = p.array()
    if family.backend == "homogeneous":
        g, _, lowered = geometry_arrays(family, x)
        riemann = np.array(lowered)
        lowered = np.array(lowered)
    else:
        g, dg, d2g = family.metric_arrays(x, p.chart_id)
        _, riemann, lowered = riemann_from_metric(g, dg, d2g)
    frame = frame_matrix(np.asarray(g))
    frame_riemann = to_frame(lowered, frame)
    op = operator_matrix(frame_riemann)
    ric = ricci_matrix(frame_riemann)
    return CurvatureAtPoint(
        riemann=riemann,
        riemann_0_4=lowered,
        frame=frame,
        frame_riemann=frame_riemann,
        op_matrix=op,
        op_eigenvalues=np.linalg.eigvalsh(0.5 * (op + op.T)),
        ricci=ric,
        ricci_eigenvalues=np.linalg.eigvalsh(0.5 * (ric + ric.T)),
        scalar=float(np.trace(ric)),
    )


def riemann_at(family, p):
    return curvature_at(family, p)


def curvature_operator_at(family, p):
    """Curvature operator matrix and its eigenvalues (ascending)."""
    data = curvature_at(family, p)
    return data.op_matrix, data.op_eigenvalues


def ricci_at(family, p):
    """Ricci matrix in the orthonormal frame, its eigenvalues and the scalar curvature."""
    data = curvature_at(family, p)
    return data.ricci, data.ricci_eigenvalues, data.scalar


def sectional_at(family, p, v, w):
    """
    Sectional curvature of span{v, w} at p.

    Raises:
        DegeneratePlane: Gram determinant ≤ 1e-14
    """
    data = curvature_at(family, p)
    g, _, _ = family.metric_arrays(p.array(), p.chart_id)
    a, b = v.array(), w.array()
    gram = (a @ g @ a) * (b @ g @ b) - (a @ g @ b) ** 2
    if gram <= 1e-14:
        raise DegeneratePlane(f"vectors {v.components} and {w.components} do not span a plane (gram={gram:.3e})")
    return float(np.einsum("ijkl,i,j,k,l->", data.riemann_0_4, a, b, b, a) / gram)


def k_plus_at(family, p):
    top = curvature_at(family, p).ricci_eigenvalues[-1]
    return KPlusValue(max(0.0, float(top)))


def sectional_max_at(family, p):
    """Largest sectional curvature at p, the top curvature-operator eigenvalue."""
    return float(curvature_at(family, p).op_eigenvalues[-1])


def k_plus_profile(profile, r):
    """
    Analytic Ricci eigenvalues and K+ of dr² + f²·g_S² at radius r.

    Returns:
        (radial, tangential, k_plus) with radial = −2f″/f and
        tangential = −f″/f + (1 − f′²)/f²
    """
    f, f1, f2 = profile.evaluate(np.asarray(r, dtype=float))
    radial = -2.0 * f2 / f
    tangential = -f2 / f + (1.0 - f1 * f1) / (f * f)
    return radial, tangential, np.maximum(0.0, np.maximum(radial, tangential))


def _k_plus_breakpoints(profile, r_max, samples=4001):
    """Joins and kinks of K+ on (0, r_max); between them the integrand is smooth."""
    points = {0.0, float(r_max)}
    points.update(float(j) for j in profile.joins if 0 < j < r_max)
    edges = sorted(points)
    kinks = set()
    for lo, hi in zip(edges, edges[1:]):
        grid = np.linspace(lo, hi, samples)[1:-1]
        for fn in (lambda r: k_plus_profile(profile, r)[0],
                   lambda r: k_plus_profile(profile, r)[1],
                   lambda r: np.subtract(*k_plus_profile(profile, r)[:2])):
            vals = fn(grid)
            signs = np.sign(np.where(np.abs(vals) < 1e-9, 0.0, vals))
            for i in np.nonzero(signs[:-1] * signs[1:] < 0)[0]:
                kinks.add(optimize.brentq(lambda r: float(fn(np.array([r]))[0]), grid[i], grid[i + 1], xtol=1e-15))
    return sorted(points | kinks)


def total_k_plus(family, r_max=None, rule="adaptive", truncate=False):
    """
    C = ∫ K+ dV = ∫_0^{r_max} K+(r)·4πf(r)² dr for a rotationally symmetric family.

    Args:
        family: RotSymmetric
        r_max: upper radius, defaults to the end of the profile's safe range
        rule: "adaptive" (QUADPACK) or "gauss" (composite Gauss–Legendre)
        truncate: integrate over the ball of radius r_max even when K+ is
            still positive there

    Raises:
        DivergentIntegral: K+ does not vanish at r_max and truncate is False
        QuadratureUnderResolved: adaptive error estimate above 1e-8 relative
    """
    if not isinstance(family, RotSymmetric):
        raise ValueError(f"total_k_plus needs a rotationally symmetric family, got {family.describe()}")
    profile = family.profile
    r_max = family.safe_radius if r_max is None else float(r_max)

    _, _, tail = k_plus_profile(profile, np.array([r_max]))
    if tail[0] > 1e-12 and not truncate:
        raise DivergentIntegral(f"K+ = {tail[0]:.3e} > 0 at r_max = {r_max}; the total integral does not converge")

    def integrand(r):
        r = np.asarray(r, dtype=float)
        f, _, _ = profile.evaluate(r)
        return k_plus_profile(profile, r)[2] * 4.0 * math.pi * f * f

    pieces = _k_plus_breakpoints(profile, r_max)
    total = 0.0
    error = 0.0
    for lo, hi in zip(pieces, pieces[1:]):
        if rule == "adaptive":
            val, err = integrate.quad(lambda r: float(integrand(np.array([r]))[0]), lo, hi,
                                      epsabs=1e-13, epsrel=1e-11, limit=200)
            total += val
            error += err
        elif rule == "gauss":
            nodes, weights = leggauss(48)
            panels = np.linspace(lo, hi, 9)
            for a, b in zip(panels, panels[1:]):
                half = 0.5 * (b - a)
                total += half * float(np.dot(weights, integrand(a + half * (nodes + 1.0))))
        else:
            raise ValueError(f"unknown quadrature rule '{rule}' (expected 'adaptive' or 'gauss')")
    if error > 1e-8 * abs(total) + 1e-14:
        raise QuadratureUnderResolved(f"total K+ error estimate {error:.3e} exceeds 1e-8 relative of {total:.6g}")
    logger.debug("total_k_plus(%s, r_max=%s, rule=%s) = %.12g over %d pieces",
                 family.describe(), r_max, rule, total, len(pieces) - 1)
    return total
