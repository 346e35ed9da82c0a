"""
Left-invariant metrics on 3-dimensional Lie groups.

A homogeneous family carries no chart: every quantity the toolkit needs is
expressed in a g-orthonormal left-invariant frame {E_1, E_2, E_3}, where the
metric is the identity, the connection coefficients are constants built from
the structure constants, and so is the curvature.
"""

import math
from dataclasses import dataclass

import numpy as np

from geoball.errors import ConstraintError

from .base import ChartPoint, MetricFamily


def su2_basis():
    """The basis X_1, X_2, X_3 of su(2) as complex 2×2 matrices."""
    x1 = np.array([[1j, 0], [0, -1j]])
    x2 = np.array([[0, 1], [-1, 0]], dtype=complex)
    x3 = np.array([[0, 1j], [1j, 0]])
    return [x1, x2, x3]


def structure_constants(basis):
    """
    c[i, j, k] = coefficient of E_k in [E_i, E_j] for a basis of matrices.

    The commutators are decomposed in the basis by least squares over the
    real and imaginary parts; a non-closing basis raises ValueError.
    """
    flat = np.array([np.concatenate([m.real.ravel(), m.imag.ravel()]) for m in basis]).T
    c = np.zeros((3, 3, 3))
    for i in range(3):
        for j in range(3):
            comm = basis[i] @ basis[j] - basis[j] @ basis[i]
            target = np.concatenate([comm.real.ravel(), comm.imag.ravel()])
            coeffs, *_ = np.linalg.lstsq(flat, target, rcond=None)
            if np.max(np.abs(flat @ coeffs - target)) > 1e-12:
                raise ValueError(f"basis is not closed under brackets at ({i}, {j})")
            c[i, j] = coeffs
    return c


@dataclass(frozen=True)
class HomogeneousData:
    """Structure constants c^k_ij = c[i, j, k] in an orthonormal frame."""

    structure_constants: np.ndarray

    @property
    def frame_metric(self):
        return np.eye(3)

    def antisymmetry_residual(self):
        c = self.structure_constants
        return float(np.max(np.abs(c + np.swapaxes(c, 0, 1))))

    def jacobi_residual(self):
        c = self.structure_constants
        cyc = (np.einsum("ijm,mkn->ijkn", c, c)
               + np.einsum("jkm,min->ijkn", c, c)
               + np.einsum("kim,mjn->ijkn", c, c))
        return float(np.max(np.abs(cyc)))

    def connection(self):
        """Γ[k, i, j] = ⟨∇_{E_i} E_j, E_k⟩ = ½(c_ijk − c_jki + c_kij) (Koszul)."""
        c = self.structure_constants
        lowered = 0.5 * (c - np.einsum("jki->ijk", c) + np.einsum("kij->ijk", c))
        return np.einsum("ijk->kij", lowered)


class BergerSphere(MetricFamily):
    """
    Berger sphere: SU(2) with {X_1/ε, X_2, X_3} orthonormal, 0 < ε < 1.

    The Hopf fiber direction X_1 is shrunk by ε; ε = 1 is the unit S³.
    """

    name = "berger"
    backend = "homogeneous"
    charts = ("frame",)

    def __init__(self, epsilon, safe_radius=None):
        epsilon = float(epsilon)
        if not 0 < epsilon < 1:
            raise ConstraintError(f"BergerSphere requires 0 < epsilon < 1, got epsilon={epsilon}")
        self.epsilon = epsilon
        x1, x2, x3 = su2_basis()
        self.data = HomogeneousData(structure_constants([x1 / epsilon, x2, x3]))
        super().__init__(safe_radius)

    @property
    def parameters(self):
        return {"epsilon": self.epsilon}

    def default_safe_radius(self):
        # the Hopf fiber through p closes after length 2πε
        return 0.9 * math.pi * self.epsilon

    def base_point(self):
        return ChartPoint((0.0, 0.0, 0.0), "frame")

    def metric_arrays(self, x, chart_id=None):
        """Frame components: identity metric, no derivatives."""
        x = np.asarray(x, dtype=float)
        lead = x.shape[:-1]
        g = np.broadcast_to(np.eye(3), lead + (3, 3)).copy()
        return g, np.zeros(lead + (3, 3, 3)), np.zeros(lead + (3, 3, 3, 3))

    def frame_connection(self):
        return self.data.connection()

    def volume(self):
        return 2.0 * math.pi ** 2 * self.epsilon

    def expected_eigenvalues(self):
        e2 = self.epsilon ** 2
        return np.array([e2, e2, 4 - 3 * e2]), np.array([2 * e2, 4 - 2 * e2, 4 - 2 * e2])

    def ricci_half_bound(self):
        return 2.0 - self.epsilon ** 2

    def sectional_bound(self):
        return 4.0 - 3.0 * self.epsilon ** 2
