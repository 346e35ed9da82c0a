import math

import numpy as np

from geoball.errors import ConstraintError

from .base import ChartPoint, MetricFamily
from .space_form import conformal_metric


class ProductS2R(MetricFamily):
    """
    Riemannian product S²(κ) × ℝ.

    Charts:
        stereo: (y1, y2, z), stereographic on the sphere from the antipode of
                the base point; regular on every ball of radius < π/√κ.
        polar:  (θ, φ, z), spherical polar angles on the sphere of radius
                1/√κ; singular at θ ∈ {0, π}.
    """

    name = "product_s2r"
    charts = ("stereo", "polar")

    def __init__(self, kappa, safe_radius=None):
        kappa = float(kappa)
        if not kappa > 0:
            raise ConstraintError(f"ProductS2R requires kappa > 0, got kappa={kappa}")
        self.kappa = kappa
        super().__init__(safe_radius)

    @property
    def parameters(self):
        return {"kappa": self.kappa}

    def default_safe_radius(self):
        return 0.9 * math.pi / math.sqrt(self.kappa)

    def polar_base_point(self):
        """Equatorial point of the polar chart, away from both poles."""
        return ChartPoint((0.5 * math.pi, 0.0, 0.0), "polar")

    def in_chart(self, x, chart_id=None):
        x = np.asarray(x, dtype=float)
        ok = np.all(np.isfinite(x), axis=-1)
        if chart_id == "polar":
            ok &= (x[..., 0] > 0) & (x[..., 0] < math.pi)
        return ok

    def metric_arrays(self, x, chart_id=None):
        if chart_id in (None, "stereo"):
            return conformal_metric(x, self.kappa, 2)
        return self._polar_arrays(x)

    def _polar_arrays(self, x):
        x = np.asarray(x, dtype=float)
        lead = x.shape[:-1]
        radius_sq = 1.0 / self.kappa
        theta = x[..., 0]
        s, c = np.sin(theta), np.cos(theta)

        g = np.zeros(lead + (3, 3))
        dg = np.zeros(lead + (3, 3, 3))
        d2g = np.zeros(lead + (3, 3, 3, 3))
        g[..., 0, 0] = radius_sq
        g[..., 1, 1] = radius_sq * s * s
        g[..., 2, 2] = 1.0
        dg[..., 1, 1, 0] = radius_sq * 2.0 * s * c
        d2g[..., 1, 1, 0, 0] = radius_sq * 2.0 * (c * c - s * s)
        return g, dg, d2g

    def expected_eigenvalues(self):
        k = self.kappa
        return np.array([0.0, 0.0, k]), np.array([0.0, k, k])

    def ricci_half_bound(self):
        return 0.5 * self.kappa

    def sectional_bound(self):
        return self.kappa
