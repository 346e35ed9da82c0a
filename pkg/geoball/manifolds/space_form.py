import math

import numpy as np

from .base import MetricFamily


def conformal_metric(x, kappa, m):
    """
    Conformally flat block |dy|²/(1 + κ|y|²/4)² on the first m coordinates,
    Euclidean on the remaining ones.

    This is the stereographic chart of the constant-curvature κ space form
    in m dimensions; κ = 0 is the Cartesian chart.

    Returns:
        (g, dg, d2g) with the conventions of manifolds.base
    """
    x = np.asarray(x, dtype=float)
    lead = x.shape[:-1]
    y = x[..., :m]
    s = np.sum(y * y, axis=-1)
    w = 1.0 / (1.0 + 0.25 * kappa * s)
    u = w * w
    du = -kappa * y * (w ** 3)[..., None]
    d2u = (-kappa * (w ** 3)[..., None, None] * np.eye(m)
           + 1.5 * kappa * kappa * (w ** 4)[..., None, None] * y[..., :, None] * y[..., None, :])

    g = np.zeros(lead + (3, 3))
    dg = np.zeros(lead + (3, 3, 3))
    d2g = np.zeros(lead + (3, 3, 3, 3))
    for i in range(3):
        if i < m:
            g[..., i, i] = u
            dg[..., i, i, :m] = du
            d2g[..., i, i, :m, :m] = d2u
        else:
            g[..., i, i] = 1.0
    return g, dg, d2g


class SpaceForm(MetricFamily):
    """
    Simply connected space form of constant sectional curvature κ.

    Chart: |dx|²/(1 + κ|x|²/4)², called "cartesian" when κ = 0 and
    "conformal" otherwise. For κ < 0 it is the ball |x| < 2/√|κ|.
    The base point is the chart origin.
    """

    name = "space_form"

    def __init__(self, kappa, safe_radius=None):
        self.kappa = float(kappa)
        self.charts = ("cartesian",) if self.kappa == 0 else ("conformal",)
        super().__init__(safe_radius)

    @property
    def parameters(self):
        return {"kappa": self.kappa}

    def default_safe_radius(self):
        if self.kappa > 0:
            return 0.9 * math.pi / math.sqrt(self.kappa)
        return 2.0

    def in_chart(self, x, chart_id=None):
        x = np.asarray(x, dtype=float)
        ok = np.all(np.isfinite(x), axis=-1)
        if self.kappa < 0:
            ok &= np.sum(x * x, axis=-1) < 4.0 / abs(self.kappa)
        return ok

    def metric_arrays(self, x, chart_id=None):
        return conformal_metric(x, self.kappa, 3)

    def expected_eigenvalues(self):
        k = self.kappa
        return np.array([k, k, k]), np.array([2 * k, 2 * k, 2 * k])

    def ricci_half_bound(self):
        return self.kappa

    def sectional_bound(self):
        return self.kappa
