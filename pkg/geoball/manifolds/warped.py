import math

import numpy as np

from geoball.errors import ConstraintError

from .base import MetricFamily


class DoublyWarped(MetricFamily):
    """
    Doubly warped product dr² + e^{−2(1+a)r}dθ² + e^{−2(1−a)r}dφ² on ℝ×S¹×S¹.

    The (r, θ, φ) chart is used as a chart of the universal cover; balls of
    radius below half the shortest θ/φ loop are unaffected by the covering.
    """

    name = "doubly_warped"
    charts = ("warped",)
    # rays within about e^{-(1+a)t} radians of +r turn back before t
    quadrature_level = 3

    def __init__(self, a, safe_radius=None):
        a = float(a)
        if not a > 1:
            raise ConstraintError(f"DoublyWarped requires a > 1, got a={a}")
        self.a = a
        super().__init__(safe_radius)

    @property
    def parameters(self):
        return {"a": self.a}

    def default_safe_radius(self):
        # 1.0 is a conservative cap; large a brings conjugate points closer
        return min(1.0, 0.9 * math.pi / math.sqrt(self.a ** 2 - 1))

    def metric_arrays(self, x, chart_id=None):
        x = np.asarray(x, dtype=float)
        lead = x.shape[:-1]
        r = x[..., 0]
        cu = -2.0 * (1.0 + self.a)
        cv = -2.0 * (1.0 - self.a)
        gu = np.exp(cu * r)
        gv = np.exp(cv * r)

        g = np.zeros(lead + (3, 3))
        dg = np.zeros(lead + (3, 3, 3))
        d2g = np.zeros(lead + (3, 3, 3, 3))
        g[..., 0, 0] = 1.0
        g[..., 1, 1] = gu
        g[..., 2, 2] = gv
        dg[..., 1, 1, 0] = cu * gu
        dg[..., 2, 2, 0] = cv * gv
        d2g[..., 1, 1, 0, 0] = cu * cu * gu
        d2g[..., 2, 2, 0, 0] = cv * cv * gv
        return g, dg, d2g

    def volume_element(self, x):
        """√det g, equal to e^{−2r} for every a."""
        g, _, _ = self.metric_arrays(x)
        return np.sqrt(np.linalg.det(g))

    def expected_eigenvalues(self):
        a = self.a
        op = np.sort([-(1 + a) ** 2, -(1 - a) ** 2, a * a - 1])
        ric = np.sort([-2 * (1 + a * a), -2 * (1 + a), 2 * (a - 1)])
        return op, ric

    def ricci_half_bound(self):
        return self.a - 1

    def sectional_bound(self):
        return self.a ** 2 - 1
