"""
Shared types and chart machinery for the metric catalogue.

Array conventions (all batched over leading axes "..."):
    g[..., i, j]          metric components g_ij
    dg[..., i, j, k]      ∂_k g_ij
    d2g[..., i, j, k, l]  ∂_l ∂_k g_ij
    gamma[..., k, i, j]   Christoffel symbols Γ^k_ij
"""

import abc
from dataclasses import dataclass

import numpy as np

from geoball.errors import OutOfChart, SingularMetric


@dataclass(frozen=True)
class ChartPoint:
    """A point given by three chart coordinates."""

    coords: tuple
    chart_id: str

    def __post_init__(self):
        coords = tuple(float(c) for c in self.coords)
        if len(coords) != 3:
            raise ValueError(f"ChartPoint needs 3 coordinates, got {len(coords)}")
        object.__setattr__(self, "coords", coords)

    def array(self):
        return np.asarray(self.coords, dtype=float)


@dataclass(frozen=True)
class TangentVector:
    """A tangent vector at `base` with components in the chart basis."""

    base: ChartPoint
    components: tuple

    def __post_init__(self):
        comps = tuple(float(c) for c in self.components)
        if len(comps) != 3:
            raise ValueError(f"TangentVector needs 3 components, got {len(comps)}")
        object.__setattr__(self, "components", comps)

    def array(self):
        return np.asarray(self.components, dtype=float)


@dataclass(frozen=True)
class MetricValue:
    g: np.ndarray
    dg: np.ndarray
    d2g: np.ndarray


class MetricFamily(abc.ABC):
    """
    Base class for the catalogue of explicit 3-dimensional metrics.

    Subclasses declare their charts, a canonical base point and either
    analytic metric arrays (chart backend) or structure constants
    (homogeneous backend, see homogeneous.py).
    """

    name = "family"
    backend = "chart"
    charts = ()
    # direction level used when a run does not set one
    quadrature_level = 2

    def __init__(self, safe_radius=None):
        radius = self.default_safe_radius() if safe_radius is None else float(safe_radius)
        if not radius > 0:
            raise ValueError(f"safe_radius must be positive, got {radius}")
        self._safe_radius = radius
        self._default_radius = self.default_safe_radius()

    @property
    def safe_radius(self):
        return self._safe_radius

    @property
    def trusted_radius(self):
        """
        Radius rays may reach without allow_beyond_safe.

        A configured safe_radius can only tighten the family default; a larger
        one takes effect through the override like any other t_max beyond it.
        """
        return min(self._safe_radius, self._default_radius)

    @property
    def canonical_chart(self):
        return self.charts[0]

    @property
    @abc.abstractmethod
    def parameters(self):
        """Family parameters as an ordered dict of floats/strings."""

    @abc.abstractmethod
    def default_safe_radius(self):
        """Radius within which rays from the base point are trusted."""

    def base_point(self):
        return ChartPoint((0.0, 0.0, 0.0), self.canonical_chart)

    def in_chart(self, x, chart_id=None):
        """Boolean mask over the leading axes of x: inside the chart domain."""
        x = np.asarray(x, dtype=float)
        return np.all(np.isfinite(x), axis=-1)

    @abc.abstractmethod
    def metric_arrays(self, x, chart_id=None):
        """Return (g, dg, d2g) at coordinates x of shape (..., 3)."""

    def check_chart(self, p):
        if p.chart_id not in self.charts:
            raise OutOfChart(f"{self.describe()} has no chart '{p.chart_id}' (charts: {self.charts})")
        if not bool(self.in_chart(p.array(), p.chart_id)):
            raise OutOfChart(f"point {p.coords} lies outside chart '{p.chart_id}' of {self.describe()}")

    def to_spec(self):
        spec = {"name": self.name}
        spec.update(self.parameters)
        spec["safe_radius"] = self.safe_radius
        return spec

    def describe(self):
        params = ", ".join(f"{k}={v}" for k, v in self.parameters.items())
        return f"{type(self).__name__}({params})"

    # Closed-form data for the worked examples; None where there is none.

    def expected_eigenvalues(self):
        """Sorted (curvature operator, Ricci) eigenvalues, or None."""
        return None

    def ricci_half_bound(self):
        """κ with Ric ≤ 2κ everywhere, or None when not known in closed form."""
        return None

    def sectional_bound(self):
        """Upper bound for the sectional curvature, or None."""
        return None


def inverse_metric(g, check=True):
    """Invert a (batched) metric, raising SingularMetric when ill conditioned."""
    g = np.asarray(g, dtype=float)
    if check:
        cond = np.linalg.cond(g)
        if not np.all(np.isfinite(cond)) or np.max(cond) > 1e12:
            raise SingularMetric(f"metric not invertible to working precision (cond={np.max(cond):.3e})")
    return np.linalg.inv(g)


def christoffel_from_metric(g, dg, ginv=None):
    """Γ^k_ij = ½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij)."""
    if ginv is None:
        ginv = inverse_metric(g, check=False)
    first = 0.5 * (
        np.einsum("...jli->...lij", dg)
        + np.einsum("...ilj->...lij", dg)
        - np.einsum("...ijl->...lij", dg)
    )
    return np.einsum("...kl,...lij->...kij", ginv, first)


def frame_matrix(g):
    """
    Gram–Schmidt of the chart basis ∂_1, ∂_2, ∂_3 in that order.

    Returns F with F[..., :, a] the chart components of e_a. Gram–Schmidt
    in order is the inverse transpose of the Cholesky factor.
    """
    try:
        lower = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise SingularMetric(f"metric is not positive-definite: {exc}") from exc
    return np.swapaxes(np.linalg.inv(lower), -1, -2)


def validate_metric_value(value, family):
    g = value.g
    scale = max(np.max(np.abs(g)), 1e-300)
    if np.max(np.abs(g - g.T)) > 1e-14 * scale:
        raise SingularMetric(f"{family.describe()} produced an asymmetric metric")
    if np.min(np.linalg.eigvalsh(g)) <= 0:
        raise SingularMetric(f"{family.describe()} produced a metric that is not positive-definite")


def metric_at(family, p):
    """
    Exact metric components and their first and second derivatives at p.

    Args:
        family: MetricFamily
        p: ChartPoint in one of the family's charts

    Returns:
        MetricValue with g, dg = ∂_k g_ij, d2g = ∂_l∂_k g_ij
    """
    family.check_chart(p)
    g, dg, d2g = family.metric_arrays(p.array(), p.chart_id)
    value = MetricValue(np.asarray(g), np.asarray(dg), np.asarray(d2g))
    validate_metric_value(value, family)
    return value


def christoffel_at(family, p):
    """Γ^k_ij at p as a (3, 3, 3) array indexed [k, i, j]."""
    family.check_chart(p)
    if family.backend == "homogeneous":
        return family.frame_connection()
    g, dg, _ = family.metric_arrays(p.array(), p.chart_id)
    return christoffel_from_metric(g, dg, inverse_metric(g))


def orthonormal_frame_at(family, p):
    """Orthonormal frame (e_1, e_2, e_3) at p as TangentVectors."""
    family.check_chart(p)
    g, _, _ = family.metric_arrays(p.array(), p.chart_id)
    inverse_metric(g)
    frame = frame_matrix(g)
    return tuple(TangentVector(p, frame[:, a]) for a in range(3))


def inner(family, v, w):
    """g(v, w) for two tangent vectors at the same point."""
    g, _, _ = family.metric_arrays(v.base.array(), v.base.chart_id)
    return float(v.array() @ g @ w.array())
