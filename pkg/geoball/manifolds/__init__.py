from geoball.errors import ConstraintError

from .base import (
    ChartPoint,
    MetricFamily,
    MetricValue,
    TangentVector,
    christoffel_at,
    christoffel_from_metric,
    frame_matrix,
    inner,
    inverse_metric,
    metric_at,
    orthonormal_frame_at,
)
from .homogeneous import BergerSphere, HomogeneousData, structure_constants, su2_basis
from .product import ProductS2R
from .rotational import RotProfile, RotSymmetric, make_cap_metric, sn_profile
from .space_form import SpaceForm
from .warped import DoublyWarped

# name -> (constructor, required parameters, optional parameters)
FAMILIES = {
    "space_form": (SpaceForm, ("kappa",), ()),
    "doubly_warped": (DoublyWarped, ("a",), ()),
    "berger": (BergerSphere, ("epsilon",), ()),
    "product_s2r": (ProductS2R, ("kappa",), ()),
    "rot_symmetric": (None, ("profile",), ("kappa", "r0", "delta")),
}

PROFILES = {"sn": ("kappa",), "cap": ("r0", "delta")}


def build_family(spec):
    """
    Construct a MetricFamily from a mapping such as
    {"name": "berger", "epsilon": 0.5, "safe_radius": 1.2}.

    Inverse of MetricFamily.to_spec().

    Raises:
        ValueError: unknown family or profile name
        ConstraintError: missing parameter or violated family invariant
    """
    spec = dict(spec)
    name = spec.pop("name", None)
    if name not in FAMILIES:
        raise ValueError(f"unknown family '{name}'; expected one of {sorted(FAMILIES)}")
    ctor, required, _ = FAMILIES[name]
    missing = [key for key in required if key not in spec]
    if missing:
        raise ConstraintError(f"family '{name}' requires parameter(s) {missing}")
    safe_radius = spec.pop("safe_radius", None)
    if safe_radius is not None:
        safe_radius = float(safe_radius)

    if name == "rot_symmetric":
        profile = spec.pop("profile")
        if profile not in PROFILES:
            raise ValueError(f"unknown profile '{profile}'; expected one of {sorted(PROFILES)}")
        missing = [key for key in PROFILES[profile] if key not in spec]
        if missing:
            raise ConstraintError(f"profile '{profile}' requires parameter(s) {missing}")
        if profile == "cap":
            return make_cap_metric(float(spec["r0"]), float(spec["delta"]), safe_radius=safe_radius)
        return sn_profile(float(spec["kappa"]), safe_radius=safe_radius)

    return ctor(*(float(spec[key]) for key in required), safe_radius=safe_radius)


__all__ = [
    "FAMILIES",
    "BergerSphere",
    "ChartPoint",
    "DoublyWarped",
    "HomogeneousData",
    "MetricFamily",
    "MetricValue",
    "ProductS2R",
    "RotProfile",
    "RotSymmetric",
    "SpaceForm",
    "TangentVector",
    "build_family",
    "christoffel_at",
    "christoffel_from_metric",
    "frame_matrix",
    "inner",
    "inverse_metric",
    "make_cap_metric",
    "metric_at",
    "orthonormal_frame_at",
    "sn_profile",
    "structure_constants",
    "su2_basis",
]
