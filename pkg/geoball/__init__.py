"""Curvature, geodesic ball volumes and volume comparison checks on explicit 3-manifolds."""

import logging

from geoball.errors import GeoballError

__version__ = "0.1.0"

logging.getLogger(__name__).addHandler(logging.NullHandler())

__all__ = ["GeoballError", "__version__"]
