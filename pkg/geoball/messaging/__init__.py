from .ray_client import RemoteRayEvaluator
from .ray_server import DEFAULT_ENDPOINT, RayServer, handle_message

__all__ = ["DEFAULT_ENDPOINT", "RayServer", "RemoteRayEvaluator", "handle_message"]
