"""
Ray worker: a ZeroMQ REP socket that integrates ray fans for JSON jobs.

Request:  {"command": "fan", "family": {...}, "base_point": {"coords": [..], "chart_id": ".."},
           "directions": [[..], ..], "options": {...}}
          {"command": "ping"} | {"command": "shutdown"}
Reply:    {"status": "ok", ...} or {"status": "error", "message": ..., "error": <class>}

Floats travel as JSON numbers, which round-trip doubles exactly, so a profile
assembled from remote fans is bit-identical to a local one.
"""

import json
import logging

import numpy as np
import zmq

from geoball.ballvolume import FAN_FIELDS, fan_fields
from geoball.errors import GeoballError
from geoball.geodesics import RayOptions
from geoball.manifolds import ChartPoint, build_family

logger = logging.getLogger(__name__)

DEFAULT_ENDPOINT = "tcp://*:5556"


def encode_fields(fields):
    out = {key: np.asarray(fields[key]).tolist() for key in FAN_FIELDS + ("conjugate_t",)}
    out["t_grid"] = np.asarray(fields["t_grid"]).tolist()
    return out


def handle_fan(message):
    family = build_family(message["family"])
    point = message["base_point"]
    p = ChartPoint(point["coords"], point["chart_id"])
    opts = RayOptions(**message["options"])
    fields = fan_fields(family, p, np.asarray(message["directions"], dtype=float), opts)
    return {"status": "ok", "fields": encode_fields(fields)}


def handle_message(message):
    """Dispatch one decoded request; returns (reply, keep_running)."""
    command = message.get("command")
    if command == "ping":
        return {"status": "ok", "message": "pong"}, True
    if command == "shutdown":
        return {"status": "ok", "message": "shutting down"}, False
    if command == "fan":
        try:
            return handle_fan(message), True
        except GeoballError as exc:
            logger.warning("fan job failed: %s", exc)
            return {"status": "error", "error": type(exc).__name__, "message": str(exc),
                    "exit_code": exc.exit_code}, True
        except (KeyError, TypeError, ValueError) as exc:
            return {"status": "error", "error": "ValueError", "message": f"bad fan job: {exc}"}, True
    return {"status": "error", "message": f"Unknown command: {command}"}, True


class RayServer:
    """
    REP loop serving fan jobs until a shutdown command (or max_requests).

    Args:
        endpoint: address to bind, e.g. "tcp://*:5556" or "inproc://rays"
        context: zmq.Context to share (tests use inproc transport)
        max_requests: stop after this many requests when set
    """

    def __init__(self, endpoint=DEFAULT_ENDPOINT, context=None, max_requests=None):
        self.endpoint = endpoint
        self.context = context or zmq.Context.instance()
        self.max_requests = max_requests
        self.socket = self.context.socket(zmq.REP)
        self.socket.bind(endpoint)
        self.handled = 0

    def serve_forever(self):
        logger.info("ray server listening on %s", self.endpoint)
        running = True
        try:
            while running:
                message_str = self.socket.recv_string()
                try:
                    reply, running = handle_message(json.loads(message_str))
                except json.JSONDecodeError:
                    reply = {"status": "error", "message": "Invalid JSON"}
                self.socket.send_string(json.dumps(reply))
                self.handled += 1
                if self.max_requests is not None and self.handled >= self.max_requests:
                    running = False
        finally:
            self.socket.close(linger=1000)
            logger.info("ray server on %s stopped after %d requests", self.endpoint, self.handled)
