import dataclasses
import json

import numpy as np
import zmq

from geoball import errors
from geoball.ballvolume import FAN_FIELDS


class RemoteRayEvaluator:
    """
    Client side of the ray worker. Usable as the `evaluator` of
    ballvolume.ball_functions: fans are shipped to the server and the
    returned per-ray samples are decoded into arrays.
    """

    def __init__(self, endpoint="tcp://localhost:5556", context=None, timeout_ms=None):
        self.endpoint = endpoint
        self.context = context or zmq.Context.instance()
        self.socket = self.context.socket(zmq.REQ)
        if timeout_ms is not None:
            self.socket.setsockopt(zmq.RCVTIMEO, int(timeout_ms))
        self.socket.connect(endpoint)

    def _send_command(self, command, params=None):
        message = {"command": command}
        if params:
            message.update(params)
        self.socket.send_string(json.dumps(message))
        try:
            reply = json.loads(self.socket.recv_string())
        except zmq.Again as exc:
            raise errors.IoError(f"no reply from ray server at {self.endpoint}") from exc
        if reply.get("status") != "ok":
            cls = getattr(errors, reply.get("error", ""), None)
            if not (isinstance(cls, type) and issubclass(cls, errors.GeoballError)):
                cls = errors.GeoballError
            raise cls(reply.get("message", "ray server error"))
        return reply

    def ping(self):
        return self._send_command("ping")["message"]

    def shutdown(self):
        return self._send_command("shutdown")

    def __call__(self, family, p, u, opts):
        reply = self._send_command("fan", {
            "family": family.to_spec(),
            "base_point": {"coords": list(p.coords), "chart_id": p.chart_id},
            "directions": np.asarray(u, dtype=float).tolist(),
            "options": dataclasses.asdict(opts),
        })
        fields = reply["fields"]
        out = {key: np.asarray(fields[key], dtype=float) for key in FAN_FIELDS + ("conjugate_t",)}
        out["t_grid"] = np.asarray(fields["t_grid"], dtype=float)
        return out

    def close(self):
        self.socket.close(linger=0)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
