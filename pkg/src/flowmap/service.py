"""Newline-delimited JSON request/response service over a loaded model snapshot.

Requests (one JSON object per line)::

    {"query": "predict", "t": 1234.0, "node": 17}
    {"query": "predict", "t": 1234.0, "position": [x, y, z]}
    {"query": "descriptors", "node": 17}
    {"query": "descriptors", "position": [x, y, z]}

An optional ``"id"`` field is echoed back. Successful responses carry
``"ok": true`` plus ``vector`` (per-bin predicted activity, or raw counts
for ``descriptors``), ``flow_magnitude``, ``dominant_direction`` (radians
or null), ``resultant_length`` and ``entropy``. Failures carry
``"ok": false`` with ``error`` set to ``bad_request`` or ``not_found``.
"""

import json
import math
import socketserver
import threading

from .exceptions import FlowMapError, InvalidArgument, NotFound


def _position(req):
    p = req["position"]
    if not isinstance(p, list) or len(p) != 3:
        raise InvalidArgument("position must be a list of three numbers")
    p = tuple(float(c) for c in p)
    if not all(math.isfinite(c) for c in p):
        raise InvalidArgument("position must be finite")
    return p


def _node_id(req):
    v = req["node"]
    if isinstance(v, bool) or not isinstance(v, int):
        raise InvalidArgument("node must be an integer id")
    return v


def _time(req):
    if "t" not in req:
        raise InvalidArgument("predict needs a time 't'")
    t = req["t"]
    if isinstance(t, bool) or not isinstance(t, (int, float)) or not math.isfinite(t):
        raise InvalidArgument("t must be a finite number")
    return float(t)


class PredictionService:
    """Stateless query handler over a read-only :class:`DynamicsMap`."""

    def __init__(self, dmap):
        self.dmap = dmap

    def _target(self, req):
        if ("node" in req) == ("position" in req):
            raise InvalidArgument("give exactly one of 'node' or 'position'")
        return ("node", _node_id(req)) if "node" in req else ("position", _position(req))

    def predict(self, req):
        kind, target = self._target(req)
        t = _time(req)
        if kind == "node":
            vec = self.dmap.predict_node(target, t)
        else:
            vec = self.dmap.predict_at(target, t)
        return vec, self.dmap.predicted_descriptor(vec)

    def descriptors(self, req):
        kind, target = self._target(req)
        if kind == "node":
            node = self.dmap.graph.nodes.get(target)
            if node is None or node.owned_dynamics is None:
                raise NotFound(f"node {target!r} owns no dynamics")
            h = node.owned_dynamics
        else:
            h = self.dmap.histogram_at(target)
        return h.counts, self.dmap.historical_descriptor(h)

    def handle(self, req):
        if not isinstance(req, dict):
            return {"ok": False, "error": "bad_request", "message": "request must be a JSON object"}
        resp = {"id": req["id"]} if "id" in req else {}
        query = req.get("query")
        try:
            if query == "predict":
                vec, desc = self.predict(req)
            elif query == "descriptors":
                vec, desc = self.descriptors(req)
            else:
                raise InvalidArgument(f"unknown query {query!r}")
        except NotFound as exc:
            return {**resp, "ok": False, "error": "not_found", "message": str(exc)}
        except (FlowMapError, KeyError, TypeError, ValueError) as exc:
            return {**resp, "ok": False, "error": "bad_request", "message": str(exc)}
        return {"ok": True, **resp, "query": query, "vector": [float(v) for v in vec], **desc.to_dict()}

    def handle_line(self, line):
        try:
            req = json.loads(line)
        except json.JSONDecodeError as exc:
            resp = {"ok": False, "error": "bad_request", "message": f"invalid JSON: {exc.msg}"}
        else:
            resp = self.handle(req)
        return json.dumps(resp)

    def serve_stream(self, infile, outfile):
        """Answer requests from ``infile`` line by line until EOF."""
        for line in infile:
            if not line.strip():
                continue
            outfile.write(self.handle_line(line) + "\n")
            outfile.flush()


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        for raw in self.rfile:
            line = raw.decode("utf-8", errors="replace")
            if not line.strip():
                continue
            self.wfile.write((self.server.service.handle_line(line) + "\n").encode())


class _Server(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


def make_tcp_server(service, host="127.0.0.1", port=0):
    """Threaded TCP server; call ``serve_forever`` (or use :func:`start_background`)."""
    server = _Server((host, port), _Handler)
    server.service = service
    return server


def start_background(server):
    th = threading.Thread(target=server.serve_forever, daemon=True)
    th.start()
    return th
