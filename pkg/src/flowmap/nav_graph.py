"""Navigational layer: nodes at traversable positions and the edges between them."""

import csv
import json
import math
import threading
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import InvalidArgument, ParseError
from .histogram import DirectionalHistogram

EVENT_KINDS = ("insert", "reposition", "remove")


@dataclass
class NavNode:
    id: int
    position: tuple
    owned_dynamics: Optional[DirectionalHistogram] = None
    bound_keys: set = field(default_factory=set)
    # key under which the temporal model tracks this node's history
    channel_key: Optional[tuple] = None

    @property
    def has_dynamics(self):
        return self.owned_dynamics is not None


@dataclass(frozen=True)
class TopologyEvent:
    t: float
    kind: str
    id: int
    position: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise InvalidArgument(f"unknown event kind {self.kind!r}")
        if self.kind != "remove" and self.position is None:
            raise InvalidArgument(f"{self.kind} event needs a position")


def _as_position(p):
    if len(p) != 3:
        raise InvalidArgument(f"position must have 3 components, got {p!r}")
    p = tuple(float(c) for c in p)
    if not all(math.isfinite(c) for c in p):
        raise InvalidArgument(f"position must be finite, got {p!r}")
    return p


class NavGraph:
    """Undirected graph of navigational nodes.

    Edge lengths are always derived from the current node positions, so a
    reposition updates every incident edge implicitly.
    """

    def __init__(self):
        self.nodes = {}
        self._adj = {}
        self._retired = set()
        self.lock = threading.RLock()

    def __len__(self):
        return len(self.nodes)

    def __contains__(self, node_id):
        return node_id in self.nodes

    def node(self, node_id):
        try:
            return self.nodes[node_id]
        except KeyError:
            raise InvalidArgument(f"unknown node id {node_id!r}") from None

    def insert_node(self, node_id, position):
        node_id = int(node_id)
        if node_id in self.nodes or node_id in self._retired:
            raise InvalidArgument(f"node id {node_id} already used")
        self.nodes[node_id] = NavNode(node_id, _as_position(position))
        self._adj[node_id] = set()
        return self.nodes[node_id]

    def add_edge(self, i, j):
        if i == j:
            raise InvalidArgument("self-loops are not allowed")
        self.node(i), self.node(j)
        self._adj[i].add(j)
        self._adj[j].add(i)

    def has_edge(self, i, j):
        return j in self._adj.get(i, ())

    def neighbors(self, i):
        return sorted(self._adj[i])

    def edges(self):
        return sorted((i, j) for i in self._adj for j in self._adj[i] if i < j)

    def edge_length(self, i, j):
        if not self.has_edge(i, j):
            raise InvalidArgument(f"no edge between {i} and {j}")
        return math.dist(self.nodes[i].position, self.nodes[j].position)

    def reposition(self, node_id, position):
        self.node(node_id).position = _as_position(position)

    def delete_node(self, node_id):
        """Drop a node and its edges. Ownership must already be released."""
        node = self.node(node_id)
        if node.bound_keys or node.owned_dynamics is not None:
            raise InvalidArgument(f"node {node_id} still owns dynamics; release it first")
        for j in self._adj.pop(node_id):
            self._adj[j].discard(node_id)
        del self.nodes[node_id]
        self._retired.add(node_id)

    def ids(self):
        return sorted(self.nodes)

    def positions(self):
        ids = self.ids()
        return ids, np.array([self.nodes[i].position for i in ids], dtype=float).reshape(-1, 3)

    def nearest_node(self, p, d_max):
        """Closest node within ``d_max`` of ``p`` (ties to the smaller id), else None."""
        if not d_max > 0:
            raise InvalidArgument(f"d_max must be positive, got {d_max!r}")
        best, best_d = None, math.inf
        for node_id in self.ids():
            d = math.dist(self.nodes[node_id].position, p)
            if d <= d_max and d < best_d:
                best, best_d = node_id, d
        return best

    # -- persistence ------------------------------------------------------

    def to_dict(self, with_dynamics=False):
        nodes = []
        for i in self.ids():
            n = self.nodes[i]
            rec = {"id": i, "x": n.position[0], "y": n.position[1], "z": n.position[2]}
            if with_dynamics:
                rec["bound_keys"] = [list(k) for k in sorted(n.bound_keys)]
                rec["channel_key"] = None if n.channel_key is None else list(n.channel_key)
                rec["dynamics"] = None if n.owned_dynamics is None else n.owned_dynamics.to_dict()
            nodes.append(rec)
        d = {"nodes": nodes, "edges": [list(e) for e in self.edges()]}
        if with_dynamics:
            d["retired"] = sorted(self._retired)
        return d

    @classmethod
    def from_dict(cls, d):
        from .geometry import CellKey

        g = cls()
        for rec in d["nodes"]:
            n = g.insert_node(rec["id"], (rec["x"], rec["y"], rec["z"]))
            if rec.get("dynamics") is not None:
                n.owned_dynamics = DirectionalHistogram.from_dict(rec["dynamics"])
            n.bound_keys = {CellKey(*k) for k in rec.get("bound_keys", [])}
            if rec.get("channel_key") is not None:
                n.channel_key = CellKey(*rec["channel_key"])
        for i, j in d["edges"]:
            g.add_edge(i, j)
        g._retired = set(d.get("retired", []))
        return g

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                return cls.from_dict(json.load(fh))
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno) from None
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed graph file: {exc}") from None


def apply_event(g, ev, ownership, hash_map, model=None):
    """Apply one topology event.

    A reposition moves the node and everything it owns; a removal first
    releases the node's dynamics back into hash space at its final pose.
    """
    from .ownership import release_on_removal

    if ev.kind == "insert":
        g.insert_node(ev.id, ev.position)
    elif ev.kind == "reposition":
        g.reposition(ev.id, ev.position)
    else:
        g.node(ev.id)
        release_on_removal(ownership, g, hash_map, ev.id, model=model, t=ev.t)
        g.delete_node(ev.id)


EVENT_FIELDS = ("t", "kind", "id", "x", "y", "z")


def save_events(events, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(EVENT_FIELDS)
        for ev in events:
            p = ev.position if ev.position is not None else ("", "", "")
            w.writerow([repr(float(ev.t)), ev.kind, int(ev.id), *(repr(float(c)) if c != "" else "" for c in p)])


def load_events(path):
    events = []
    with open(path, newline="") as fh:
        rows = csv.reader(fh)
        header = next(rows, None)
        if header is None:
            return events
        if tuple(header) != EVENT_FIELDS:
            raise ParseError(f"expected header {','.join(EVENT_FIELDS)}", 1)
        for lineno, row in enumerate(rows, start=2):
            if not row:
                continue
            try:
                t, kind, node_id, x, y, z = row
                pos = None if x == "" else (float(x), float(y), float(z))
                events.append(TopologyEvent(float(t), kind, int(node_id), pos))
            except (ValueError, InvalidArgument) as exc:
                raise ParseError(str(exc), lineno) from None
    prev = -math.inf
    for ev in events:
        if ev.t < prev:
            raise ParseError("events must be ordered by time")
        prev = ev.t
    return events


# -- node placement -------------------------------------------------------


def _segments_intersect(p1, p2, q1, q2):
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 and d2 and d3 and d4


def line_of_sight(a, b, walls):
    """True if the 2-D segment ``a``-``b`` crosses none of ``walls``."""
    return not any(_segments_intersect(a[:2], b[:2], w[0], w[1]) for w in walls)


def poisson_disk_nodes(regions, r_node=1.0, rng=None, z=0.0, attempts=30):
    """Poisson-disk sample node positions over axis-aligned free-space rectangles.

    Parameters
    ----------
    regions : list of (xmin, ymin, xmax, ymax)
    r_node : float
        Minimum spacing between nodes, meters.
    rng : numpy.random.Generator

    Returns
    -------
    list of (x, y, z) tuples in generation order.
    """
    rng = np.random.default_rng(rng)
    pts = []

    def inside(q):
        return any(x0 <= q[0] <= x1 and y0 <= q[1] <= y1 for x0, y0, x1, y1 in regions)

    def far_enough(q):
        return all(math.dist(q, o) >= r_node for o in pts)

    for x0, y0, x1, y1 in regions:
        seed = ((x0 + x1) / 2, (y0 + y1) / 2)
        if far_enough(seed):
            pts.append(seed)
        active = [len(pts) - 1] if pts else []
        while active:
            idx = active[int(rng.integers(len(active)))]
            base = pts[idx]
            for _ in range(attempts):
                rad = r_node * (1 + rng.random())
                ang = 2 * math.pi * rng.random()
                q = (base[0] + rad * math.cos(ang), base[1] + rad * math.sin(ang))
                if inside(q) and far_enough(q):
                    pts.append(q)
                    active.append(len(pts) - 1)
                    break
            else:
                active.remove(idx)
    return [(float(x), float(y), float(z)) for x, y in pts]


def build_graph(positions, k=4, walls=(), first_id=0):
    """Graph over ``positions`` with k-nearest-neighbour edges that keep line of sight."""
    g = NavGraph()
    for i, p in enumerate(positions):
        g.insert_node(first_id + i, p)
    ids, pts = g.positions()
    for a, i in enumerate(ids):
        d = np.linalg.norm(pts - pts[a], axis=1)
        order = np.lexsort((np.array(ids), d))
        linked = 0
        for b in order:
            if b == a:
                continue
            if line_of_sight(pts[a], pts[b], walls):
                g.add_edge(i, ids[b])
                linked += 1
            if linked >= k:
                break
    return g
