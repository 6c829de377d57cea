"""Synthetic scenes of route-following agents with periodic schedules."""

import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .exceptions import InvalidArgument, ParseError
from .nav_graph import TopologyEvent, build_graph, poisson_disk_nodes

DEFAULT_NOISE = 0.05
STREAM_FIELDS = ("t", "agent", "x", "y", "z", "theta")


@dataclass
class AgentRoute:
    waypoints: list
    speed: float = 1.2
    period: float = 300.0
    duty: float = 0.5
    phase: float = 0.0
    noise: float = DEFAULT_NOISE

    def validate(self):
        if len(self.waypoints) < 2:
            raise InvalidArgument("a route needs at least two waypoints")
        if not self.speed > 0:
            raise InvalidArgument(f"speed must be positive, got {self.speed!r}")
        if not self.period > 0:
            raise InvalidArgument(f"period must be positive, got {self.period!r}")
        if not 0 < self.duty <= 1:
            raise InvalidArgument(f"duty must lie in (0, 1], got {self.duty!r}")
        if self.noise < 0:
            raise InvalidArgument("noise must be non-negative")
        if self.length() <= 0:
            raise InvalidArgument("route has zero length")

    def length(self):
        pts = np.asarray(self.waypoints, dtype=float)
        return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))


@dataclass
class SceneConfig:
    scene_id: str = "scene-000"
    duration: float = 1200.0
    dt: float = 0.5
    walls: list = field(default_factory=list)
    regions: list = field(default_factory=list)
    routes: list = field(default_factory=list)
    seed: int = 0

    def validate(self):
        if not self.duration > 0:
            raise InvalidArgument(f"duration must be positive, got {self.duration!r}")
        if not self.dt > 0:
            raise InvalidArgument(f"dt must be positive, got {self.dt!r}")
        for r in self.routes:
            r.validate()

    def bounds(self):
        """Bounding box ``(xmin, ymin, xmax, ymax)`` of regions and walls."""
        xs, ys = [], []
        for x0, y0, x1, y1 in self.regions:
            xs += [x0, x1]
            ys += [y0, y1]
        for (ax, ay), (bx, by) in self.walls:
            xs += [ax, bx]
            ys += [ay, by]
        return min(xs), min(ys), max(xs), max(ys)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["routes"] = [AgentRoute(**r) for r in d.get("routes", [])]
        d["walls"] = [[tuple(a), tuple(b)] for a, b in d.get("walls", [])]
        d["regions"] = [tuple(r) for r in d.get("regions", [])]
        return cls(**d)

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
        except TypeError as exc:
            raise ParseError(f"malformed scene config: {exc}") from None


def default_scene(scene_id="scene-000", duration=1200.0, seed=0):
    """Workspace room joined to a hallway, with six periodic agent routes."""
    walls = [
        ((0, 0), (12, 0)),
        ((0, 0), (0, 8)),
        ((0, 8), (12, 8)),
        ((12, 0), (12, 3)),
        ((12, 5.5), (12, 8)),
        ((12, 3), (30, 3)),
        ((12, 5.5), (30, 5.5)),
        ((30, 3), (30, 5.5)),
    ]
    regions = [(0.3, 0.3, 11.7, 7.7), (12.0, 3.3, 29.7, 5.2)]
    routes = [
        AgentRoute([(2, 2), (10, 2), (10, 6), (2, 6)], speed=1.1, period=300.0, phase=0.0),
        AgentRoute([(3, 4), (11, 4.2), (28, 4.2)], speed=1.3, period=600.0, phase=40.0),
        AgentRoute([(29, 3.8), (13, 3.8)], speed=1.2, period=150.0, phase=10.0),
        AgentRoute([(1, 7), (11, 1)], speed=1.0, period=300.0, phase=120.0),
        AgentRoute([(6, 1), (6, 7), (12.5, 4.5), (20, 4.8)], speed=1.2, period=600.0, phase=200.0),
        AgentRoute([(25, 4.6), (13, 4.6), (4, 6.8)], speed=1.4, period=150.0, phase=70.0),
    ]
    return SceneConfig(scene_id, float(duration), 0.5, walls, regions, routes, seed)


@dataclass
class ObservationStream:
    t: np.ndarray
    agent: np.ndarray
    xyz: np.ndarray
    theta: np.ndarray

    def __len__(self):
        return self.t.size

    def as_array(self):
        """``(n, 5)`` rows of ``t, x, y, z, theta``."""
        return np.column_stack([self.t, self.xyz, self.theta]) if len(self) else np.zeros((0, 5))

    def __eq__(self, other):
        return (
            np.array_equal(self.t, other.t)
            and np.array_equal(self.agent, other.agent)
            and np.array_equal(self.xyz, other.xyz)
            and np.array_equal(self.theta, other.theta)
        )

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(",".join(STREAM_FIELDS) + "\n")
            for t, a, (x, y, z), th in zip(self.t, self.agent, self.xyz, self.theta):
                fh.write(f"{float(t)!r},{int(a)},{float(x)!r},{float(y)!r},{float(z)!r},{float(th)!r}\n")

    @classmethod
    def load(cls, path):
        ts, agents, xyz, thetas = [], [], [], []
        with open(path) as fh:
            header = fh.readline().strip()
            if header and header != ",".join(STREAM_FIELDS):
                raise ParseError(f"expected header {','.join(STREAM_FIELDS)}", 1)
            prev = -math.inf
            for lineno, line in enumerate(fh, start=2):
                if not line.strip():
                    continue
                parts = line.strip().split(",")
                try:
                    if len(parts) != 6:
                        raise ValueError(f"expected 6 fields, got {len(parts)}")
                    t, a, x, y, z, th = float(parts[0]), int(parts[1]), *map(float, parts[2:])
                    if not all(math.isfinite(v) for v in (t, x, y, z, th)):
                        raise ValueError("non-finite value")
                except ValueError as exc:
                    raise ParseError(str(exc), lineno) from None
                if t < prev:
                    raise ParseError("timestamps must be non-decreasing", lineno)
                prev = t
                ts.append(t)
                agents.append(a)
                xyz.append((x, y, z))
                thetas.append(th)
        return cls(
            np.array(ts, dtype=float),
            np.array(agents, dtype=np.int64),
            np.array(xyz, dtype=float).reshape(-1, 3),
            np.array(thetas, dtype=float),
        )


def _route_state(route, s):
    """Position and heading after ``s`` meters of back-and-forth travel along the route."""
    pts = np.asarray(route.waypoints, dtype=float)
    seg = np.diff(pts, axis=0)
    seg_len = np.linalg.norm(seg, axis=1)
    total = seg_len.sum()
    u = s % (2 * total)
    backward = u > total
    if backward:
        u = 2 * total - u
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    i = int(min(np.searchsorted(cum, u, side="right") - 1, len(seg) - 1))
    while seg_len[i] == 0 and i > 0:
        i -= 1
    frac = (u - cum[i]) / seg_len[i]
    pos = pts[i] + frac * seg[i]
    heading = math.atan2(seg[i][1], seg[i][0])
    if backward:
        heading = math.atan2(-seg[i][1], -seg[i][0])
    return pos, heading


def generate_scene(cfg):
    """Emit every active agent's noisy position and heading at every tick.

    An agent is active while ``(t + phase) mod period < duty * period``;
    each activation restarts its route, so activity is periodic in ``period``.
    """
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    n_ticks = int(math.ceil(cfg.duration / cfg.dt))
    ts, agents, xyz, thetas = [], [], [], []
    for k in range(n_ticks):
        t = k * cfg.dt
        if t >= cfg.duration:
            break
        for a, r in enumerate(cfg.routes):
            local = (t + r.phase) % r.period
            if local >= r.duty * r.period:
                continue
            pos, heading = _route_state(r, r.speed * local)
            noise = rng.normal(0.0, r.noise, 2) if r.noise > 0 else (0.0, 0.0)
            ts.append(t)
            agents.append(a)
            xyz.append((pos[0] + noise[0], pos[1] + noise[1], 0.0))
            thetas.append(heading)
    return ObservationStream(
        np.array(ts, dtype=float),
        np.array(agents, dtype=np.int64),
        np.array(xyz, dtype=float).reshape(-1, 3),
        np.array(thetas, dtype=float),
    )


def generate_dataset(n_scenes, template=None, master_seed=0):
    """Derive ``n_scenes`` scenes from a template with per-scene phases and speeds.

    Returns
    -------
    list of (SceneConfig, ObservationStream)
    """
    if n_scenes < 1:
        raise InvalidArgument("need at least one scene")
    template = template or default_scene()
    out = []
    for i, child in enumerate(np.random.SeedSequence(master_seed).spawn(n_scenes)):
        rng = np.random.default_rng(child)
        seed = int(rng.integers(2**31 - 1))
        routes = [
            replace(
                r,
                phase=float(rng.uniform(0.0, r.period)),
                speed=float(r.speed * rng.uniform(0.85, 1.15)),
            )
            for r in template.routes
        ]
        cfg = replace(template, scene_id=f"scene-{i:03d}", routes=routes, seed=seed)
        out.append((cfg, generate_scene(cfg)))
    return out


def scene_graph(cfg, r_node=1.0, k=4, seed=None):
    """Poisson-disk navigational nodes over the scene's free space, k-NN edges with line of sight."""
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    return build_graph(poisson_disk_nodes(cfg.regions, r_node, rng), k=k, walls=cfg.walls)


def inject_topology_events(seed, graph, density, t_min=0.0, t_max=1.0, remove_fraction=0.5, max_offset=0.5):
    """Random loop-closure style repositions and removals over a node subset.

    ``density`` is the fraction of nodes that receive an event.
    """
    if not 0 <= density <= 1:
        raise InvalidArgument(f"density must lie in [0, 1], got {density!r}")
    if len(graph) == 0:
        raise InvalidArgument("graph has no nodes")
    rng = np.random.default_rng(seed)
    ids = graph.ids()
    n_events = int(round(density * len(ids)))
    if n_events == 0:
        return []
    chosen = sorted(int(i) for i in rng.choice(ids, size=n_events, replace=False))
    events = []
    for node_id in chosen:
        t = float(rng.uniform(t_min, t_max))
        if rng.random() < remove_fraction:
            events.append(TopologyEvent(t, "remove", node_id))
        else:
            rad = max_offset * math.sqrt(rng.random())
            ang = 2 * math.pi * rng.random()
            x, y, z = graph.nodes[node_id].position
            events.append(
                TopologyEvent(t, "reposition", node_id, (x + rad * math.cos(ang), y + rad * math.sin(ang), z))
            )
    events.sort(key=lambda e: (e.t, e.id))
    return events
