"""A* over the navigational graph with edge costs inflated by flow dynamics."""

import heapq
import math
from dataclasses import dataclass, field

from .exceptions import InvalidArgument, NoPath


@dataclass(frozen=True)
class PlannerWeights:
    entropy: float = 1.0
    flow: float = 1.0
    direction: float = 1.0

    def __post_init__(self):
        for name in ("entropy", "flow", "direction"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise InvalidArgument(f"weight {name} must be finite and non-negative, got {v!r}")

    @classmethod
    def zero(cls):
        return cls(0.0, 0.0, 0.0)


def temporal_cost(desc, weights, flow_max):
    """Node cost ``w_H * entropy + w_F * min(flow / flow_max, 1)``; 0 without dynamics."""
    if not flow_max > 0:
        raise InvalidArgument(f"flow_max must be positive, got {flow_max!r}")
    if desc is None:
        return 0.0
    return weights.entropy * desc.entropy + weights.flow * min(desc.magnitude / flow_max, 1.0)


def directional_penalty(edge_heading, desc, weights):
    """Penalty for moving against the dominant flow at the node being entered."""
    if desc is None or desc.dominant_direction is None:
        return 0.0
    misalign = (1.0 - math.cos(edge_heading - desc.dominant_direction)) / 2.0
    return weights.direction * desc.resultant_length * misalign


@dataclass(frozen=True)
class EdgeCost:
    i: int
    j: int
    distance: float
    mean_temporal: float
    directional: float

    @property
    def total(self):
        return self.distance + (self.mean_temporal + self.directional) * self.distance


def edge_cost(graph, i, j, weights, descriptors, flow_max):
    """Cost breakdown of traversing edge ``i -> j``; ``.total`` is never below the length."""
    if i == j:
        raise InvalidArgument("edge endpoints must differ")
    if not graph.has_edge(i, j):
        raise InvalidArgument(f"no edge between {i} and {j}")
    pi, pj = graph.nodes[i].position, graph.nodes[j].position
    d = math.dist(pi, pj)
    heading = math.atan2(pj[1] - pi[1], pj[0] - pi[0])
    ct = 0.5 * (
        temporal_cost(descriptors.get(i), weights, flow_max)
        + temporal_cost(descriptors.get(j), weights, flow_max)
    )
    cd = directional_penalty(heading, descriptors.get(j), weights)
    return EdgeCost(i, j, d, ct, cd)


def flow_normalizer(descriptors):
    """Largest flow magnitude among the descriptors, or 1 when there is none."""
    mags = [d.magnitude for d in descriptors.values() if d is not None]
    peak = max(mags, default=0.0)
    return peak if peak > 0 else 1.0


@dataclass
class Plan:
    path: list
    cost: float
    edges: list = field(default_factory=list)

    def to_dict(self):
        return {
            "path": self.path,
            "total_cost": self.cost,
            "edges": [
                {
                    "from": e.i,
                    "to": e.j,
                    "distance": e.distance,
                    "mean_temporal_cost": e.mean_temporal,
                    "directional_penalty": e.directional,
                    "cost": e.total,
                }
                for e in self.edges
            ],
        }


def plan(graph, start, goal, weights=None, descriptors=None, flow_max=None):
    """Cost-optimal path from ``start`` to ``goal``.

    Parameters
    ----------
    graph : NavGraph
    start, goal : int
        Node ids.
    weights : PlannerWeights, optional
        Defaults to all-ones.
    descriptors : dict, optional
        Node id -> FlowDescriptor or None. Missing nodes count as having no dynamics.
    flow_max : float, optional
        Flow normalizer; defaults to the largest magnitude in ``descriptors``.

    Returns
    -------
    Plan

    Notes
    -----
    The Euclidean heuristic is admissible and consistent because every edge
    costs at least its length. Among equal-cost paths the lexicographically
    smallest id sequence wins.
    """
    weights = weights or PlannerWeights()
    descriptors = descriptors or {}
    if flow_max is None:
        flow_max = flow_normalizer(descriptors)
    graph.node(start), graph.node(goal)
    goal_pos = graph.nodes[goal].position

    def h(n):
        return math.dist(graph.nodes[n].position, goal_pos)

    best = {start: 0.0}
    heap = [(h(start), (start,), 0.0)]
    closed = set()
    while heap:
        f, path, g = heapq.heappop(heap)
        node = path[-1]
        if node in closed:
            continue
        if node == goal:
            edges = [edge_cost(graph, a, b, weights, descriptors, flow_max) for a, b in zip(path, path[1:])]
            return Plan(list(path), g, edges)
        closed.add(node)
        for nb in graph.neighbors(node):
            if nb in closed:
                continue
            ng = g + edge_cost(graph, node, nb, weights, descriptors, flow_max).total
            if ng <= best.get(nb, math.inf):
                best[nb] = ng
                heapq.heappush(heap, (ng + h(nb), path + (nb,), ng))
    raise NoPath(f"no path from {start} to {goal}")
