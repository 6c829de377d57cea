"""Replay driver tying the sparse store, graph, ownership and temporal model together."""

import json
import threading
from dataclasses import dataclass

import numpy as np

from . import ownership as own
from .exceptions import InvalidArgument, NotFound, ParseError
from .fremen import (
    DEFAULT_ORDER,
    DEFAULT_UPDATE_INTERVAL,
    GlobalTemporalModel,
    WindowClock,
    candidate_ladder,
    normalized_window,
)
from .geometry import orientation_bin
from .histogram import DEFAULT_EPS_DIR, DEFAULT_T_FLOOR, descriptor_of, descriptor_of_vector
from .nav_graph import NavGraph, apply_event
from .sparse_hash import DEFAULT_DELTA, SparseHashMap


@dataclass(frozen=True)
class Holder:
    """Anything currently owning a history: a node or an unbound hash cell."""

    kind: str  # "node" or "cell"
    ident: object  # node id or CellKey
    channel: tuple
    position: tuple
    histogram: object


class _Channels:
    """Keeps temporal-model locations and open-window counts in step when histories move."""

    def __init__(self, dmap):
        self._dmap = dmap

    def merge_location(self, src, dst):
        self._dmap.model.merge_location(src, dst)
        win = self._dmap._window
        counts = win.pop(tuple(src), None)
        if counts is not None:
            dst = tuple(dst)
            win[dst] = win[dst] + counts if dst in win else counts


class DynamicsMap:
    """Graph-based map of dynamics built by replaying an observation stream.

    Parameters
    ----------
    delta : float
        Hash cell size, meters.
    n_bins : int
        Orientation bins.
    tau : float
        Stability window before cells bind to nodes, seconds.
    bind_radius : float
        Maximum cell-center-to-node distance for binding, meters.
    periods : sequence of float
        Candidate periods for the temporal model.
    order : int
        Spectral components kept per channel.
    update_interval : float
        Length of the ingest windows, seconds.
    graph : NavGraph, optional
        Navigational layer; an empty graph keeps all dynamics in hash space.
    """

    def __init__(
        self,
        delta=DEFAULT_DELTA,
        n_bins=8,
        tau=own.DEFAULT_TAU,
        bind_radius=own.DEFAULT_D_MAX,
        periods=None,
        order=DEFAULT_ORDER,
        update_interval=DEFAULT_UPDATE_INTERVAL,
        t_floor=DEFAULT_T_FLOOR,
        eps_dir=DEFAULT_EPS_DIR,
        graph=None,
        t0=0.0,
    ):
        self.hash_map = SparseHashMap(delta, n_bins)
        self.graph = graph if graph is not None else NavGraph()
        self.ownership = own.OwnershipState(tau, bind_radius)
        self.model = GlobalTemporalModel(periods or candidate_ladder(3600.0), order, n_bins)
        self.clock = WindowClock(update_interval, t0)
        self.t_floor = t_floor
        self.eps_dir = eps_dir
        self.weight_in = 0.0
        self.last_t = None
        self._window = {}
        self._channels = _Channels(self)
        self.lock = threading.RLock()

    @property
    def n_bins(self):
        return self.hash_map.n_bins

    @property
    def delta(self):
        return self.hash_map.delta

    # -- replay -------------------------------------------------------------

    def advance_to(self, t):
        """Close every ingest window ending at or before ``t``, binding after each."""
        with self.lock:
            for t_mid, t_end in self.clock.due(t):
                self._flush(t_mid)
                self.bind(t_end)

    def _flush(self, t_mid):
        zeros = np.zeros(self.n_bins)
        for h in self.holders():
            counts = self._window.get(tuple(h.channel), zeros)
            self.model.ingest_location(h.channel, t_mid, normalized_window(counts))
        self._window = {}

    def bind(self, now):
        with self.lock:
            return own.bind_stable_cells(self.ownership, self.graph, self.hash_map, now, model=self._channels)

    def observe(self, p, theta, t, weight=1.0):
        with self.lock:
            if self.last_t is not None and t < self.last_t:
                raise InvalidArgument(f"observation at t={t} precedes t={self.last_t}")
            self.advance_to(t)
            dest = own.route_observation(self.ownership, self.graph, self.hash_map, p, theta, t, weight)
            channel = dest if isinstance(dest, tuple) else self.graph.nodes[dest].channel_key
            channel = tuple(channel)
            counts = self._window.get(channel)
            if counts is None:
                counts = self._window[channel] = np.zeros(self.n_bins)
            counts[orientation_bin(theta, self.n_bins)] += weight
            self.weight_in += weight
            self.last_t = t
            return dest

    def apply_event(self, ev):
        with self.lock:
            self.advance_to(ev.t)
            apply_event(self.graph, ev, self.ownership, self.hash_map, model=self._channels)

    def finalize(self, t_end=None):
        """Close the remaining windows and publish the spectrum."""
        with self.lock:
            if t_end is None:
                t_end = self.last_t if self.last_t is not None else self.clock.start
            self.advance_to(t_end)
            if t_end > self.clock.start and any(c.any() for c in self._window.values()):
                self._flush(0.5 * (self.clock.start + t_end))
                self.clock.index += 1
            self.model.update_spectrum()
        return self

    def replay(self, observations, events=(), t_end=None):
        """Feed ``(t, x, y, z, theta)`` rows and topology events in time order."""
        obs = np.asarray(observations, dtype=float).reshape(-1, 5)
        events = sorted(events, key=lambda e: e.t)
        ei = 0
        for t, x, y, z, theta in obs:
            while ei < len(events) and events[ei].t <= t:
                self.apply_event(events[ei])
                ei += 1
            self.observe((x, y, z), theta, t)
        for ev in events[ei:]:
            if t_end is None or ev.t <= t_end:
                self.apply_event(ev)
        return self.finalize(t_end)

    # -- inspection ---------------------------------------------------------

    def holders(self):
        """Nodes with dynamics and unbound cells, in channel order."""
        out = []
        for node_id in self.graph.ids():
            n = self.graph.nodes[node_id]
            if n.owned_dynamics is not None:
                out.append(Holder("node", node_id, tuple(n.channel_key), n.position, n.owned_dynamics))
        for cell in self.hash_map.cells():
            out.append(Holder("cell", cell.key, tuple(cell.key), self.hash_map.center_of(cell.key), cell.histogram))
        out.sort(key=lambda h: h.channel)
        return out

    def owned_total(self):
        nodes = sum(n.owned_dynamics.total for n in self.graph.nodes.values() if n.owned_dynamics is not None)
        return nodes + self.hash_map.total()

    def channel_at(self, p):
        key = self.hash_map.key_of(p)
        return tuple(own.channel_of(self.ownership, self.graph, key))

    def histogram_at(self, p):
        key = self.hash_map.key_of(p)
        owner = own.owner_of(self.ownership, key)
        if owner is not None:
            return self.graph.nodes[owner].owned_dynamics
        cell = self.hash_map.lookup(key)
        if cell is None:
            raise NotFound(f"no dynamics stored at cell {tuple(key)}")
        return cell.histogram

    def node_channel(self, node_id):
        node = self.graph.nodes.get(node_id)
        if node is None:
            raise NotFound(f"unknown node {node_id!r}")
        if node.channel_key is None:
            raise NotFound(f"node {node_id} owns no dynamics")
        return tuple(node.channel_key)

    def predict_location(self, channel, t):
        return self.model.predict_location(channel, t)

    def predict_at(self, p, t):
        return self.model.predict_location(self.channel_at(p), t)

    def predict_node(self, node_id, t):
        return self.model.predict_location(self.node_channel(node_id), t)

    def historical_descriptor(self, histogram):
        return descriptor_of(histogram, self.n_bins, self.t_floor, self.eps_dir)

    def predicted_descriptor(self, vector):
        return descriptor_of_vector(vector, self.eps_dir)

    def node_descriptors(self, mode="historical", t=None):
        """Flow descriptor per node id; nodes without dynamics map to None."""
        out = {}
        for node_id in self.graph.ids():
            n = self.graph.nodes[node_id]
            if n.owned_dynamics is None:
                out[node_id] = None
            elif mode == "historical":
                out[node_id] = self.historical_descriptor(n.owned_dynamics)
            elif mode == "predicted":
                try:
                    out[node_id] = self.predicted_descriptor(self.predict_node(node_id, t))
                except NotFound:
                    out[node_id] = None
            else:
                raise InvalidArgument(f"unknown mode {mode!r}")
        return out

    # -- persistence --------------------------------------------------------

    def to_dict(self):
        return {
            "config": {
                "t_floor": self.t_floor,
                "eps_dir": self.eps_dir,
                "update_interval": self.clock.interval,
                "t0": self.clock.t0,
            },
            "clock_index": self.clock.index,
            "last_t": self.last_t,
            "weight_in": self.weight_in,
            "window": [[list(k), v.tolist()] for k, v in sorted(self._window.items())],
            "hash_map": self.hash_map.to_dict(),
            "graph": self.graph.to_dict(with_dynamics=True),
            "ownership": self.ownership.to_dict(),
            "model": self.model.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        cfg = d["config"]
        hm = SparseHashMap.from_dict(d["hash_map"])
        m = cls(
            delta=hm.delta,
            n_bins=hm.n_bins,
            tau=d["ownership"]["tau"],
            bind_radius=d["ownership"]["bind_radius"],
            periods=d["model"]["periods"],
            order=d["model"]["order"],
            update_interval=cfg["update_interval"],
            t_floor=cfg["t_floor"],
            eps_dir=cfg["eps_dir"],
            graph=NavGraph.from_dict(d["graph"]),
            t0=cfg["t0"],
        )
        m.hash_map = hm
        m.ownership = own.OwnershipState.from_dict(d["ownership"])
        m.model = GlobalTemporalModel.from_dict(d["model"])
        m.clock.index = d["clock_index"]
        m.last_t = d["last_t"]
        m.weight_in = d["weight_in"]
        m._window = {tuple(k): np.array(v, dtype=float) for k, v in d["window"]}
        return m

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                return cls.from_dict(json.load(fh))
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno) from None
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed model snapshot: {exc}") from None
