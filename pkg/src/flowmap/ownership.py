"""Temporal ownership transfer between hash cells and navigational nodes.

Cells older than the stability window move their history into the nearest
node; a redirect table routes later observations at those keys to the
owner; removing a node writes its history back into hash space at the
node's final pose.
"""

import math
from dataclasses import dataclass, field

from .exceptions import InvalidArgument, ProtocolViolation
from .geometry import CellKey, orientation_bin
from .histogram import merge

DEFAULT_TAU = 60.0
DEFAULT_D_MAX = 1.0


@dataclass
class OwnershipState:
    tau: float = DEFAULT_TAU
    bind_radius: float = DEFAULT_D_MAX
    redirect: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.tau >= 0:
            raise InvalidArgument(f"tau must be non-negative, got {self.tau!r}")
        if not self.bind_radius > 0:
            raise InvalidArgument(f"bind_radius must be positive, got {self.bind_radius!r}")

    def to_dict(self):
        return {
            "tau": self.tau,
            "bind_radius": self.bind_radius,
            "redirect": [[list(k), v] for k, v in sorted(self.redirect.items())],
        }

    @classmethod
    def from_dict(cls, d):
        s = cls(d["tau"], d["bind_radius"])
        s.redirect = {CellKey(*k): int(v) for k, v in d["redirect"]}
        return s


def owner_of(state, key):
    return state.redirect.get(key)


def channel_of(state, g, key):
    """Temporal-model location currently holding the history observed at ``key``."""
    owner = state.redirect.get(key)
    if owner is None:
        return key
    node = g.nodes.get(owner)
    if node is None:
        raise ProtocolViolation(f"redirect for {key} points at deleted node {owner}")
    return node.channel_key


def _give_to_node(node, key, histogram, model):
    if node.owned_dynamics is None:
        node.owned_dynamics = histogram.copy()
    else:
        node.owned_dynamics = merge(node.owned_dynamics, histogram)
    if node.channel_key is None:
        # the first bound cell lends the node its channel identity
        node.channel_key = key
    elif model is not None:
        model.merge_location(key, node.channel_key)


def bind_stable_cells(state, g, m, now, model=None):
    """Move every sufficiently old cell with a node in range into that node.

    Returns
    -------
    list of (CellKey, node id)
        Bindings performed, in key order.
    """
    bound = []
    with m.lock:
        for cell in m.cells():
            if cell.created_t > now - state.tau:
                continue
            node_id = g.nearest_node(m.center_of(cell.key), state.bind_radius)
            if node_id is None:
                continue
            node = g.nodes[node_id]
            m.remove_cell(cell.key)
            _give_to_node(node, cell.key, cell.histogram, model)
            node.bound_keys.add(cell.key)
            state.redirect[cell.key] = node_id
            bound.append((cell.key, node_id))
    return bound


def route_observation(state, g, m, p, theta, t, weight=1.0):
    """Store one observation wherever the history of its cell currently lives.

    Returns the owning node id if the cell is bound, else the cell key.
    """
    if not weight >= 0 or not math.isfinite(weight):
        raise InvalidArgument(f"weight must be finite and non-negative, got {weight!r}")
    key = m.key_of(p)
    b = orientation_bin(theta, m.n_bins)
    owner = state.redirect.get(key)
    if owner is None:
        m.accumulate_key(key, b, t, weight)
        return key
    node = g.nodes.get(owner)
    if node is None:
        raise ProtocolViolation(f"redirect for {key} points at deleted node {owner}")
    node.owned_dynamics.accumulate(b, t, weight)
    return owner


def release_on_removal(state, g, m, node_id, model=None, t=None):
    """Rematerialise a node's history in hash space at its current pose.

    If the target key is itself bound to another live node, the history
    goes to that owner so no key ever has two holders. Returns the
    destination (cell key or node id), or None if the node owned nothing.
    """
    node = g.node(node_id)
    for key in [k for k, v in state.redirect.items() if v == node_id]:
        del state.redirect[key]
    node.bound_keys.clear()
    hist, src_channel = node.owned_dynamics, node.channel_key
    node.owned_dynamics = None
    node.channel_key = None
    if hist is None:
        return None

    key = m.key_of(node.position)
    owner = state.redirect.get(key)
    if owner is not None:
        target = g.nodes.get(owner)
        if target is None:
            raise ProtocolViolation(f"redirect for {key} points at deleted node {owner}")
        _give_to_node(target, src_channel, hist, model)
        return owner

    created = hist.first_t if t is None else t
    m.deposit(key, hist, created_t=created if created is not None else 0.0)
    if model is not None and src_channel is not None:
        model.merge_location(src_channel, key)
    return key
