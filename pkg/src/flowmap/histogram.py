"""Directional activity histograms and the flow descriptors derived from them."""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import EmptyHistogram, InvalidArgument
from .geometry import bin_centers

DEFAULT_T_FLOOR = 1.0
DEFAULT_EPS_DIR = 0.05


class DirectionalHistogram:
    """Per-bin activity counts plus the time span they were observed over.

    Counts are stored as float64 so integer weights stay exact up to 2**53.
    """

    __slots__ = ("counts", "first_t", "last_t")

    def __init__(self, n_bins=8, counts=None, first_t=None, last_t=None):
        if counts is None:
            if int(n_bins) != n_bins or n_bins < 2:
                raise InvalidArgument(f"bin count must be an integer >= 2, got {n_bins!r}")
            counts = np.zeros(int(n_bins))
        else:
            counts = np.array(counts, dtype=float)
            if counts.ndim != 1 or counts.size < 2:
                raise InvalidArgument("counts must be a 1-d array of length >= 2")
            if np.any(counts < 0) or not np.all(np.isfinite(counts)):
                raise InvalidArgument("counts must be finite and non-negative")
        self.counts = counts
        self.first_t = first_t
        self.last_t = last_t

    @property
    def n_bins(self):
        return self.counts.size

    @property
    def total(self):
        return float(self.counts.sum())

    def copy(self):
        return DirectionalHistogram(counts=self.counts.copy(), first_t=self.first_t, last_t=self.last_t)

    def accumulate(self, b, t, weight=1.0):
        """Add ``weight`` to bin ``b`` at time ``t``; returns ``self``."""
        if not weight >= 0 or not math.isfinite(weight):
            raise InvalidArgument(f"weight must be finite and non-negative, got {weight!r}")
        if int(b) != b or not 0 <= b < self.n_bins:
            raise InvalidArgument(f"bin index {b!r} outside [0, {self.n_bins})")
        self.counts[int(b)] += weight
        t = float(t)
        if self.first_t is None or t < self.first_t:
            self.first_t = t
        if self.last_t is None or t > self.last_t:
            self.last_t = t
        return self

    def __eq__(self, other):
        if not isinstance(other, DirectionalHistogram):
            return NotImplemented
        return (
            np.array_equal(self.counts, other.counts)
            and self.first_t == other.first_t
            and self.last_t == other.last_t
        )

    def __repr__(self):
        return f"DirectionalHistogram(counts={self.counts.tolist()}, first_t={self.first_t}, last_t={self.last_t})"

    def to_dict(self):
        return {"counts": self.counts.tolist(), "first_t": self.first_t, "last_t": self.last_t}

    @classmethod
    def from_dict(cls, d):
        return cls(counts=d["counts"], first_t=d["first_t"], last_t=d["last_t"])


@dataclass(frozen=True)
class FlowDescriptor:
    magnitude: float
    dominant_direction: Optional[float]
    resultant_length: float
    entropy: float

    def to_dict(self):
        return {
            "flow_magnitude": self.magnitude,
            "dominant_direction": self.dominant_direction,
            "resultant_length": self.resultant_length,
            "entropy": self.entropy,
        }


def accumulate(h, b, t, weight=1.0):
    return h.accumulate(b, t, weight)


def normalize(h):
    total = h.total
    if total <= 0:
        raise EmptyHistogram("cannot normalize a histogram with zero total")
    return h.counts / total


def flow_magnitude(h, t_floor=DEFAULT_T_FLOOR):
    """Activity rate in events per second over the observed span.

    The span is floored at ``t_floor`` so single-instant histories stay finite.
    """
    total = h.total
    if total <= 0:
        return 0.0
    return total / max(h.last_t - h.first_t, t_floor)


def _resultant(weights, n_bins, eps_dir):
    total = float(weights.sum())
    if total <= 0:
        return None, 0.0
    centers = bin_centers(n_bins)
    rx = float(np.dot(weights, np.cos(centers))) / total
    ry = float(np.dot(weights, np.sin(centers))) / total
    r = min(math.hypot(rx, ry), 1.0)
    if r < eps_dir:
        return None, r
    return math.atan2(ry, rx), r


def dominant_direction(h, n_bins=None, eps_dir=DEFAULT_EPS_DIR):
    """Circular mean of bin centers weighted by counts.

    Returns
    -------
    direction : float or None
        Mean heading, or None when the resultant is shorter than ``eps_dir``.
    resultant_length : float
        Mean resultant length in ``[0, 1]``.
    """
    return _resultant(h.counts, n_bins or h.n_bins, eps_dir)


def _entropy(weights, n_bins):
    total = float(weights.sum())
    if total <= 0:
        return 0.0
    p = weights[weights > 0] / total
    if p.size <= 1:
        return 0.0
    value = float(-np.sum(p * np.log(p)) / math.log(n_bins))
    return min(max(value, 0.0), 1.0)


def directional_entropy(h, n_bins=None):
    """Shannon entropy of the bin distribution normalised by ``ln(n_bins)``."""
    return _entropy(h.counts, n_bins or h.n_bins)


def descriptor_of(h, n_bins=None, t_floor=DEFAULT_T_FLOOR, eps_dir=DEFAULT_EPS_DIR):
    n_bins = n_bins or h.n_bins
    direction, r = dominant_direction(h, n_bins, eps_dir)
    return FlowDescriptor(flow_magnitude(h, t_floor), direction, r, directional_entropy(h, n_bins))


def descriptor_of_vector(v, eps_dir=DEFAULT_EPS_DIR):
    """Descriptor of a predicted per-bin activity vector.

    The magnitude is the raw sum of the (clamped) vector; direction and
    entropy are computed on its normalised shape.
    """
    v = np.asarray(v, dtype=float)
    direction, r = _resultant(v, v.size, eps_dir)
    return FlowDescriptor(float(v.sum()), direction, r, _entropy(v, v.size))


def merge(a, b):
    """Element-wise sum of two histograms with the union of their time spans."""
    if a.n_bins != b.n_bins:
        raise InvalidArgument(f"bin count mismatch: {a.n_bins} != {b.n_bins}")
    firsts = [t for t in (a.first_t, b.first_t) if t is not None]
    lasts = [t for t in (a.last_t, b.last_t) if t is not None]
    return DirectionalHistogram(
        counts=a.counts + b.counts,
        first_t=min(firsts) if firsts else None,
        last_t=max(lasts) if lasts else None,
    )
