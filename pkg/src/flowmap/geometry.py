"""World-frame geometry primitives: spatial hash keys and orientation bins."""

import math
from typing import NamedTuple

import numpy as np

from .exceptions import InvalidArgument

TWO_PI = 2.0 * math.pi


class CellKey(NamedTuple):
    """Integer lattice coordinate of a sparse hash cell.

    Tuple comparison gives the lexicographic ``(ix, iy, iz)`` order used
    wherever a deterministic key order is required.
    """

    ix: int
    iy: int
    iz: int


def _check_delta(delta):
    if not (delta > 0 and math.isfinite(delta)):
        raise InvalidArgument(f"resolution must be positive and finite, got {delta!r}")


def hash_key(p, delta) -> CellKey:
    """Map a world position to its lattice cell.

    Parameters
    ----------
    p : sequence of 3 floats
        Position ``(x, y, z)`` in meters.
    delta : float
        Cell edge length in meters.

    Returns
    -------
    CellKey
        ``(floor(x/delta), floor(y/delta), floor(z/delta))`` with floor
        rounding toward negative infinity.
    """
    _check_delta(delta)
    if len(p) != 3:
        raise InvalidArgument(f"position must have 3 components, got {len(p)}")
    x, y, z = (float(c) for c in p)
    if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
        raise InvalidArgument(f"position must be finite, got {p!r}")
    return CellKey(math.floor(x / delta), math.floor(y / delta), math.floor(z / delta))


def hash_keys(points, delta):
    """Vectorised :func:`hash_key` for an ``(n, 3)`` array; returns int64 ``(n, 3)``."""
    _check_delta(delta)
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise InvalidArgument("points must have shape (n, 3)")
    if not np.all(np.isfinite(pts)):
        raise InvalidArgument("points must be finite")
    return np.floor(pts / delta).astype(np.int64)


def cell_center(key, delta):
    """Center of lattice cell ``key`` in world coordinates."""
    _check_delta(delta)
    return tuple((k + 0.5) * delta for k in key)


def canonical_angle(theta):
    """Wrap ``theta`` into ``[-pi, pi)``."""
    theta = float(theta)
    if not math.isfinite(theta):
        raise InvalidArgument(f"angle must be finite, got {theta!r}")
    if -math.pi <= theta < math.pi:
        return theta
    wrapped = math.fmod(theta + math.pi, TWO_PI)
    if wrapped < 0:
        wrapped += TWO_PI
    wrapped -= math.pi
    # fmod rounding can land exactly on +pi
    if wrapped >= math.pi:
        wrapped = -math.pi
    return wrapped


def orientation_bin(theta, n_bins) -> int:
    """Discretise a heading into one of ``n_bins`` uniform angular bins.

    Bin 0 starts at ``-pi``; a heading of ``pi`` wraps to bin 0.
    """
    if int(n_bins) != n_bins or n_bins < 2:
        raise InvalidArgument(f"bin count must be an integer >= 2, got {n_bins!r}")
    n_bins = int(n_bins)
    theta = canonical_angle(theta)
    b = math.floor((theta + math.pi) / (TWO_PI / n_bins))
    # snap to the edges reported by bin_edge so edge headings are exact
    if b < n_bins and theta >= bin_edge(b + 1, n_bins):
        b += 1
    elif b > 0 and theta < bin_edge(b, n_bins):
        b -= 1
    return b % n_bins


def bin_edge(k, n_bins) -> float:
    """Lower edge of bin ``k`` (``k == n_bins`` gives the upper edge, ``pi``)."""
    return -math.pi + k * (TWO_PI / n_bins)


def bin_center(b, n_bins) -> float:
    """Heading at the center of bin ``b``."""
    if int(n_bins) != n_bins or n_bins < 2:
        raise InvalidArgument(f"bin count must be an integer >= 2, got {n_bins!r}")
    if int(b) != b or not 0 <= b < n_bins:
        raise InvalidArgument(f"bin index {b!r} outside [0, {n_bins})")
    return -math.pi + (int(b) + 0.5) * (TWO_PI / int(n_bins))


def bin_centers(n_bins):
    return np.array([bin_center(b, n_bins) for b in range(n_bins)])


def distance(a, b) -> float:
    return math.dist(a, b)
