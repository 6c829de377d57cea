"""Distances between discrete distributions, linear and circular."""

import math

import numpy as np

from .exceptions import InvalidArgument, UndefinedResult

NORM_TOL = 1e-9


def _check_pair(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.ndim != 1 or p.shape != q.shape:
        raise InvalidArgument(f"distributions must be 1-d with equal length, got {p.shape} and {q.shape}")
    if p.size == 0:
        raise InvalidArgument("distributions must be non-empty")
    for name, d in (("p", p), ("q", q)):
        if np.any(d < 0) or not np.all(np.isfinite(d)):
            raise InvalidArgument(f"{name} must be finite and non-negative")
        if abs(d.sum() - 1.0) > NORM_TOL:
            raise InvalidArgument(f"{name} must sum to 1, sums to {d.sum()!r}")
    return p, q


def _kl2(a, m):
    nz = a > 0
    return float(np.sum(a[nz] * np.log2(a[nz] / m[nz])))


def js_divergence(p, q):
    """Jensen-Shannon divergence in bits, bounded by ``[0, 1]``."""
    p, q = _check_pair(p, q)
    m = 0.5 * (p + q)
    js = 0.5 * _kl2(p, m) + 0.5 * _kl2(q, m)
    return min(max(js, 0.0), 1.0)


def bhattacharyya(p, q):
    """``-ln(sum(sqrt(p*q)))``; ``inf`` when the supports are disjoint."""
    p, q = _check_pair(p, q)
    bc = float(np.sum(np.sqrt(p * q)))
    if bc <= 0:
        return math.inf
    return max(-math.log(min(bc, 1.0)), 0.0)


def wasserstein_1d(p, q, values=None):
    """Earth mover's distance between two distributions on an ordered support.

    Parameters
    ----------
    p, q : array-like
        Probability weights on the same support.
    values : array-like, optional
        Sorted support coordinates; defaults to ``0, 1, ..., n-1``.
    """
    p, q = _check_pair(p, q)
    if values is None:
        values = np.arange(p.size, dtype=float)
    else:
        values = np.asarray(values, dtype=float)
        if values.shape != p.shape:
            raise InvalidArgument("values must match the distribution length")
        if np.any(np.diff(values) < 0):
            raise InvalidArgument("values must be sorted ascending")
    cdf_gap = np.cumsum(p - q)[:-1]
    return float(np.sum(np.abs(cdf_gap) * np.diff(values)))


def wasserstein_samples(a, b):
    """W1 between the empirical distributions of two samples of scalars."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size == 0 or b.size == 0:
        raise InvalidArgument("samples must be non-empty")
    support = np.union1d(a, b)
    pa = np.zeros(support.size)
    pb = np.zeros(support.size)
    np.add.at(pa, np.searchsorted(support, a), 1.0 / a.size)
    np.add.at(pb, np.searchsorted(support, b), 1.0 / b.size)
    pa /= pa.sum()
    pb /= pb.sum()
    return wasserstein_1d(pa, pb, support)


def circular_wasserstein(p, q):
    """W1 between two distributions over equal angular bins, in degrees.

    Transport runs along the circle, so the result never exceeds 180.
    """
    p, q = _check_pair(p, q)
    n = p.size
    if n < 2:
        raise InvalidArgument("need at least two angular bins")
    step = 360.0 / n
    gap = np.cumsum(p - q)
    # the optimal cyclic shift of the cumulative gap is its median
    shift = np.median(gap)
    cost = float(np.sum(np.abs(gap - shift))) * step
    return min(max(cost, 0.0), 180.0)


def circular_mean(angles):
    a = np.asarray(angles, dtype=float)
    return math.atan2(float(np.sin(a).sum()), float(np.cos(a).sum()))


def circular_correlation(a, b):
    """Circular correlation coefficient between paired angle samples (radians)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 1 or a.shape != b.shape:
        raise InvalidArgument("angle sequences must be 1-d with equal length")
    if a.size < 2:
        raise InvalidArgument("need at least two paired angles")
    sa = np.sin(a - circular_mean(a))
    sb = np.sin(b - circular_mean(b))
    denom = math.sqrt(float(np.sum(sa**2)) * float(np.sum(sb**2)))
    if denom < 1e-12:
        raise UndefinedResult("circular correlation undefined for a constant field")
    r = float(np.sum(sa * sb)) / denom
    return min(max(r, -1.0), 1.0)
