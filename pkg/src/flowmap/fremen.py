"""Frequency-domain temporal model over (location, bin) activity channels.

Each channel accumulates a running mean and, for every candidate period,
the non-uniform Fourier sums ``sum(v * exp(-i w t))`` and ``sum(exp(-i w t))``.
A spectrum update centres the sums on the mean, keeps the ``order``
strongest components and publishes them; predictions reconstruct

    p(t) = clip(mean + sum_k 2 |g_k| cos(w_k t + arg g_k), 0, 1)

from the last published spectrum only, so ingestion never waits on readers.
"""

import math
import threading
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidArgument, NotFound

DEFAULT_ORDER = 2
DEFAULT_UPDATE_INTERVAL = 10.0


def candidate_ladder(t_max, levels=7):
    """Geometric period ladder ``t_max / 2**j`` for ``j = 0 .. levels-1``."""
    if not t_max > 0:
        raise InvalidArgument(f"t_max must be positive, got {t_max!r}")
    return tuple(t_max / 2**j for j in range(levels))


@dataclass(frozen=True)
class SpectralChannel:
    """Read-only view of one (location, bin) channel."""

    key: tuple
    n: int
    mean: float
    coefficients: np.ndarray
    selected_periods: tuple


class _LocationState:
    __slots__ = ("n", "mean", "sums", "basis")

    def __init__(self, n_bins, n_cand):
        self.n = np.zeros(n_bins, dtype=np.int64)
        self.mean = np.zeros(n_bins)
        self.sums = np.zeros((n_bins, n_cand), dtype=complex)
        self.basis = np.zeros((n_bins, n_cand), dtype=complex)

    def coefficients(self):
        n = np.maximum(self.n, 1)[:, None]
        return (self.sums - self.mean[:, None] * self.basis) / n


@dataclass(frozen=True)
class _Published:
    mean: np.ndarray  # (B,)
    omega: np.ndarray  # (B, K)
    coef: np.ndarray  # (B, K) complex
    selected: np.ndarray  # (B, K) candidate indices

    def reconstruct(self, t):
        amp = np.abs(self.coef)
        val = self.mean + np.sum(2.0 * amp * np.cos(self.omega * t + np.angle(self.coef)), axis=1)
        return np.clip(val, 0.0, 1.0)


def _frozen(a):
    a = np.array(a)
    a.flags.writeable = False
    return a


class GlobalTemporalModel:
    """One model object owning every spectral channel.

    Parameters
    ----------
    periods : sequence of float
        Candidate periods in seconds (distinct, positive).
    order : int
        Number of components kept per channel.
    n_bins : int
        Orientation bins per location.
    """

    def __init__(self, periods, order=DEFAULT_ORDER, n_bins=8):
        periods = tuple(float(T) for T in periods)
        if not periods or any(not T > 0 for T in periods):
            raise InvalidArgument("candidate periods must be positive")
        if len(set(periods)) != len(periods):
            raise InvalidArgument("candidate periods must be distinct")
        if int(order) != order or order < 0:
            raise InvalidArgument(f"order must be a non-negative integer, got {order!r}")
        self.periods = periods
        self.omegas = np.array([2 * math.pi / T for T in periods])
        self.order = min(int(order), len(periods))
        self.n_bins = int(n_bins)
        self._locs = {}
        self._published = {}
        self._write_lock = threading.Lock()

    # -- ingestion --------------------------------------------------------

    def _state(self, loc):
        st = self._locs.get(loc)
        if st is None:
            st = self._locs[loc] = _LocationState(self.n_bins, len(self.periods))
        return st

    def _phasor(self, t):
        return np.exp(-1j * self.omegas * t)

    def ingest_window(self, key, t_mid, value):
        """Add one normalised measurement to channel ``key = (location, bin)``."""
        loc, b = key
        if not 0.0 <= value <= 1.0:
            raise InvalidArgument(f"measurement must lie in [0, 1], got {value!r}")
        if not 0 <= b < self.n_bins:
            raise InvalidArgument(f"bin index {b!r} outside [0, {self.n_bins})")
        ph = self._phasor(t_mid)
        with self._write_lock:
            st = self._state(tuple(loc))
            st.n[b] += 1
            st.mean[b] += (value - st.mean[b]) / st.n[b]
            st.sums[b] += value * ph
            st.basis[b] += ph

    def ingest_location(self, loc, t_mid, values):
        """Ingest one measurement for every bin of ``loc`` at once."""
        values = np.asarray(values, dtype=float)
        if values.shape != (self.n_bins,):
            raise InvalidArgument(f"expected {self.n_bins} values, got shape {values.shape}")
        if np.any(values < 0) or np.any(values > 1):
            raise InvalidArgument("measurements must lie in [0, 1]")
        ph = self._phasor(t_mid)
        with self._write_lock:
            st = self._state(tuple(loc))
            st.n += 1
            st.mean += (values - st.mean) / st.n
            st.sums += values[:, None] * ph[None, :]
            st.basis += ph[None, :]

    def merge_location(self, src, dst):
        """Fold the history of ``src`` into ``dst`` (creating ``dst`` if absent)."""
        src, dst = tuple(src), tuple(dst)
        if src == dst:
            return
        with self._write_lock:
            a = self._locs.pop(src, None)
            if a is None:
                return
            b = self._locs.get(dst)
            if b is None:
                self._locs[dst] = a
            else:
                n = a.n + b.n
                safe = np.maximum(n, 1)
                b.mean = (a.mean * a.n + b.mean * b.n) / safe
                b.n = n
                b.sums = b.sums + a.sums
                b.basis = b.basis + a.basis
            published = dict(self._published)
            published.pop(src, None)
            published[dst] = self._spectrum_of(self._locs[dst])
            self._published = published

    # -- spectrum ---------------------------------------------------------

    def _spectrum_of(self, st):
        coef = st.coefficients()
        amp = np.abs(coef)
        # stable sort on -amp: ties keep the candidate order
        sel = np.argsort(-amp, axis=1, kind="stable")[:, : self.order]
        rows = np.arange(self.n_bins)[:, None]
        return _Published(
            mean=_frozen(st.mean.copy()),
            omega=_frozen(self.omegas[sel]),
            coef=_frozen(coef[rows, sel]),
            selected=_frozen(sel),
        )

    def update_spectrum(self):
        """Recompute and atomically publish the spectrum of every channel."""
        with self._write_lock:
            published = {loc: self._spectrum_of(self._locs[loc]) for loc in sorted(self._locs)}
            self._published = published

    # -- queries ----------------------------------------------------------

    def locations(self):
        return sorted(self._locs)

    def channel_keys(self):
        return [(loc, b) for loc in self.locations() for b in range(self.n_bins)]

    def has_location(self, loc):
        return tuple(loc) in self._published

    def channel(self, key):
        loc, b = key
        st = self._locs.get(tuple(loc))
        if st is None:
            raise NotFound(f"no channel for {key!r}")
        pub = self._published.get(tuple(loc))
        selected = () if pub is None else tuple(self.periods[i] for i in pub.selected[b])
        return SpectralChannel(
            (tuple(loc), b), int(st.n[b]), float(st.mean[b]), st.coefficients()[b].copy(), selected
        )

    def _spectrum(self, loc):
        pub = self._published.get(tuple(loc))
        if pub is None:
            raise NotFound(f"no published spectrum for location {tuple(loc)!r}")
        return pub

    def predict_location(self, loc, t):
        """Predicted per-bin activity in ``[0, 1]`` at time ``t``."""
        return self._spectrum(loc).reconstruct(float(t))

    def predict_channel(self, key, t):
        loc, b = key
        if not 0 <= b < self.n_bins:
            raise NotFound(f"no channel for {key!r}")
        return float(self.predict_location(loc, t)[b])

    # -- persistence ------------------------------------------------------

    def to_dict(self):
        def cplx(a):
            return [[float(z.real), float(z.imag)] for z in np.ravel(a)]

        locs = []
        for loc in self.locations():
            st = self._locs[loc]
            rec = {
                "location": list(loc),
                "n": st.n.tolist(),
                "mean": st.mean.tolist(),
                "sums": cplx(st.sums),
                "basis": cplx(st.basis),
            }
            pub = self._published.get(loc)
            if pub is not None:
                rec["published"] = {
                    "mean": pub.mean.tolist(),
                    "selected": pub.selected.tolist(),
                    "coef": cplx(pub.coef),
                }
            locs.append(rec)
        return {"periods": list(self.periods), "order": self.order, "n_bins": self.n_bins, "locations": locs}

    @classmethod
    def from_dict(cls, d):
        m = cls(d["periods"], d["order"], d["n_bins"])
        B, C = m.n_bins, len(m.periods)

        def cplx(rows, shape):
            return np.array([complex(re, im) for re, im in rows], dtype=complex).reshape(shape)

        published = {}
        for rec in d["locations"]:
            loc = tuple(rec["location"])
            st = _LocationState(B, C)
            st.n = np.array(rec["n"], dtype=np.int64)
            st.mean = np.array(rec["mean"], dtype=float)
            st.sums = cplx(rec["sums"], (B, C))
            st.basis = cplx(rec["basis"], (B, C))
            m._locs[loc] = st
            if "published" in rec:
                p = rec["published"]
                sel = np.array(p["selected"], dtype=np.int64).reshape(B, -1)
                published[loc] = _Published(
                    mean=_frozen(np.array(p["mean"], dtype=float)),
                    omega=_frozen(m.omegas[sel]),
                    coef=_frozen(cplx(p["coef"], sel.shape)),
                    selected=_frozen(sel),
                )
        m._published = published
        return m


class WindowClock:
    """Fixed-length ingest windows ``[t0 + k*dt, t0 + (k+1)*dt)``."""

    def __init__(self, interval=DEFAULT_UPDATE_INTERVAL, t0=0.0):
        if not interval > 0:
            raise InvalidArgument(f"update interval must be positive, got {interval!r}")
        self.interval = float(interval)
        self.t0 = float(t0)
        self.index = 0

    @property
    def start(self):
        return self.t0 + self.index * self.interval

    @property
    def end(self):
        return self.t0 + (self.index + 1) * self.interval

    def due(self, t):
        """Yield ``(t_mid, t_end)`` for every window that closes at or before ``t``."""
        while t >= self.end:
            start, end = self.start, self.end
            self.index += 1
            yield 0.5 * (start + end), end


def normalized_window(counts):
    """Range-normalise per-bin window counts by their maximum; all-zero stays zero."""
    peak = counts.max()
    if peak <= 0:
        return np.zeros_like(counts, dtype=float)
    return counts / peak
