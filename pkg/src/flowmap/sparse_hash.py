"""Sparse store of directional histograms keyed by lattice cell."""

import json
import threading
from dataclasses import dataclass

from .exceptions import InvalidArgument, ParseError
from .geometry import CellKey, cell_center, hash_key, orientation_bin
from .histogram import DirectionalHistogram, merge

DEFAULT_DELTA = 0.5


@dataclass
class HashCell:
    key: CellKey
    histogram: DirectionalHistogram
    created_t: float


class SparseHashMap:
    """Cells are allocated only when data is written to them.

    Parameters
    ----------
    delta : float
        Cell edge length in meters.
    n_bins : int
        Orientation bins per histogram.
    """

    def __init__(self, delta=DEFAULT_DELTA, n_bins=8):
        if not delta > 0:
            raise InvalidArgument(f"delta must be positive, got {delta!r}")
        if int(n_bins) != n_bins or n_bins < 2:
            raise InvalidArgument(f"bin count must be an integer >= 2, got {n_bins!r}")
        self.delta = float(delta)
        self.n_bins = int(n_bins)
        self._cells = {}
        self.lock = threading.RLock()

    def __len__(self):
        return len(self._cells)

    def __contains__(self, key):
        return key in self._cells

    def __iter__(self):
        return iter(self.keys_ordered())

    def key_of(self, p):
        return hash_key(p, self.delta)

    def center_of(self, key):
        return cell_center(key, self.delta)

    def upsert_observation(self, p, theta, t, weight=1.0):
        """Accumulate one observation into the cell containing ``p``.

        A zero-weight observation on an unvisited cell allocates nothing.
        """
        key = self.key_of(p)
        b = orientation_bin(theta, self.n_bins)
        self.accumulate_key(key, b, t, weight)
        return key

    def accumulate_key(self, key, b, t, weight=1.0):
        if weight < 0:
            raise InvalidArgument(f"weight must be non-negative, got {weight!r}")
        with self.lock:
            cell = self._cells.get(key)
            if cell is None:
                if weight == 0:
                    return key
                cell = HashCell(CellKey(*key), DirectionalHistogram(self.n_bins), float(t))
                self._cells[cell.key] = cell
            cell.histogram.accumulate(b, t, weight)
        return key

    def deposit(self, key, histogram, created_t):
        """Merge a whole histogram into ``key``, creating the cell if needed."""
        if histogram.n_bins != self.n_bins:
            raise InvalidArgument("histogram bin count does not match the map")
        if histogram.total <= 0:
            return None
        key = CellKey(*key)
        with self.lock:
            cell = self._cells.get(key)
            if cell is None:
                cell = HashCell(key, histogram.copy(), float(created_t))
                self._cells[key] = cell
            else:
                cell.histogram = merge(cell.histogram, histogram)
        return cell

    def lookup(self, key):
        return self._cells.get(key)

    def remove_cell(self, key):
        with self.lock:
            return self._cells.pop(key, None)

    def keys_ordered(self):
        return sorted(self._cells)

    def cells(self):
        """Cells in deterministic key order."""
        return [self._cells[k] for k in self.keys_ordered()]

    def occupied_count(self):
        return len(self._cells)

    def total(self):
        return sum(c.histogram.total for c in self._cells.values())

    def to_dict(self):
        return {
            "delta": self.delta,
            "n_bins": self.n_bins,
            "cells": [
                {"key": list(c.key), "created_t": c.created_t, **c.histogram.to_dict()}
                for c in self.cells()
            ],
        }

    @classmethod
    def from_dict(cls, d):
        m = cls(d["delta"], d["n_bins"])
        for rec in d["cells"]:
            key = CellKey(*(int(k) for k in rec["key"]))
            h = DirectionalHistogram.from_dict(rec)
            if h.n_bins != m.n_bins:
                raise ParseError(f"cell {key} has {h.n_bins} bins, map has {m.n_bins}")
            m._cells[key] = HashCell(key, h, float(rec["created_t"]))
        return m

    def save(self, path):
        """Write one JSON record per line: a header, then one line per cell."""
        d = self.to_dict()
        with open(path, "w") as fh:
            fh.write(json.dumps({"delta": d["delta"], "n_bins": d["n_bins"]}) + "\n")
            for rec in d["cells"]:
                fh.write(json.dumps({**rec, "delta": d["delta"], "n_bins": d["n_bins"]}) + "\n")

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            lines = [ln for ln in fh.read().splitlines() if ln.strip()]
        if not lines:
            raise ParseError("empty sparse map file", 1)
        try:
            header = json.loads(lines[0])
            cells = []
            for i, ln in enumerate(lines[1:], start=2):
                try:
                    cells.append(json.loads(ln))
                except json.JSONDecodeError as exc:
                    raise ParseError(str(exc), i) from None
        except json.JSONDecodeError as exc:
            raise ParseError(str(exc), 1) from None
        return cls.from_dict({"delta": header["delta"], "n_bins": header["n_bins"], "cells": cells})
