"""Dense fixed-bounds grid map of dynamics, and rasterisation of the graph model onto it."""

import json
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidArgument, NotFound, OutOfBounds, ParseError
from .fremen import (
    DEFAULT_ORDER,
    DEFAULT_UPDATE_INTERVAL,
    GlobalTemporalModel,
    WindowClock,
    candidate_ladder,
    normalized_window,
)
from .geometry import orientation_bin
from .histogram import (
    DEFAULT_EPS_DIR,
    DEFAULT_T_FLOOR,
    DirectionalHistogram,
    descriptor_of,
    descriptor_of_vector,
    merge,
)

DEFAULT_RESOLUTION = 0.5
# dense storage beyond this many cells is refused
MAX_GRID_CELLS = 4_000_000


@dataclass(frozen=True)
class GridSpec:
    origin_x: float
    origin_y: float
    resolution: float
    nx: int
    ny: int

    def __post_init__(self):
        if not self.resolution > 0:
            raise InvalidArgument(f"resolution must be positive, got {self.resolution!r}")
        if self.nx < 1 or self.ny < 1:
            raise InvalidArgument("grid dimensions must be at least 1x1")

    @classmethod
    def from_bounds(cls, xmin, ymin, xmax, ymax, resolution=DEFAULT_RESOLUTION, align=True):
        """Grid covering the box; with ``align`` the origin snaps to multiples of ``resolution``."""
        if not (xmax > xmin and ymax > ymin):
            raise InvalidArgument("empty bounds")
        if align:
            xmin = math.floor(xmin / resolution) * resolution
            ymin = math.floor(ymin / resolution) * resolution
        nx = max(1, math.ceil((xmax - xmin) / resolution))
        ny = max(1, math.ceil((ymax - ymin) / resolution))
        return cls(float(xmin), float(ymin), float(resolution), int(nx), int(ny))

    @property
    def n_cells(self):
        return self.nx * self.ny

    def index_of(self, p):
        """``(ix, iy)`` of the cell containing ``p``; raises OutOfBounds outside the grid."""
        ix = math.floor((p[0] - self.origin_x) / self.resolution)
        iy = math.floor((p[1] - self.origin_y) / self.resolution)
        if not (0 <= ix < self.nx and 0 <= iy < self.ny):
            raise OutOfBounds(f"position {tuple(p)} outside grid")
        return ix, iy

    def center(self, ix, iy):
        return (
            self.origin_x + (ix + 0.5) * self.resolution,
            self.origin_y + (iy + 0.5) * self.resolution,
        )

    def to_dict(self):
        return {
            "origin_x": self.origin_x,
            "origin_y": self.origin_y,
            "resolution": self.resolution,
            "nx": self.nx,
            "ny": self.ny,
        }


@dataclass(frozen=True)
class FieldCell:
    weights: np.ndarray
    descriptor: object


class DescriptorField(dict):
    """Mapping ``(ix, iy) -> FieldCell`` over the non-empty cells of a grid."""

    def __init__(self, spec, mode, *args):
        super().__init__(*args)
        self.spec = spec
        self.mode = mode

    def rows(self):
        out = []
        for (ix, iy) in sorted(self):
            d = self[ix, iy].descriptor
            out.append((ix, iy, d.magnitude, d.dominant_direction, d.entropy))
        return out

    def dump(self, path):
        """Write ``ix,iy,flow_magnitude,dominant_direction,entropy`` per non-empty cell."""
        with open(path, "w") as fh:
            fh.write("ix,iy,flow_magnitude,dominant_direction,entropy\n")
            for ix, iy, mag, direction, ent in self.rows():
                dstr = "" if direction is None else repr(float(direction))
                fh.write(f"{ix},{iy},{float(mag)!r},{dstr},{float(ent)!r}\n")


class GridModel:
    """Dense per-cell directional histograms with per-(cell, bin) spectral channels.

    Storage is allocated for every cell up front; grids larger than
    ``max_cells`` are refused.
    """

    def __init__(
        self,
        spec,
        n_bins=8,
        periods=None,
        order=DEFAULT_ORDER,
        update_interval=DEFAULT_UPDATE_INTERVAL,
        t_floor=DEFAULT_T_FLOOR,
        eps_dir=DEFAULT_EPS_DIR,
        t0=0.0,
        max_cells=MAX_GRID_CELLS,
    ):
        if spec.n_cells > max_cells:
            raise InvalidArgument(
                f"dense grid of {spec.nx}x{spec.ny} cells exceeds the {max_cells}-cell limit"
            )
        self.spec = spec
        self.n_bins = int(n_bins)
        self.counts = np.zeros((spec.nx, spec.ny, self.n_bins))
        self.first_t = np.full((spec.nx, spec.ny), np.nan)
        self.last_t = np.full((spec.nx, spec.ny), np.nan)
        self.model = GlobalTemporalModel(periods or candidate_ladder(3600.0), order, n_bins)
        self.clock = WindowClock(update_interval, t0)
        self.t_floor = t_floor
        self.eps_dir = eps_dir
        self.last_obs_t = None
        self._window = np.zeros_like(self.counts)

    @property
    def cell_count(self):
        return self.spec.n_cells

    def advance_to(self, t):
        for t_mid, _ in self.clock.due(t):
            self._flush(t_mid)

    def _flush(self, t_mid):
        active = np.argwhere(self.counts.sum(axis=2) > 0)
        for ix, iy in sorted(map(tuple, active)):
            self.model.ingest_location((int(ix), int(iy)), t_mid, normalized_window(self._window[ix, iy]))
        self._window[:] = 0.0

    def grid_accumulate(self, p, theta, t, weight=1.0):
        if weight < 0:
            raise InvalidArgument(f"weight must be non-negative, got {weight!r}")
        ix, iy = self.spec.index_of(p)
        self.advance_to(t)
        b = orientation_bin(theta, self.n_bins)
        self.counts[ix, iy, b] += weight
        self._window[ix, iy, b] += weight
        if np.isnan(self.first_t[ix, iy]) or t < self.first_t[ix, iy]:
            self.first_t[ix, iy] = t
        if np.isnan(self.last_t[ix, iy]) or t > self.last_t[ix, iy]:
            self.last_t[ix, iy] = t
        self.last_obs_t = t
        return ix, iy

    def finalize(self, t_end=None):
        if t_end is None:
            t_end = self.last_obs_t if self.last_obs_t is not None else self.clock.start
        self.advance_to(t_end)
        if t_end > self.clock.start and self._window.any():
            self._flush(0.5 * (self.clock.start + t_end))
            self.clock.index += 1
        self.model.update_spectrum()
        return self

    def replay(self, observations, t_end=None, skip_out_of_bounds=True):
        obs = np.asarray(observations, dtype=float).reshape(-1, 5)
        for t, x, y, z, theta in obs:
            try:
                self.grid_accumulate((x, y, z), theta, t)
            except OutOfBounds:
                if not skip_out_of_bounds:
                    raise
        return self.finalize(t_end)

    def cell_histogram(self, ix, iy):
        if self.counts[ix, iy].sum() <= 0:
            return None
        return DirectionalHistogram(
            counts=self.counts[ix, iy].copy(),
            first_t=float(self.first_t[ix, iy]),
            last_t=float(self.last_t[ix, iy]),
        )

    def occupied_cells(self):
        return sorted((int(i), int(j)) for i, j in np.argwhere(self.counts.sum(axis=2) > 0))

    def grid_predict(self, cell, t):
        ix, iy = cell
        if not self.model.has_location((ix, iy)):
            raise NotFound(f"no temporal channels for grid cell {(ix, iy)}")
        return self.model.predict_location((ix, iy), t)

    def historical_field(self):
        field = DescriptorField(self.spec, "historical")
        for ix, iy in self.occupied_cells():
            h = self.cell_histogram(ix, iy)
            field[ix, iy] = FieldCell(h.counts, descriptor_of(h, self.n_bins, self.t_floor, self.eps_dir))
        return field

    def predicted_field(self, t):
        field = DescriptorField(self.spec, "predicted")
        for loc in self.model.locations():
            if self.model.has_location(loc):
                v = self.model.predict_location(loc, t)
                field[loc] = FieldCell(v, descriptor_of_vector(v, self.eps_dir))
        return field

    def field(self, mode, t=None):
        if mode == "historical":
            return self.historical_field()
        if mode == "predicted":
            if t is None:
                raise InvalidArgument("predicted mode needs an evaluation time")
            return self.predicted_field(t)
        raise InvalidArgument(f"unknown mode {mode!r}")

    # -- persistence --------------------------------------------------------

    def to_dict(self):
        cells = []
        for ix, iy in self.occupied_cells():
            cells.append(
                {
                    "ix": ix,
                    "iy": iy,
                    "counts": self.counts[ix, iy].tolist(),
                    "first_t": float(self.first_t[ix, iy]),
                    "last_t": float(self.last_t[ix, iy]),
                }
            )
        return {
            "spec": self.spec.to_dict(),
            "n_bins": self.n_bins,
            "config": {
                "t_floor": self.t_floor,
                "eps_dir": self.eps_dir,
                "update_interval": self.clock.interval,
                "t0": self.clock.t0,
            },
            "clock_index": self.clock.index,
            "last_obs_t": self.last_obs_t,
            "cells": cells,
            "window": [
                [int(i), int(j), self._window[i, j].tolist()]
                for i, j in np.argwhere(self._window.sum(axis=2) > 0)
            ],
            "model": self.model.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        cfg = d["config"]
        gm = cls(
            GridSpec(**d["spec"]),
            d["n_bins"],
            periods=d["model"]["periods"],
            order=d["model"]["order"],
            update_interval=cfg["update_interval"],
            t_floor=cfg["t_floor"],
            eps_dir=cfg["eps_dir"],
            t0=cfg["t0"],
        )
        for c in d["cells"]:
            gm.counts[c["ix"], c["iy"]] = c["counts"]
            gm.first_t[c["ix"], c["iy"]] = c["first_t"]
            gm.last_t[c["ix"], c["iy"]] = c["last_t"]
        for i, j, w in d["window"]:
            gm._window[i, j] = w
        gm.clock.index = d["clock_index"]
        gm.last_obs_t = d["last_obs_t"]
        gm.model = GlobalTemporalModel.from_dict(d["model"])
        return gm

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
            raise ParseError(f"malformed grid snapshot: {exc}") from None


def rasterize_graph_model(dmap, spec, mode="historical", t=None):
    """Deposit every node and unbound-cell history into the grid cell holding it.

    Nodes deposit at their position, unbound cells at their center. Sources
    sharing a grid cell are merged (histograms) or summed (predicted
    vectors). Sources outside the grid are dropped.
    """
    if mode not in ("historical", "predicted"):
        raise InvalidArgument(f"unknown mode {mode!r}")
    if mode == "predicted" and t is None:
        raise InvalidArgument("predicted mode needs an evaluation time")
    acc = {}
    for h in dmap.holders():
        try:
            cell = spec.index_of(h.position)
        except OutOfBounds:
            continue
        if mode == "historical":
            src = h.histogram
            acc[cell] = merge(acc[cell], src) if cell in acc else src.copy()
        else:
            if not dmap.model.has_location(h.channel):
                continue
            v = dmap.model.predict_location(h.channel, t)
            acc[cell] = acc[cell] + v if cell in acc else v.copy()
    field = DescriptorField(spec, mode)
    for cell in sorted(acc):
        if mode == "historical":
            h = acc[cell]
            field[cell] = FieldCell(h.counts, dmap.historical_descriptor(h))
        else:
            field[cell] = FieldCell(acc[cell], dmap.predicted_descriptor(acc[cell]))
    return field
