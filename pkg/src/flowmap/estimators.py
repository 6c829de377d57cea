"""scikit-learn style estimators wrapping the graph map and the grid baseline.

Both take observations as an ``(n, 5)`` array of ``t, x, y, z, theta`` rows.
``predict`` maps ``(t, x, y, z)`` queries to per-bin predicted activity;
``transform`` maps ``(x, y, z)`` positions (or observation rows) to historical descriptors
``[flow_magnitude, dominant_direction, resultant_length, entropy]``.
Locations without stored dynamics yield rows of NaN.
"""

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .engine import DynamicsMap
from .exceptions import NotFound, OutOfBounds
from .fremen import candidate_ladder
from .grid import GridModel, GridSpec
from .nav_graph import NavGraph, build_graph
from .validation import check_node_positions, check_observations, check_points, check_positions


def _descriptor_row(d):
    direction = math.nan if d.dominant_direction is None else d.dominant_direction
    return [d.magnitude, direction, d.resultant_length, d.entropy]


def _periods(periods, X, t_end):
    if periods is not None:
        return tuple(periods)
    span = t_end if t_end is not None else (float(X[-1, 0]) if len(X) else 1.0)
    return candidate_ladder(max(span, 1.0))


class FlowGraphMap(TransformerMixin, BaseEstimator):
    """Graph-based map of dynamics.

    Parameters
    ----------
    delta : float, default=0.5
        Hash cell size in meters.
    n_bins : int, default=8
    d_max : float, default=1.0
        Association distance; also the binding radius unless ``bind_radius`` is set.
    tau : float, default=60.0
        Stability window in seconds.
    bind_radius : float or None
    periods : sequence of float or None
        Candidate periods; defaults to a ladder over the observed span.
    order : int, default=2
    update_interval : float, default=10.0
    t_floor : float, default=1.0
    eps_dir : float, default=0.05
    n_neighbors : int, default=4
        Edges per node when ``fit`` receives bare node positions.
    """

    def __init__(
        self,
        delta=0.5,
        n_bins=8,
        d_max=1.0,
        tau=60.0,
        bind_radius=None,
        periods=None,
        order=2,
        update_interval=10.0,
        t_floor=1.0,
        eps_dir=0.05,
        n_neighbors=4,
    ):
        self.delta = delta
        self.n_bins = n_bins
        self.d_max = d_max
        self.tau = tau
        self.bind_radius = bind_radius
        self.periods = periods
        self.order = order
        self.update_interval = update_interval
        self.t_floor = t_floor
        self.eps_dir = eps_dir
        self.n_neighbors = n_neighbors

    def fit(self, X, y=None, graph=None, events=(), t_end=None):
        """Replay observations (and optional topology events) into a fresh map.

        ``graph`` may be a :class:`NavGraph` or an ``(m, 3)`` array of node positions.
        """
        X = check_observations(X)
        if graph is None:
            graph = NavGraph()
        elif not isinstance(graph, NavGraph):
            graph = build_graph(check_node_positions(graph), k=self.n_neighbors)
        self.map_ = DynamicsMap(
            delta=self.delta,
            n_bins=self.n_bins,
            tau=self.tau,
            bind_radius=self.d_max if self.bind_radius is None else self.bind_radius,
            periods=_periods(self.periods, X, t_end),
            order=self.order,
            update_interval=self.update_interval,
            t_floor=self.t_floor,
            eps_dir=self.eps_dir,
            graph=graph,
        ).replay(X, events, t_end)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "map_")
        X = check_points(X, 4, "(t, x, y, z)")
        out = np.full((len(X), self.map_.n_bins), np.nan)
        for i, (t, x, y, z) in enumerate(X):
            try:
                out[i] = self.map_.predict_at((x, y, z), t)
            except NotFound:
                pass
        return out

    def transform(self, X):
        check_is_fitted(self, "map_")
        X = check_positions(X)
        out = np.full((len(X), 4), np.nan)
        for i, p in enumerate(X):
            try:
                out[i] = _descriptor_row(self.map_.historical_descriptor(self.map_.histogram_at(p)))
            except NotFound:
                pass
        return out

    def predict_descriptors(self, X):
        """Predicted descriptors for ``(t, x, y, z)`` queries."""
        vecs = self.predict(X)
        out = np.full((len(vecs), 4), np.nan)
        for i, v in enumerate(vecs):
            if not np.isnan(v).any():
                out[i] = _descriptor_row(self.map_.predicted_descriptor(v))
        return out


class GridFlowMap(TransformerMixin, BaseEstimator):
    """Dense grid map of dynamics (the comparison baseline).

    Parameters
    ----------
    resolution : float, default=0.5
    bounds : tuple (xmin, ymin, xmax, ymax) or None
        Grid extent; defaults to the bounding box of the fitted observations.
    """

    def __init__(
        self,
        resolution=0.5,
        bounds=None,
        n_bins=8,
        periods=None,
        order=2,
        update_interval=10.0,
        t_floor=1.0,
        eps_dir=0.05,
    ):
        self.resolution = resolution
        self.bounds = bounds
        self.n_bins = n_bins
        self.periods = periods
        self.order = order
        self.update_interval = update_interval
        self.t_floor = t_floor
        self.eps_dir = eps_dir

    def fit(self, X, y=None, t_end=None):
        X = check_observations(X)
        if self.bounds is not None:
            spec = GridSpec.from_bounds(*self.bounds, resolution=self.resolution)
        else:
            lo = X[:, 1:3].min(axis=0)
            hi = X[:, 1:3].max(axis=0) + self.resolution
            spec = GridSpec.from_bounds(lo[0], lo[1], hi[0], hi[1], resolution=self.resolution)
        self.grid_ = GridModel(
            spec,
            self.n_bins,
            periods=_periods(self.periods, X, t_end),
            order=self.order,
            update_interval=self.update_interval,
            t_floor=self.t_floor,
            eps_dir=self.eps_dir,
        ).replay(X, t_end)
        self.n_features_in_ = X.shape[1]
        return self

    def _cell(self, p):
        return self.grid_.spec.index_of(p)

    def predict(self, X):
        check_is_fitted(self, "grid_")
        X = check_points(X, 4, "(t, x, y, z)")
        out = np.full((len(X), self.grid_.n_bins), np.nan)
        for i, (t, x, y, z) in enumerate(X):
            try:
                out[i] = self.grid_.grid_predict(self._cell((x, y)), t)
            except (NotFound, OutOfBounds):
                pass
        return out

    def transform(self, X):
        check_is_fitted(self, "grid_")
        X = check_positions(X)
        out = np.full((len(X), 4), np.nan)
        field = self.grid_.historical_field()
        for i, p in enumerate(X):
            try:
                cell = field.get(self._cell(p))
            except OutOfBounds:
                continue
            if cell is not None:
                out[i] = _descriptor_row(cell.descriptor)
        return out
