"""Cell-by-cell comparison of the graph model against the grid baseline."""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import EmptyOverlap, InvalidArgument, UndefinedResult
from .grid import rasterize_graph_model
from .metrics import (
    bhattacharyya,
    circular_correlation,
    circular_wasserstein,
    js_divergence,
    wasserstein_samples,
)

N_VALUE_BINS = 20
DATA_TYPES = ("entropy", "flow", "direction")
MODES = ("historical", "predicted")
SCALAR_METRICS = ("js", "bhattacharyya", "wasserstein")
DIRECTION_METRICS = ("wasserstein", "circular_correlation")
METRIC_LABELS = {
    "js": "JS Divergence",
    "bhattacharyya": "Bhattacharyya Distance",
    "wasserstein": "Wasserstein Distance",
    "circular_correlation": "Circular Correlation",
}


def metrics_for(data_type):
    return DIRECTION_METRICS if data_type == "direction" else SCALAR_METRICS


def value_histograms(a, b, n_bins=N_VALUE_BINS):
    """Histogram two scalar samples over ``n_bins`` uniform bins on their joint range."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    lo = min(a.min(), b.min())
    hi = max(a.max(), b.max())
    if hi <= lo:
        p = np.zeros(n_bins)
        p[0] = 1.0
        return p, p.copy()
    ha, _ = np.histogram(a, bins=n_bins, range=(lo, hi))
    hb, _ = np.histogram(b, bins=n_bins, range=(lo, hi))
    return ha / ha.sum(), hb / hb.sum()


def _scalar_metrics(a, b):
    p, q = value_histograms(a, b)
    return {
        "js": js_divergence(p, q),
        "bhattacharyya": bhattacharyya(p, q),
        "wasserstein": wasserstein_samples(a, b),
    }


@dataclass
class SceneReport:
    scene_id: str
    mode: str
    t_eval: float
    n_cells: int
    values: dict = field(default_factory=dict)  # data type -> metric -> float

    def to_dict(self):
        return {
            "scene_id": self.scene_id,
            "mode": self.mode,
            "t_eval": self.t_eval,
            "n_cells": self.n_cells,
            "values": self.values,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["scene_id"], d["mode"], d["t_eval"], d["n_cells"], d["values"])


def compare_fields(graph_field, grid_field, scene_id="", t_eval=None):
    """Metrics between two descriptor fields over the cells populated in both."""
    overlap = sorted(set(graph_field) & set(grid_field))
    if not overlap:
        raise EmptyOverlap("the two fields share no populated cell")
    g = [graph_field[c] for c in overlap]
    r = [grid_field[c] for c in overlap]
    values = {
        "entropy": _scalar_metrics([c.descriptor.entropy for c in g], [c.descriptor.entropy for c in r]),
        "flow": _scalar_metrics([c.descriptor.magnitude for c in g], [c.descriptor.magnitude for c in r]),
    }

    wdists = []
    for cg, cr in zip(g, r):
        sg, sr = cg.weights.sum(), cr.weights.sum()
        if sg > 0 and sr > 0:
            wdists.append(circular_wasserstein(cg.weights / sg, cr.weights / sr))
    dirs = [
        (cg.descriptor.dominant_direction, cr.descriptor.dominant_direction)
        for cg, cr in zip(g, r)
        if cg.descriptor.dominant_direction is not None and cr.descriptor.dominant_direction is not None
    ]
    try:
        corr = circular_correlation([d[0] for d in dirs], [d[1] for d in dirs])
    except (UndefinedResult, InvalidArgument):
        corr = math.nan
    values["direction"] = {
        "wasserstein": float(np.mean(wdists)) if wdists else math.nan,
        "circular_correlation": corr,
    }
    return SceneReport(str(scene_id), graph_field.mode, t_eval, len(overlap), values)


def evaluate_scene(dmap, grid_model, mode="historical", t_eval=None, scene_id=""):
    """Rasterise ``dmap`` onto the grid of ``grid_model`` and compare both fields."""
    if mode not in MODES:
        raise InvalidArgument(f"unknown mode {mode!r}")
    graph_field = rasterize_graph_model(dmap, grid_model.spec, mode, t_eval)
    grid_field = grid_model.field(mode, t_eval)
    return compare_fields(graph_field, grid_field, scene_id, t_eval)


@dataclass
class AggregateReport:
    n_scenes: int
    # (data type, mode) -> metric -> {"mean", "std", "n", "excluded"}
    rows: dict

    def row(self, data_type, mode):
        return self.rows[data_type, mode]

    def to_dict(self):
        return {
            "n_scenes": self.n_scenes,
            "rows": [
                {"data_type": dt, "mode": mode, "metrics": self.rows[dt, mode]}
                for dt in DATA_TYPES
                for mode in MODES
                if (dt, mode) in self.rows
            ],
        }

    def to_table(self):
        cols = ("js", "bhattacharyya", "wasserstein", "circular_correlation")
        header = ["Data Type", "Source"] + [METRIC_LABELS[c] for c in cols]
        lines = [" | ".join(header), " | ".join("-" * len(h) for h in header)]
        for dt in DATA_TYPES:
            for mode in MODES:
                if (dt, mode) not in self.rows:
                    continue
                stats = self.rows[dt, mode]
                cells = [dt.capitalize(), mode.capitalize()]
                for c in cols:
                    s = stats.get(c)
                    if s is None:
                        cells.append("--")
                    elif s["n"] == 0:
                        cells.append("n/a")
                    else:
                        txt = f"{s['mean']:.2f} ± {s['std']:.2f}"
                        if s["excluded"]:
                            txt += f" ({s['excluded']} excl.)"
                        cells.append(txt)
                lines.append(" | ".join(cells))
        return "\n".join(lines)


def aggregate(reports):
    """Mean and sample standard deviation of every metric across scene reports.

    Non-finite values (infinite Bhattacharyya distances, undefined
    correlations) are left out and counted under ``excluded``.
    """
    reports = list(reports)
    if not reports:
        raise InvalidArgument("need at least one scene report")
    grouped = {}
    for rep in reports:
        for dt, metrics in rep.values.items():
            for name, v in metrics.items():
                grouped.setdefault((dt, rep.mode), {}).setdefault(name, []).append(v)
    rows = {}
    for key, metrics in grouped.items():
        rows[key] = {}
        for name, vals in metrics.items():
            finite = [float(v) for v in vals if v is not None and math.isfinite(v)]
            n = len(finite)
            mean = float(np.mean(finite)) if n else math.nan
            std = float(np.std(finite, ddof=1)) if n > 1 else (0.0 if n == 1 else math.nan)
            rows[key][name] = {"mean": mean, "std": std, "n": n, "excluded": len(vals) - n}
    scenes = {r.scene_id for r in reports}
    return AggregateReport(len(scenes), rows)


def _json_safe(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_json_safe(v) for v in x]
    return x


def write_reports(reports, agg, table_path=None, records_path=None):
    if table_path is not None:
        with open(table_path, "w") as fh:
            fh.write(agg.to_table() + "\n")
    if records_path is not None:
        with open(records_path, "w") as fh:
            for rep in reports:
                fh.write(json.dumps(_json_safe(rep.to_dict()), sort_keys=True) + "\n")
            fh.write(json.dumps(_json_safe({"aggregate": agg.to_dict()}), sort_keys=True) + "\n")
