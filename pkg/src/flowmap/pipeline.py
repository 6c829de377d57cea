"""File-based pipeline stages: simulate, build, evaluate, plan."""

import json
import logging
import os
from dataclasses import asdict, dataclass, fields

from .engine import DynamicsMap
from .evaluation import MODES, aggregate, evaluate_scene, write_reports
from .exceptions import InvalidArgument, ParseError
from .fremen import candidate_ladder
from .grid import GridModel, GridSpec, rasterize_graph_model
from .nav_graph import NavGraph, load_events, save_events
from .planner import PlannerWeights, plan
from .simulator import (
    ObservationStream,
    SceneConfig,
    default_scene,
    generate_dataset,
    inject_topology_events,
    scene_graph,
)

log = logging.getLogger(__name__)

SCENE_FILE = "scene.json"
STREAM_FILE = "stream.csv"
GRAPH_FILE = "graph.json"
EVENTS_FILE = "events.csv"
MODEL_FILE = "model.json"
GRID_FILE = "grid.json"


@dataclass
class RunConfig:
    delta: float = 0.5
    n_bins: int = 8
    d_max: float = 1.0
    tau: float = 60.0
    bind_radius: float = None
    periods: tuple = None
    order: int = 2
    update_interval: float = 10.0
    t_floor: float = 1.0
    eps_dir: float = 0.05
    grid_resolution: float = 0.5
    node_spacing: float = 1.0
    w_entropy: float = 1.0
    w_flow: float = 1.0
    w_direction: float = 1.0
    n_scenes: int = 20
    duration: float = 1200.0
    event_density: float = 0.0
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        for name in ("delta", "d_max", "update_interval", "t_floor", "grid_resolution", "node_spacing", "duration"):
            if not getattr(self, name) > 0:
                raise InvalidArgument(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.tau < 0:
            raise InvalidArgument("tau must be non-negative")
        if int(self.n_bins) != self.n_bins or self.n_bins < 2:
            raise InvalidArgument("n_bins must be an integer >= 2")
        if self.n_scenes < 1:
            raise InvalidArgument("n_scenes must be at least 1")
        if not 0 <= self.event_density <= 1:
            raise InvalidArgument("event_density must lie in [0, 1]")
        if self.bind_radius is not None and not self.bind_radius > 0:
            raise InvalidArgument("bind_radius must be positive")
        self.weights()

    @property
    def effective_bind_radius(self):
        return self.d_max if self.bind_radius is None else self.bind_radius

    def candidate_periods(self, duration=None):
        if self.periods:
            return tuple(self.periods)
        return candidate_ladder(duration or self.duration)

    def weights(self):
        return PlannerWeights(self.w_entropy, self.w_flow, self.w_direction)

    @classmethod
    def from_file(cls, path):
        with open(path) as fh:
            try:
                d = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(exc.msg, exc.lineno) from None
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InvalidArgument(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self):
        return asdict(self)


def build_models(scene, stream, cfg, graph=None, events=()):
    """Replay one scene into a graph-based map and the dense grid baseline."""
    periods = cfg.candidate_periods(scene.duration)
    graph = graph if graph is not None else NavGraph()
    dmap = DynamicsMap(
        delta=cfg.delta,
        n_bins=cfg.n_bins,
        tau=cfg.tau,
        bind_radius=cfg.effective_bind_radius,
        periods=periods,
        order=cfg.order,
        update_interval=cfg.update_interval,
        t_floor=cfg.t_floor,
        eps_dir=cfg.eps_dir,
        graph=graph,
    )
    obs = stream.as_array()
    dmap.replay(obs, events, t_end=scene.duration)
    spec = GridSpec.from_bounds(*scene.bounds(), resolution=cfg.grid_resolution)
    grid = GridModel(
        spec,
        cfg.n_bins,
        periods=periods,
        order=cfg.order,
        update_interval=cfg.update_interval,
        t_floor=cfg.t_floor,
        eps_dir=cfg.eps_dir,
    )
    grid.replay(obs, t_end=scene.duration)
    return dmap, grid


def scene_dirs(root):
    return sorted(
        os.path.join(root, d) for d in os.listdir(root) if os.path.isfile(os.path.join(root, d, SCENE_FILE))
    )


def run_simulate(cfg, out_dir):
    """Write scene config, stream, graph and topology events for every scene."""
    os.makedirs(out_dir, exist_ok=True)
    template = default_scene(duration=cfg.duration)
    written = []
    for scene, stream in generate_dataset(cfg.n_scenes, template, cfg.seed):
        d = os.path.join(out_dir, scene.scene_id)
        os.makedirs(d, exist_ok=True)
        scene.save(os.path.join(d, SCENE_FILE))
        stream.save(os.path.join(d, STREAM_FILE))
        graph = scene_graph(scene, cfg.node_spacing)
        graph.save(os.path.join(d, GRAPH_FILE))
        events = inject_topology_events(
            scene.seed, graph, cfg.event_density, t_min=cfg.tau, t_max=scene.duration
        )
        save_events(events, os.path.join(d, EVENTS_FILE))
        log.info("simulated %s: %d observations, %d nodes", scene.scene_id, len(stream), len(graph))
        written.append(d)
    return written


def run_build(cfg, scene_dir):
    """Build and save the graph model and the grid baseline for one scene directory."""
    scene = SceneConfig.load(os.path.join(scene_dir, SCENE_FILE))
    stream = ObservationStream.load(os.path.join(scene_dir, STREAM_FILE))
    graph_path = os.path.join(scene_dir, GRAPH_FILE)
    graph = NavGraph.load(graph_path) if os.path.exists(graph_path) else None
    events_path = os.path.join(scene_dir, EVENTS_FILE)
    events = load_events(events_path) if os.path.exists(events_path) else []
    dmap, grid = build_models(scene, stream, cfg, graph, events)
    dmap.save(os.path.join(scene_dir, MODEL_FILE))
    grid.save(os.path.join(scene_dir, GRID_FILE))
    log.info("built %s: %d holders, %d grid cells used", scene.scene_id, len(dmap.holders()), len(grid.occupied_cells()))
    return dmap, grid


def evaluate_dirs(dirs, modes=MODES):
    reports = []
    for d in dirs:
        scene = SceneConfig.load(os.path.join(d, SCENE_FILE))
        dmap = DynamicsMap.load(os.path.join(d, MODEL_FILE))
        grid = GridModel.load(os.path.join(d, GRID_FILE))
        for mode in modes:
            t_eval = scene.duration if mode == "predicted" else None
            reports.append(evaluate_scene(dmap, grid, mode, t_eval, scene_id=scene.scene_id))
    return reports


def run_evaluate(dirs, out_dir=None, modes=MODES):
    reports = evaluate_dirs(dirs, modes)
    agg = aggregate(reports)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_reports(reports, agg, os.path.join(out_dir, "table.txt"), os.path.join(out_dir, "scenes.jsonl"))
        for d in dirs:
            dmap = DynamicsMap.load(os.path.join(d, MODEL_FILE))
            grid = GridModel.load(os.path.join(d, GRID_FILE))
            name = os.path.basename(os.path.normpath(d))
            grid.historical_field().dump(os.path.join(out_dir, f"{name}_grid_historical.csv"))
            rasterize_graph_model(dmap, grid.spec).dump(os.path.join(out_dir, f"{name}_graph_historical.csv"))
    return reports, agg


def run_plan(cfg, dmap, start, goal, mode="historical", t=None):
    """Weighted plan and the zero-weight baseline, plus overlay rows for plotting."""
    descriptors = dmap.node_descriptors(mode, t)
    weighted = plan(dmap.graph, start, goal, cfg.weights(), descriptors)
    baseline = plan(dmap.graph, start, goal, PlannerWeights.zero(), descriptors)
    overlay = []
    for label, p in (("temporal", weighted), ("baseline", baseline)):
        for order, node_id in enumerate(p.path):
            x, y, z = dmap.graph.nodes[node_id].position
            overlay.append({"path": label, "order": order, "node": node_id, "x": x, "y": y, "z": z})
    return {"plan": weighted.to_dict(), "baseline": baseline.to_dict(), "overlay": overlay}
