import numpy as np
import pytest

from flowmap.engine import DynamicsMap
from flowmap.exceptions import InvalidArgument, NotFound
from flowmap.nav_graph import NavGraph, TopologyEvent
from flowmap.simulator import default_scene, generate_scene, inject_topology_events, scene_graph


@pytest.fixture(scope="module")
def scene():
    cfg = default_scene(duration=300.0, seed=2)
    return cfg, generate_scene(cfg)


def _build(cfg, stream, events=()):
    g = scene_graph(cfg, 1.0)
    dmap = DynamicsMap(periods=[300.0, 150.0, 75.0], graph=g)
    if events == "auto":
        events = inject_topology_events(7, g, 0.3, t_min=60.0, t_max=cfg.duration)
    return dmap.replay(stream.as_array(), events, t_end=cfg.duration)


def test_replay_conserves_weight(scene):
    cfg, stream = scene
    dmap = _build(cfg, stream, "auto")
    assert dmap.owned_total() == len(stream) == dmap.weight_in


def test_replay_binds_cells_to_nodes(scene):
    cfg, stream = scene
    dmap = _build(cfg, stream)
    kinds = {h.kind for h in dmap.holders()}
    assert kinds == {"node", "cell"}


def test_replay_is_byte_identical(scene, tmp_path):
    cfg, stream = scene
    _build(cfg, stream, "auto").save(tmp_path / "a.json")
    _build(cfg, stream, "auto").save(tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_snapshot_round_trip(scene, tmp_path):
    cfg, stream = scene
    dmap = _build(cfg, stream, "auto")
    dmap.save(tmp_path / "m.json")
    back = DynamicsMap.load(tmp_path / "m.json")
    assert back.to_dict() == dmap.to_dict()
    for h in dmap.holders():
        assert np.array_equal(back.predict_location(h.channel, 250.0), dmap.predict_location(h.channel, 250.0))


def test_channels_cover_all_holders(scene):
    cfg, stream = scene
    dmap = _build(cfg, stream, "auto")
    channels = [h.channel for h in dmap.holders()]
    assert len(channels) == len(set(channels))
    assert sorted(channels) == dmap.model.locations()


def test_removed_node_history_reappears_in_hash_space():
    g = NavGraph()
    g.insert_node(0, (0.25, 0.25, 0.0))
    dmap = DynamicsMap(delta=0.5, tau=20.0, bind_radius=0.5, periods=[100.0], graph=g)
    for k in range(100):
        dmap.observe((0.2, 0.2, 0.0), 0.0, float(k))
    assert g.nodes[0].owned_dynamics is not None
    before = g.nodes[0].owned_dynamics.copy()
    dmap.apply_event(TopologyEvent(100.0, "reposition", 0, (3.1, 3.1, 0.0)))
    dmap.apply_event(TopologyEvent(101.0, "remove", 0))
    dmap.finalize(110.0)
    assert dmap.histogram_at((3.2, 3.2, 0.0)) == before
    assert dmap.predict_at((3.2, 3.2, 0.0), 50.0).shape == (8,)
    assert dmap.owned_total() == 100


def test_observations_must_be_ordered():
    dmap = DynamicsMap(periods=[100.0])
    dmap.observe((0, 0, 0), 0.0, 5.0)
    with pytest.raises(InvalidArgument):
        dmap.observe((0, 0, 0), 0.0, 4.0)


def test_unknown_queries():
    dmap = DynamicsMap(periods=[100.0]).finalize(0.0)
    with pytest.raises(NotFound):
        dmap.histogram_at((1.0, 1.0, 1.0))
    with pytest.raises(NotFound):
        dmap.predict_at((1.0, 1.0, 1.0), 0.0)
    with pytest.raises(NotFound):
        dmap.predict_node(3, 0.0)


def test_node_descriptors(scene):
    cfg, stream = scene
    dmap = _build(cfg, stream)
    hist = dmap.node_descriptors("historical")
    pred = dmap.node_descriptors("predicted", 150.0)
    assert set(hist) == set(dmap.graph.ids())
    with_dyn = [i for i in dmap.graph.ids() if dmap.graph.nodes[i].owned_dynamics is not None]
    assert with_dyn and all(hist[i] is not None and pred[i] is not None for i in with_dyn)
    with pytest.raises(InvalidArgument):
        dmap.node_descriptors("later")
