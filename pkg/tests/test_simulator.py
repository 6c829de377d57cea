import math

import numpy as np
import pytest

from flowmap.exceptions import InvalidArgument, ParseError
from flowmap.simulator import (
    AgentRoute,
    ObservationStream,
    SceneConfig,
    default_scene,
    generate_dataset,
    generate_scene,
    inject_topology_events,
    scene_graph,
)


def _straight_scene(**kw):
    route = AgentRoute([(0.0, 0.0), (100.0, 0.0)], speed=1.0, period=100.0, duty=0.5, noise=0.0)
    for k, v in kw.items():
        setattr(route, k, v)
    return SceneConfig("s", duration=200.0, dt=1.0, regions=[(0, -1, 100, 1)], routes=[route], seed=3)


def test_same_seed_same_stream():
    cfg = default_scene(duration=120.0, seed=11)
    assert generate_scene(cfg) == generate_scene(cfg)


def test_duty_cycle_window():
    s = generate_scene(_straight_scene())
    local = s.t % 100.0
    assert np.all(local < 50.0)
    assert len(s) == 100


def test_constant_heading_on_straight_route():
    s = generate_scene(_straight_scene())
    assert np.all(s.theta == 0.0)
    assert np.allclose(s.xyz[:, 1], 0.0) and np.all(s.xyz[:, 2] == 0.0)


def test_route_reverses_at_the_end():
    s = generate_scene(_straight_scene(duty=1.0, period=400.0))
    back = s.theta[s.t > 100.0]
    assert np.allclose(np.abs(back), math.pi)


def test_noise_is_planar():
    s = generate_scene(_straight_scene(noise=0.05))
    assert np.all(s.xyz[:, 2] == 0.0)
    assert 0.02 < np.std(s.xyz[:, 1]) < 0.08


def test_dataset_scenes_differ_and_are_reproducible():
    a = generate_dataset(3, default_scene(duration=60.0), master_seed=1)
    b = generate_dataset(3, default_scene(duration=60.0), master_seed=1)
    assert [c.seed for c, _ in a] == [c.seed for c, _ in b]
    assert all(sa == sb for (_, sa), (_, sb) in zip(a, b))
    assert len({c.seed for c, _ in a}) == 3
    assert [c.scene_id for c, _ in a] == ["scene-000", "scene-001", "scene-002"]
    assert len({len(s) for _, s in a}) > 1 or not all(np.array_equal(a[0][1].xyz, s.xyz) for _, s in a[1:])


def test_default_scene_has_six_agents():
    cfg = default_scene(duration=600.0)
    s = generate_scene(cfg)
    assert len(cfg.routes) == 6
    assert set(np.unique(s.agent)) == set(range(6))
    xmin, ymin, xmax, ymax = cfg.bounds()
    assert np.all((s.xyz[:, 0] > xmin) & (s.xyz[:, 0] < xmax))
    assert np.all((s.xyz[:, 1] > ymin) & (s.xyz[:, 1] < ymax))


def test_invalid_routes():
    with pytest.raises(InvalidArgument):
        generate_scene(_straight_scene(duty=0.0))
    with pytest.raises(InvalidArgument):
        generate_scene(_straight_scene(waypoints=[(0, 0)]))
    with pytest.raises(InvalidArgument):
        generate_dataset(0)


def test_stream_round_trip(tmp_path):
    s = generate_scene(default_scene(duration=30.0))
    s.save(tmp_path / "s.csv")
    assert ObservationStream.load(tmp_path / "s.csv") == s


def test_stream_parse_errors(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("t,agent,x,y,z,theta\n0.0,0,1,2,0,0.1\n1.0,0,abc,2,0,0.1\n")
    with pytest.raises(ParseError, match="line 3"):
        ObservationStream.load(p)
    p.write_text("t,agent,x,y,z,theta\n5.0,0,1,2,0,0.1\n1.0,0,1,2,0,0.1\n")
    with pytest.raises(ParseError, match="line 3"):
        ObservationStream.load(p)


def test_scene_config_round_trip(tmp_path):
    cfg = default_scene(duration=300.0, seed=5)
    cfg.save(tmp_path / "c.json")
    back = SceneConfig.load(tmp_path / "c.json")
    assert generate_scene(back) == generate_scene(cfg)


def test_scene_graph_and_events():
    cfg = default_scene()
    g = scene_graph(cfg, 1.0)
    assert len(g) > 50 and len(g.edges()) > len(g)
    evs = inject_topology_events(4, g, 0.2, t_min=60.0, t_max=1200.0)
    assert len(evs) == round(0.2 * len(g))
    assert [e.t for e in evs] == sorted(e.t for e in evs)
    assert all(60.0 <= e.t <= 1200.0 and e.kind in ("remove", "reposition") for e in evs)
    assert evs == inject_topology_events(4, g, 0.2, t_min=60.0, t_max=1200.0)
    assert inject_topology_events(4, g, 0.0) == []
