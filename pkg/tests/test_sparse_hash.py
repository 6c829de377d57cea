import math

import numpy as np

from flowmap.geometry import CellKey, hash_key
from flowmap.histogram import DirectionalHistogram
from flowmap.sparse_hash import SparseHashMap


def test_first_write_allocates():
    m = SparseHashMap(0.5, 8)
    m.upsert_observation((0.1, 0.1, 0.0), 0.0, 1.0)
    assert m.occupied_count() == 1


def test_same_cell_twice():
    m = SparseHashMap(0.5, 8)
    k1 = m.upsert_observation((0.1, 0.1, 0.0), 0.0, 1.0)
    k2 = m.upsert_observation((0.4, 0.3, 0.1), 1.0, 2.0)
    assert k1 == k2
    assert m.occupied_count() == 1
    assert m.lookup(k1).histogram.total == 2


def test_far_apart_observations_allocate_two_cells():
    m = SparseHashMap(0.5, 8)
    m.upsert_observation((0, 0, 0), 0.0, 0.0)
    m.upsert_observation((1000, 0, 0), 0.0, 0.0)
    assert m.occupied_count() == 2


def test_zero_weight_on_new_cell_allocates_nothing():
    m = SparseHashMap(0.5, 8)
    m.upsert_observation((0, 0, 0), 0.0, 0.0, weight=0.0)
    assert m.occupied_count() == 0


def test_lookup_and_remove():
    m = SparseHashMap(0.5, 8)
    assert m.lookup(CellKey(3, 3, 3)) is None
    assert m.occupied_count() == 0
    key = m.upsert_observation((1.6, 1.6, 1.6), 0.0, 5.0)
    assert key == CellKey(3, 3, 3)
    assert m.lookup(key).histogram.counts[4] == 1
    cell = m.remove_cell(key)
    assert cell.histogram.total == 1
    assert m.remove_cell(key) is None
    assert m.lookup(key) is None
    assert m.occupied_count() == 0
    m.upsert_observation((1.6, 1.6, 1.6), 0.0, 9.0)
    fresh = m.lookup(key)
    assert fresh.histogram.total == 1 and fresh.created_t == 9.0


def test_removal_decrements_count(rng):
    m = SparseHashMap(0.5, 8)
    for p in rng.uniform(-20, 20, size=(100, 3)):
        m.upsert_observation(p, 0.0, 0.0)
    n = m.occupied_count()
    for i, key in enumerate(m.keys_ordered()[:10], start=1):
        m.remove_cell(key)
        assert m.occupied_count() == n - i


def test_keys_ordered():
    m = SparseHashMap(1.0, 8)
    assert m.keys_ordered() == []
    for p in [(1.5, 0.5, 0.5), (0.5, 0.5, 0.5), (0.5, 1.5, 0.5)]:
        m.upsert_observation(p, 0.0, 0.0)
    assert m.keys_ordered() == [(0, 0, 0), (0, 1, 0), (1, 0, 0)]


def test_keys_ordered_independent_of_insertion_order(rng):
    pts = rng.uniform(-30, 30, size=(200, 3))
    a, b = SparseHashMap(0.5, 8), SparseHashMap(0.5, 8)
    for p in pts:
        a.upsert_observation(p, 0.0, 0.0)
    for p in pts[::-1]:
        b.upsert_observation(p, 0.0, 0.0)
    assert a.keys_ordered() == b.keys_ordered()


def test_occupied_count_matches_distinct_keys(rng):
    m = SparseHashMap(0.5, 8)
    pts = rng.uniform(-1e6, 1e6, size=(2000, 3))
    pts = np.vstack([pts, pts[:500] + 0.01])
    for p in pts:
        m.upsert_observation(p, 0.0, 0.0)
    assert m.occupied_count() == len({tuple(hash_key(p, 0.5)) for p in pts})


def test_deposit_merges():
    m = SparseHashMap(0.5, 8)
    m.upsert_observation((0, 0, 0), 0.0, 1.0)
    h = DirectionalHistogram(counts=[0, 0, 0, 0, 2, 0, 0, 0], first_t=0.5, last_t=3.0)
    m.deposit((0, 0, 0), h, created_t=10.0)
    cell = m.lookup((0, 0, 0))
    assert cell.histogram.counts[4] == 3
    assert (cell.histogram.first_t, cell.histogram.last_t) == (0.5, 3.0)
    assert cell.created_t == 1.0


def test_snapshot_round_trip(tmp_path, rng):
    m = SparseHashMap(0.25, 12)
    for p, th, t in zip(rng.uniform(-5, 5, (300, 3)), rng.uniform(-math.pi, math.pi, 300), np.sort(rng.uniform(0, 100, 300))):
        m.upsert_observation(p, th, t, weight=float(rng.integers(1, 4)))
    path = tmp_path / "map.jsonl"
    m.save(path)
    back = SparseHashMap.load(path)
    assert back.delta == m.delta and back.n_bins == m.n_bins
    assert back.keys_ordered() == m.keys_ordered()
    for k in m.keys_ordered():
        assert back.lookup(k).histogram == m.lookup(k).histogram
        assert back.lookup(k).created_t == m.lookup(k).created_t
