import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from flowmap.exceptions import InvalidArgument
from flowmap.geometry import (
    CellKey,
    bin_center,
    bin_edge,
    canonical_angle,
    cell_center,
    hash_key,
    hash_keys,
    orientation_bin,
)

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


@pytest.mark.parametrize(
    "p, delta, expected",
    [
        ((0.3, 0.7, -0.2), 0.5, (0, 1, -1)),
        ((0.0, 0.0, 0.0), 1.0, (0, 0, 0)),
        ((0.1, 0.1, 0.1), 0.5, (0, 0, 0)),
        ((0.4, 0.4, 0.4), 0.5, (0, 0, 0)),
        ((-0.5, -0.5, -0.5), 0.5, (-1, -1, -1)),
        ((-0.0001, 0.5, 1.0), 0.5, (-1, 1, 2)),
    ],
)
def test_hash_key_examples(p, delta, expected):
    assert hash_key(p, delta) == CellKey(*expected)


@pytest.mark.parametrize("delta", [0.0, -1.0, math.inf, math.nan])
def test_hash_key_rejects_bad_resolution(delta):
    with pytest.raises(InvalidArgument):
        hash_key((0, 0, 0), delta)


@pytest.mark.parametrize("p", [(math.nan, 0, 0), (0, math.inf, 0), (0, 0)])
def test_hash_key_rejects_bad_position(p):
    with pytest.raises(InvalidArgument):
        hash_key(p, 0.5)


@given(st.tuples(finite, finite, finite), st.sampled_from([0.1, 0.25, 0.5, 1.0, 3.0]))
def test_point_inside_its_cell(p, delta):
    key = hash_key(p, delta)
    for c, k in zip(p, key):
        assert k * delta <= c + 1e-9 * max(1.0, abs(c))
        assert c < (k + 1) * delta + 1e-9 * max(1.0, abs(c))


def test_hash_keys_matches_scalar(rng):
    pts = rng.uniform(-50, 50, size=(200, 3))
    vec = hash_keys(pts, 0.5)
    assert [tuple(r) for r in vec.tolist()] == [tuple(hash_key(p, 0.5)) for p in pts]


def test_key_order_is_lexicographic():
    keys = [CellKey(1, 0, 0), CellKey(0, 0, 0), CellKey(0, 1, 0)]
    assert sorted(keys) == [CellKey(0, 0, 0), CellKey(0, 1, 0), CellKey(1, 0, 0)]


def test_cell_center():
    assert cell_center((0, 1, -1), 0.5) == (0.25, 0.75, -0.25)


@pytest.mark.parametrize(
    "theta, expected",
    [(0.0, 4), (-math.pi, 0), (math.pi / 4, 5), (math.pi, 0), (-math.pi / 4, 3), (3 * math.pi, 0)],
)
def test_orientation_bin_examples(theta, expected):
    assert orientation_bin(theta, 8) == expected


def test_orientation_bin_rejects_small_b():
    with pytest.raises(InvalidArgument):
        orientation_bin(0.0, 1)


def test_canonical_angle_range():
    assert canonical_angle(math.pi) == -math.pi
    assert canonical_angle(-math.pi) == -math.pi
    assert canonical_angle(2 * math.pi) == pytest.approx(0.0, abs=1e-15)


@given(st.floats(min_value=-100, max_value=100, allow_nan=False), st.integers(-5, 5), st.integers(2, 36))
def test_bin_is_periodic(theta, k, n_bins):
    wrapped = theta + 2 * math.pi * k
    # periodicity holds away from floating-point ties at bin edges
    frac = ((canonical_angle(theta) + math.pi) / (2 * math.pi / n_bins)) % 1.0
    if 1e-6 < frac < 1 - 1e-6:
        assert orientation_bin(theta, n_bins) == orientation_bin(wrapped, n_bins)


@pytest.mark.parametrize(
    "b, expected", [(4, math.pi / 8), (0, -7 * math.pi / 8), (7, 7 * math.pi / 8)]
)
def test_bin_center_examples(b, expected):
    assert bin_center(b, 8) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("n_bins", [2, 3, 8, 12, 16, 360])
def test_bin_center_round_trip(n_bins):
    for b in range(n_bins):
        assert orientation_bin(bin_center(b, n_bins), n_bins) == b


@pytest.mark.parametrize("n_bins", [2, 3, 8, 12, 16, 360])
def test_bin_edges_are_exact(n_bins):
    for k in range(n_bins):
        assert orientation_bin(bin_edge(k, n_bins), n_bins) == k
    for k in range(1, n_bins):
        below = math.nextafter(bin_edge(k, n_bins), -math.inf)
        assert orientation_bin(below, n_bins) == (k - 1) % n_bins


def test_bin_center_rejects_out_of_range():
    with pytest.raises(InvalidArgument):
        bin_center(8, 8)
    with pytest.raises(InvalidArgument):
        bin_center(-1, 8)
