import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from flowmap.exceptions import InvalidArgument, UndefinedResult
from flowmap.metrics import (
    bhattacharyya,
    circular_correlation,
    circular_wasserstein,
    js_divergence,
    wasserstein_1d,
    wasserstein_samples,
)


def transport_lp(p, q, cost):
    """Exact optimal transport cost by linear programming."""
    n = len(p)
    a_eq = []
    for i in range(n):
        row = np.zeros((n, n))
        row[i, :] = 1
        a_eq.append(row.ravel())
    for j in range(n):
        col = np.zeros((n, n))
        col[:, j] = 1
        a_eq.append(col.ravel())
    res = linprog(np.asarray(cost).ravel(), A_eq=np.array(a_eq), b_eq=np.concatenate([p, q]), bounds=(0, None), method="highs")
    assert res.success
    return res.fun


def linear_cost(values):
    v = np.asarray(values, dtype=float)
    return np.abs(v[:, None] - v[None, :])


def circular_cost(n):
    i = np.arange(n)
    d = np.abs(i[:, None] - i[None, :])
    return np.minimum(d, n - d) * (360.0 / n)


def js_oracle(p, q):
    m = [(a + b) / 2 for a, b in zip(p, q)]
    kl = lambda x: sum(xi * math.log2(xi / mi) for xi, mi in zip(x, m) if xi > 0)
    return 0.5 * kl(p) + 0.5 * kl(q)


def bhatt_oracle(p, q):
    bc = sum(math.sqrt(a * b) for a, b in zip(p, q))
    return math.inf if bc == 0 else -math.log(bc)


def random_dist(rng, n, sparse=False):
    w = rng.random(n)
    if sparse:
        w[rng.random(n) < 0.4] = 0
        if w.sum() == 0:
            w[rng.integers(n)] = 1
    return w / w.sum()


# -- closed forms ----------------------------------------------------------


def test_js_closed_form():
    assert js_divergence([1, 0], [0.5, 0.5]) == pytest.approx(0.311278124459133, abs=1e-12)
    assert js_divergence([1, 0], [0, 1]) == pytest.approx(1.0, abs=1e-12)
    assert js_divergence([0.3, 0.7], [0.3, 0.7]) == 0.0


def test_bhattacharyya_closed_form():
    assert bhattacharyya([1, 0], [0.5, 0.5]) == pytest.approx(math.log(2) / 2, abs=1e-12)
    assert bhattacharyya([1, 0], [0, 1]) == math.inf
    assert bhattacharyya([0.2, 0.8], [0.2, 0.8]) == pytest.approx(0.0, abs=1e-15)


def test_wasserstein_point_masses():
    p = np.zeros(6)
    q = np.zeros(6)
    p[0], q[5] = 1, 1
    assert wasserstein_1d(p, q) == pytest.approx(5.0, abs=1e-12)
    assert wasserstein_1d(p, p) == 0.0


def test_wasserstein_samples_point_masses():
    assert wasserstein_samples([0.0], [5.0]) == pytest.approx(5.0)
    assert wasserstein_samples([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0
    assert wasserstein_samples([0.0, 1.0], [0.0, 3.0]) == pytest.approx(1.0)


def test_circular_wasserstein_cases():
    e = np.eye(8)
    assert circular_wasserstein(e[0], e[2]) == pytest.approx(90.0, abs=1e-12)
    assert circular_wasserstein(e[0], e[4]) == pytest.approx(180.0, abs=1e-12)
    # wrapping the short way: bin 0 to bin 7 is one step
    assert circular_wasserstein(e[0], e[7]) == pytest.approx(45.0, abs=1e-12)
    assert circular_wasserstein(e[3], e[3]) == 0.0


def test_circular_correlation_signs():
    a = np.linspace(-1.0, 1.0, 20)
    assert circular_correlation(a, a) == pytest.approx(1.0)
    assert circular_correlation(a, -a) == pytest.approx(-1.0)
    assert circular_correlation(a, a + 0.7) == pytest.approx(1.0)


def test_circular_correlation_degenerate():
    with pytest.raises(UndefinedResult):
        circular_correlation([0.3, 0.3, 0.3], [0.1, 0.5, 0.9])
    with pytest.raises(InvalidArgument):
        circular_correlation([0.3], [0.1])


def test_input_validation():
    with pytest.raises(InvalidArgument):
        js_divergence([0.5, 0.5], [1.0])
    with pytest.raises(InvalidArgument):
        js_divergence([0.5, 0.6], [0.5, 0.5])
    with pytest.raises(InvalidArgument):
        bhattacharyya([1.5, -0.5], [0.5, 0.5])
    with pytest.raises(InvalidArgument):
        circular_wasserstein([1.0], [1.0])


# -- brute-force oracles on small cases --------------------------------------


def small_cases(seed=7, count=200):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(2, 6))
        sparse = bool(rng.integers(2))
        yield random_dist(rng, n, sparse), random_dist(rng, n, sparse)


def test_js_and_bhattacharyya_match_direct_formula():
    for p, q in small_cases():
        assert js_divergence(p, q) == pytest.approx(js_oracle(p, q), abs=1e-9)
        bo = bhatt_oracle(p, q)
        if math.isinf(bo):
            assert bhattacharyya(p, q) == math.inf
        else:
            assert bhattacharyya(p, q) == pytest.approx(bo, abs=1e-9)


def test_wasserstein_matches_lp():
    rng = np.random.default_rng(3)
    for p, q in small_cases(count=120):
        values = np.sort(rng.uniform(-5, 5, p.size))
        assert wasserstein_1d(p, q) == pytest.approx(transport_lp(p, q, linear_cost(np.arange(p.size))), abs=1e-9)
        assert wasserstein_1d(p, q, values) == pytest.approx(transport_lp(p, q, linear_cost(values)), abs=1e-9)


def test_circular_wasserstein_matches_lp():
    for p, q in small_cases(seed=11, count=120):
        assert circular_wasserstein(p, q) == pytest.approx(transport_lp(p, q, circular_cost(p.size)), abs=1e-9)


def test_circular_wasserstein_matches_lp_eight_bins():
    rng = np.random.default_rng(5)
    for _ in range(40):
        p, q = random_dist(rng, 8, True), random_dist(rng, 8, True)
        assert circular_wasserstein(p, q) == pytest.approx(transport_lp(p, q, circular_cost(8)), abs=1e-9)


# -- bounds and symmetry -----------------------------------------------------


def test_bounds_and_symmetry_on_many_pairs():
    rng = np.random.default_rng(2024)
    for _ in range(10_000):
        n = int(rng.integers(2, 9))
        p, q = random_dist(rng, n, True), random_dist(rng, n, True)
        js = js_divergence(p, q)
        assert 0.0 <= js <= 1.0 and js == pytest.approx(js_divergence(q, p), abs=1e-12)
        b = bhattacharyya(p, q)
        assert b >= 0.0 and (b == bhattacharyya(q, p) or b == pytest.approx(bhattacharyya(q, p), abs=1e-12))
        w = wasserstein_1d(p, q)
        assert 0.0 <= w <= n - 1 and w == pytest.approx(wasserstein_1d(q, p), abs=1e-12)
        cw = circular_wasserstein(p, q)
        assert 0.0 <= cw <= 180.0 and cw == pytest.approx(circular_wasserstein(q, p), abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=8), st.integers(0, 7))
def test_circular_wasserstein_rotation_invariant(w, k):
    p = np.array(w) / np.sum(w)
    q = np.roll(p[::-1], 1)
    assert circular_wasserstein(np.roll(p, k), np.roll(q, k)) == pytest.approx(circular_wasserstein(p, q), abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=8))
def test_identity_gives_zero(w):
    p = np.array(w) / np.sum(w)
    assert js_divergence(p, p) == pytest.approx(0.0, abs=1e-12)
    assert bhattacharyya(p, p) == pytest.approx(0.0, abs=1e-12)
    assert wasserstein_1d(p, p) == 0.0
    assert circular_wasserstein(p, p) == 0.0
