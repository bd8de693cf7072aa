import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import kmeans_brute_force_1d
from sgcgen.kmeans import kmeans


def test_two_locations_grouped_exactly():
    X = np.array([[0.0, 1.0]] * 5 + [[1.0, 0.0]] * 4)
    res = kmeans(X, 2, seed=3)
    assert res.inertia == pytest.approx(0.0, abs=1e-12)
    assert len(set(res.labels[:5])) == 1 and len(set(res.labels[5:])) == 1
    assert res.labels[0] != res.labels[5]


def test_identical_points():
    res = kmeans(np.ones((6, 3)), 2, seed=0)
    assert res.inertia == pytest.approx(0.0, abs=1e-12)
    assert set(res.labels.tolist()) == {0, 1}


@pytest.mark.parametrize("seed", range(5))
def test_one_dimensional_optimum(seed):
    x = np.random.default_rng(seed).normal(size=8) * 3
    res = kmeans(x[:, None], 2, restarts=10, seed=seed)
    assert res.inertia == pytest.approx(kmeans_brute_force_1d(x), abs=1e-9)


def test_too_few_points():
    with pytest.raises(ValueError):
        kmeans(np.zeros((2, 2)), 3)


def test_deterministic_under_seed():
    X = np.random.default_rng(1).normal(size=(200, 4))
    a, b = kmeans(X, 5, seed=11), kmeans(X, 5, seed=11)
    assert np.array_equal(a.labels, b.labels)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 6))
def test_objective_never_increases(seed, k):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(60, 3)) + rng.integers(0, 3, size=(60, 1))
    res = kmeans(X, k, restarts=2, seed=seed)
    h = np.array(res.history)
    assert np.all(np.diff(h) <= 1e-9 * max(1.0, h[0]))
    assert len(np.unique(res.labels)) == k
