import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import log_likelihood_pairs, modularity_dense
from sgcgen.graph import Graph, largest_connected_component
from sgcgen.sbm import Partition, SbmParams, generate_sbm
from sgcgen.selection import (ModularOperator, SelectionConfig, detection_loss, mismatch_r1,
                              mismatch_r2, mismatch_r3, mismatch_r4, modularity,
                              sbm_log_likelihood, select)


@pytest.mark.parametrize("theta, expected", [(0, 1.0), (1, math.exp(-1)), (-1, math.e)])
def test_detection_loss(theta, expected):
    assert detection_loss(theta, 2) == pytest.approx(expected)


@given(st.floats(-5, 5).filter(lambda t: t == 0 or abs(t) > 1e-12), st.integers(2, 20))
def test_loss_above_one_iff_theta_negative(theta, K):
    f = detection_loss(theta, K)
    assert (f > 1) == (theta < 0)


# --- R1 --------------------------------------------------------------------------

def test_r1_complete_graph_is_zero(k4):
    for labels in ([0, 0, 1, 1], [0, 1, 1, 1]):
        assert mismatch_r1(k4, Partition(k4, labels)) == pytest.approx(0.0, abs=1e-10)


def test_r1_two_triangles_is_zero(two_triangles):
    assert mismatch_r1(*two_triangles) == pytest.approx(0.0, abs=1e-10)


def test_r1_bridged_matches_dense(bridged_triangles):
    g, part = bridged_triangles
    B = np.array([[float(i != j and ((i < 3) == (j < 3) or (i, j) in [(2, 3), (3, 2)])) for j in range(6)]
                  for i in range(6)])
    P = np.where(np.equal.outer(np.arange(6) < 3, np.arange(6) < 3), 1.0, 1 / 9)
    B -= P
    np.fill_diagonal(B, 0)
    assert np.allclose(ModularOperator(g, part).dense(), B)
    oracle = np.abs(np.linalg.eigvalsh(B)).max()
    assert mismatch_r1(g, part) == pytest.approx(oracle, rel=1e-6)


def test_r1_nonnegative_and_matches_dense_on_random_graphs():
    rng = np.random.default_rng(4)
    for _ in range(5):
        n = int(rng.integers(10, 60))
        g, _ = generate_sbm(SbmParams((n // 2, n - n // 2), [[0.4, 0.1], [0.1, 0.3]]), int(rng.integers(1 << 30)))
        part = Partition.from_any_labels(g, rng.integers(0, 3, n))
        B = ModularOperator(g, part).dense()
        r1 = mismatch_r1(g, part)
        assert r1 >= 0
        assert r1 == pytest.approx(np.abs(np.linalg.eigvalsh(B)).max(), rel=1e-5)


# --- R2 --------------------------------------------------------------------------

def test_r2_two_triangles(two_triangles):
    assert mismatch_r2(*two_triangles) == pytest.approx(-0.5)


def test_r2_complete_graph_split(k4):
    assert mismatch_r2(k4, Partition(k4, [0, 0, 1, 1])) == pytest.approx(1 / 6)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_modularity_forms_agree(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 65))
    p = rng.uniform(0.05, 0.6)
    g, _ = generate_sbm(SbmParams((n // 2, n - n // 2), [[p, p / 2], [p / 2, p]]), seed)
    if g.m == 0:
        return
    part = Partition.from_any_labels(g, rng.integers(0, int(rng.integers(2, 6)), n))
    q = modularity(g, part)
    assert -1 <= q <= 1
    assert q == pytest.approx(modularity_dense(g.adjacency.toarray(), part.labels), abs=1e-12)


# --- phi, R3, R4 -----------------------------------------------------------------

def test_phi_two_triangles(two_triangles):
    assert sbm_log_likelihood(*two_triangles) == 0.0


def test_phi_bridged(bridged_triangles):
    g, part = bridged_triangles
    expected = math.log(1 / 9) + 8 * math.log(8 / 9)
    assert expected == pytest.approx(-3.1397, abs=5e-4)  # the quoted figure is rounded loosely
    assert sbm_log_likelihood(g, part) == pytest.approx(expected, abs=1e-12)
    assert log_likelihood_pairs(g.adjacency.toarray(), part.labels) == pytest.approx(expected, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_phi_matches_pair_enumeration(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 13))
    A = np.triu(rng.random((n, n)) < rng.uniform(0.1, 0.9), 1)
    edges = list(zip(*np.nonzero(A)))
    if not edges:
        return
    g = Graph.from_edges(n, edges)
    part = Partition.from_any_labels(g, rng.integers(0, 3, n))
    phi = sbm_log_likelihood(g, part)
    assert phi <= 0
    assert phi == pytest.approx(log_likelihood_pairs(g.adjacency.toarray(), part.labels), abs=1e-12)


def test_r3_r4_two_triangles(two_triangles):
    assert mismatch_r3(*two_triangles) == pytest.approx(2.0)
    assert mismatch_r4(*two_triangles) == pytest.approx(math.log(6))


def test_r3_penalty_with_three_blocks(two_triangles):
    g, _ = two_triangles
    part = Partition(g, [0, 0, 1, 2, 2, 2])
    assert mismatch_r3(g, part) == pytest.approx(6 - 2 * sbm_log_likelihood(g, part))


def test_r4_minus_r3_is_penalty_gap(bridged_triangles):
    g, part = bridged_triangles
    K = part.K
    gap = (math.log(g.m) / 2 - 1) * K * (K - 1)
    assert mismatch_r4(g, part) - mismatch_r3(g, part) == pytest.approx(gap)


def test_phi_maximised_by_planted_split(bridged_triangles):
    g, planted = bridged_triangles
    best = sbm_log_likelihood(g, planted)
    for bits in itertools.product([0, 1], repeat=5):
        labels = (0,) + bits
        if len(set(labels)) < 2:
            continue
        assert sbm_log_likelihood(g, Partition(g, labels)) <= best + 1e-12


# --- select ----------------------------------------------------------------------

def three_block(seed, n=300):
    P = np.full((3, 3), 0.02)
    np.fill_diagonal(P, 0.2)
    return generate_sbm(SbmParams((n, n, n), P), seed)


def test_config_defaults_and_validation():
    assert SelectionConfig("standard").alpha == 1e-4
    assert SelectionConfig("regularized").alpha == 1e-6
    with pytest.raises(ValueError):
        SelectionConfig(alpha=-1)
    with pytest.raises(ValueError):
        SelectionConfig(k_max=1)


def test_single_candidate(bridged_triangles):
    g, _ = bridged_triangles
    rep = select(g, SelectionConfig(k_max=2, alpha=1e9))
    assert rep.k_star == 2 and [r.K for r in rep.records] == [2]


def test_zero_alpha_minimises_loss_alone():
    g, _ = three_block(0, 100)
    rep = select(g, SelectionConfig(mismatch="bic", alpha=0.0, k_max=6))
    losses = [r.loss for r in rep.records]
    assert rep.k_star == rep.records[int(np.argmin(losses))].K
    for r in rep.records:
        assert (r.loss > 1) == (r.theta < 0)
        assert r.objective == r.loss


def test_report_minimum_and_json():
    import json
    g, _ = three_block(1, 100)
    rep = select(g, SelectionConfig(mismatch="aic", k_max=5))
    objs = {r.K: r.objective for r in rep.records}
    assert objs[rep.k_star] == min(objs.values())
    assert rep.k_star == min(k for k, v in objs.items() if v == objs[rep.k_star])
    doc = json.loads(rep.to_json())
    assert [r["K"] for r in doc["records"]] == [2, 3, 4, 5]
    assert len(doc["labels"]) == g.n


def test_select_is_deterministic():
    g, _ = three_block(2, 100)
    cfg = SelectionConfig(mismatch="eig", k_max=5, seed=3)
    a, b = select(g, cfg), select(g, cfg)
    assert a.to_json() == b.to_json()


def test_aic_recovers_three_blocks():
    hits = sum(select(three_block(s)[0], SelectionConfig(mismatch="aic", k_max=8, seed=s)).k_star == 3
               for s in range(10))
    assert hits >= 9


@pytest.mark.xfail(strict=True, reason="at alpha=1e-4 the modularity gain between K=2 and K=3 is "
                                        "smaller than the loss gap; see README 'Known deviations'")
def test_modularity_recovers_three_blocks():
    hits = sum(select(three_block(s)[0], SelectionConfig(mismatch="mod", k_max=8, seed=s)).k_star == 3
               for s in range(10))
    assert hits >= 9


def test_disconnected_graph_standard_mode_needs_lcc():
    g, _ = generate_sbm(SbmParams((5, 5), [[0.0, 0.0], [0.0, 1.0]]), 0)
    with pytest.raises(Exception):
        select(g, SelectionConfig(k_max=2))
    sub, _ = largest_connected_component(g)
    assert sub.n == 5
