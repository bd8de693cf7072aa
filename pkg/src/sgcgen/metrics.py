"""Clustering metrics with and without ground truth, and average competition rank."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .graph import Graph
from .sbm import Partition, check_consistent
from .selection import modularity

HIGHER_BETTER = {"nmi": True, "ri": True, "fm": True, "mod": True,
                 "cond": False, "nc": False, "avg_odf": False}
EXTERNAL = ("nmi", "ri", "fm")
INTERNAL = ("cond", "nc", "avg_odf", "mod")


def _labels(x) -> np.ndarray:
    return np.asarray(x.labels if isinstance(x, Partition) else x)


def contingency(x, y) -> np.ndarray:
    x, y = _labels(x), _labels(y)
    if x.shape != y.shape:
        raise ValueError(f"partitions differ in size: {x.shape[0]} vs {y.shape[0]}")
    _, xi = np.unique(x, return_inverse=True)
    _, yi = np.unique(y, return_inverse=True)
    C = np.zeros((xi.max() + 1, yi.max() + 1), dtype=np.int64)
    np.add.at(C, (xi, yi), 1)
    return C


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-(p * np.log(p)).sum())


def nmi(x, y) -> float:
    """Mutual information over the geometric mean of the two entropies (nats)."""
    C = contingency(x, y)
    n = int(C.sum())
    hx, hy = _entropy(C.sum(1), n), _entropy(C.sum(0), n)
    if hx == 0.0 and hy == 0.0:
        return 1.0
    if hx == 0.0 or hy == 0.0:
        return 0.0
    nz = C > 0
    pxy = C[nz] / n
    px = (C.sum(1) / n)[:, None].repeat(C.shape[1], 1)[nz]
    py = (C.sum(0) / n)[None, :].repeat(C.shape[0], 0)[nz]
    mi = float((pxy * np.log(pxy / (px * py))).sum())
    return max(0.0, mi / np.sqrt(hx * hy))


def _pair_counts(x, y) -> tuple[float, float, float, float]:
    """(both together, together only in x, together only in y, total pairs)."""
    C = contingency(x, y)
    n = int(C.sum())
    if n < 2:
        raise ValueError("pair-counting metrics need n >= 2")

    def c2(a):
        a = np.asarray(a, dtype=np.float64)
        return float((a * (a - 1) / 2).sum())

    tp = c2(C)
    return tp, c2(C.sum(1)) - tp, c2(C.sum(0)) - tp, n * (n - 1) / 2


def rand_index(x, y) -> float:
    tp, fx, fy, total = _pair_counts(x, y)
    return (total - fx - fy) / total


def f_measure(pred, truth) -> float:
    """Pairwise F1 of co-clustering decisions, ``pred`` against ``truth``."""
    tp, fp, fn, _ = _pair_counts(pred, truth)
    if tp + fp + fn == 0:
        return 1.0  # both all-singleton: identical, no pair decision to get wrong
    if tp == 0:
        return 0.0
    precision, recall = tp / (tp + fp), tp / (tp + fn)
    return 2 * precision * recall / (precision + recall)


def accuracy(pred, truth) -> float:
    """Fraction of nodes correct under the best one-to-one label matching."""
    C = contingency(pred, truth)
    n = C.sum()
    k = max(C.shape)
    C = np.pad(C, ((0, k - C.shape[0]), (0, k - C.shape[1])))
    if k <= 8:
        perms = np.array(list(itertools.permutations(range(k))))
        best = C[np.arange(k), perms].sum(axis=1).max()
    else:
        r, c = linear_sum_assignment(C, maximize=True)
        best = C[r, c].sum()
    return float(best / n)


# --- internal ------------------------------------------------------------------

def _cut_and_volume(g: Graph, part: Partition):
    check_consistent(g, part)
    vol = part.volumes.astype(np.float64)
    cut = vol - 2.0 * np.diag(part.block_edges)
    if (vol == 0).any():
        raise ValueError("a community has zero volume")
    return cut, vol, 2.0 * g.m


def conductance(g: Graph, part: Partition) -> float:
    cut, vol, total = _cut_and_volume(g, part)
    denom = np.minimum(vol, total - vol)
    with np.errstate(invalid="ignore", divide="ignore"):
        per = np.where(cut == 0, 0.0, cut / denom)
    return float(per.mean())


def normalized_cut(g: Graph, part: Partition) -> float:
    cut, vol, total = _cut_and_volume(g, part)
    rest = total - vol
    with np.errstate(invalid="ignore", divide="ignore"):
        per = np.where(cut == 0, 0.0, cut / vol + cut / rest)
    return float(per.mean())


def avg_odf(g: Graph, part: Partition) -> float:
    """Out-degree fraction averaged over nodes of each community, then over communities."""
    check_consistent(g, part)
    e = g.edges()
    lab = part.labels
    crossing = lab[e[:, 0]] != lab[e[:, 1]]
    out = np.bincount(e[crossing, 0], minlength=g.n) + np.bincount(e[crossing, 1], minlength=g.n)
    d = g.degrees.astype(np.float64)
    if (d == 0).any():
        raise ValueError("out-degree fraction undefined for isolated nodes")
    frac = out / d
    per = np.bincount(lab, weights=frac, minlength=part.K) / part.sizes
    return float(per.mean())


@dataclass
class MetricVector:
    cond: float
    nc: float
    avg_odf: float
    mod: float
    nmi: float | None = None
    ri: float | None = None
    fm: float | None = None

    def items(self):
        for name in EXTERNAL + INTERNAL:
            value = getattr(self, name)
            if value is not None:
                yield name, value


def evaluate(g: Graph, pred: Partition, truth=None) -> MetricVector:
    mv = MetricVector(cond=conductance(g, pred), nc=normalized_cut(g, pred),
                      avg_odf=avg_odf(g, pred), mod=modularity(g, pred))
    if truth is not None:
        mv.nmi, mv.ri, mv.fm = nmi(pred, truth), rand_index(pred, truth), f_measure(pred, truth)
    return mv


# --- ranking -------------------------------------------------------------------

def competition_ranks(values: Sequence[float], higher_better: bool) -> np.ndarray:
    """Standard competition ranks ("1224"); NaN entries get NaN."""
    v = np.asarray(values, dtype=np.float64)
    key = -v if higher_better else v
    ranks = np.full(len(v), np.nan)
    ok = ~np.isnan(v)
    for i in np.flatnonzero(ok):
        ranks[i] = 1 + int((key[ok] < key[i]).sum())
    return ranks


@dataclass
class RankTable:
    methods: list[str]
    metrics: list[str]
    values: np.ndarray
    ranks: np.ndarray
    avg_rank: np.ndarray


def average_rank(values: Mapping[str, Mapping[str, float]],
                 orientations: Mapping[str, bool]) -> RankTable:
    """Rank methods per metric and average each method's ranks.

    ``values[method][metric]``; missing or NaN entries are excluded from that
    method's mean. ``orientations[metric]`` is True when higher is better.
    """
    methods = list(values)
    if len(methods) < 2:
        raise ValueError("ranking needs at least two methods")
    metrics = [mt for mt in orientations if any(mt in values[m] for m in methods)]
    if not metrics:
        raise ValueError("no metric column to rank")
    V = np.array([[values[m].get(mt, np.nan) for mt in metrics] for m in methods], dtype=np.float64)
    R = np.full_like(V, np.nan)
    for j, mt in enumerate(metrics):
        if np.isnan(V[:, j]).all():
            raise ValueError(f"metric column {mt!r} has no values")
        R[:, j] = competition_ranks(V[:, j], orientations[mt])
    return RankTable(methods, metrics, V, R, np.nanmean(R, axis=1))
