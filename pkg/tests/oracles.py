"""Brute-force reference computations. Deliberately naive and independent of sgcgen."""

import itertools
import math
from collections import Counter

import numpy as np


def dense_adjacency(n, edges):
    A = np.zeros((n, n))
    for u, v in edges:
        if u != v:
            A[u, v] = A[v, u] = 1.0
    return A


def dense_laplacian(A, tau=0.0):
    d = A.sum(1) + tau
    s = 1 / np.sqrt(d)
    return np.eye(len(A)) - s[:, None] * A * s[None, :]


def pair_labels(x):
    n = len(x)
    return {(i, j): x[i] == x[j] for i in range(n) for j in range(i + 1, n)}


def rand_index(x, y):
    px, py = pair_labels(x), pair_labels(y)
    agree = sum(px[p] == py[p] for p in px)
    return agree / len(px)


def f_measure(pred, truth):
    pp, pt = pair_labels(pred), pair_labels(truth)
    tp = sum(pp[p] and pt[p] for p in pp)
    fp = sum(pp[p] and not pt[p] for p in pp)
    fn = sum(pt[p] and not pp[p] for p in pp)
    if tp + fp + fn == 0:
        return 1.0
    if tp == 0:
        return 0.0
    prec, rec = tp / (tp + fp), tp / (tp + fn)
    return 2 * prec * rec / (prec + rec)


def nmi(x, y):
    n = len(x)
    cx, cy, cxy = Counter(x), Counter(y), Counter(zip(x, y))
    hx = -sum(c / n * math.log(c / n) for c in cx.values())
    hy = -sum(c / n * math.log(c / n) for c in cy.values())
    if hx == 0 and hy == 0:
        return 1.0
    if hx == 0 or hy == 0:
        return 0.0
    mi = sum(c / n * math.log((c / n) / ((cx[a] / n) * (cy[b] / n))) for (a, b), c in cxy.items())
    return mi / math.sqrt(hx * hy)


def accuracy(pred, truth):
    lp, lt = sorted(set(pred)), sorted(set(truth))
    k = max(len(lp), len(lt))
    lp = lp + [object()] * (k - len(lp))
    best = 0
    for perm in itertools.permutations(range(k)):
        mapping = {lp[i]: (lt[perm[i]] if perm[i] < len(lt) else None) for i in range(k)}
        best = max(best, sum(mapping[a] == b for a, b in zip(pred, truth)))
    return best / len(pred)


def modularity_dense(A, labels):
    d = A.sum(1)
    two_m = d.sum()
    same = labels[:, None] == labels[None, :]
    return float(((A - np.outer(d, d) / two_m) * same).sum() / two_m)


def log_likelihood_pairs(A, labels):
    """Sum of ln Bernoulli(P_hat) over every unordered pair, P_hat by direct counting."""
    n = len(A)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    blocks = {}
    for i, j in pairs:
        key = tuple(sorted((labels[i], labels[j])))
        blocks.setdefault(key, []).append(A[i, j])
    phat = {key: sum(v) / len(v) for key, v in blocks.items()}
    total = 0.0
    for i, j in pairs:
        p = phat[tuple(sorted((labels[i], labels[j])))]
        prob = p if A[i, j] else 1 - p
        total += math.log(prob)  # prob is never 0 under the MLE
    return total


def normalized_cut_two(A, mask):
    d = A.sum(1)
    cut = A[mask][:, ~mask].sum()
    return cut / d[mask].sum() + cut / d[~mask].sum()


def all_two_partitions(n):
    for bits in range(1, 2 ** (n - 1)):
        mask = np.array([(bits >> i) & 1 for i in range(n)], dtype=bool)
        yield mask


def kmeans_brute_force_1d(x, k=2):
    best = math.inf
    n = len(x)
    for labels in itertools.product(range(k), repeat=n):
        if len(set(labels)) < k:
            continue
        lab = np.array(labels)
        obj = sum(((x[lab == c] - x[lab == c].mean()) ** 2).sum() for c in range(k))
        best = min(best, obj)
    return best


def competition_ranks(values, higher_better=True):
    out = []
    for v in values:
        better = sum((w > v) if higher_better else (w < v) for w in values)
        out.append(better + 1)
    return out
