"""Sparse undirected simple graphs with edge-list I/O."""

from __future__ import annotations

import io
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import IO, Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components


class GraphError(ValueError):
    """Base class for graph construction and ingestion failures."""


class ParseError(GraphError):
    def __init__(self, lineno: int, line: str, reason: str = "expected two integer node ids"):
        super().__init__(f"line {lineno}: {reason}: {line!r}")
        self.lineno = lineno


class EmptyGraphError(GraphError):
    pass


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected simple graph in CSR form.

    ``indptr``/``indices`` hold per-node neighbor lists sorted ascending.
    ``original_ids[i]`` is the id node ``i`` carried in the source data.
    """

    indptr: np.ndarray
    indices: np.ndarray
    original_ids: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        indptr = np.ascontiguousarray(self.indptr, dtype=np.int64)
        indices = np.ascontiguousarray(self.indices, dtype=np.int64)
        n = len(indptr) - 1
        ids = (np.arange(n, dtype=np.int64) if self.original_ids is None
               else np.ascontiguousarray(self.original_ids, dtype=np.int64))
        if len(ids) != n:
            raise GraphError("original_ids length does not match node count")
        for arr in (indptr, indices, ids):
            arr.setflags(write=False)
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "original_ids", ids)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]] | np.ndarray,
                   original_ids: Sequence[int] | None = None) -> "Graph":
        """Build a simplified graph on nodes ``0..n-1`` from an edge iterable.

        Self-loops are dropped and duplicate/reversed edges collapse into one.
        """
        e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        e = e.reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise GraphError(f"edge endpoint out of range 0..{n - 1}")
        e = e[e[:, 0] != e[:, 1]]
        u = np.minimum(e[:, 0], e[:, 1])
        v = np.maximum(e[:, 0], e[:, 1])
        key = np.unique(u * n + v)
        u, v = key // n, key % n
        rows = np.concatenate([u, v])
        cols = np.concatenate([v, u])
        order = np.lexsort((cols, rows))
        rows, cols = rows[order], cols[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
        return cls(indptr, cols, original_ids)

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    @property
    def m(self) -> int:
        return len(self.indices) // 2

    @cached_property
    def degrees(self) -> np.ndarray:
        d = np.diff(self.indptr)
        d.setflags(write=False)
        return d

    @property
    def total_degree(self) -> int:
        return 2 * self.m

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """0/1 adjacency as a float CSR matrix (used for matvecs)."""
        data = np.ones(len(self.indices), dtype=np.float64)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def edges(self) -> np.ndarray:
        """(m, 2) array of edges with ``u < v``, sorted lexicographically."""
        rows = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        keep = rows < self.indices
        return np.column_stack([rows[keep], self.indices[keep]])

    def subgraph(self, nodes: Sequence[int] | np.ndarray) -> "Graph":
        """Induced subgraph; node ``k`` of the result is ``nodes[k]`` here."""
        nodes = np.asarray(nodes, dtype=np.int64)
        pos = np.full(self.n, -1, dtype=np.int64)
        pos[nodes] = np.arange(len(nodes))
        e = self.edges()
        e = pos[e]
        e = e[(e >= 0).all(axis=1)]
        return Graph.from_edges(len(nodes), e, self.original_ids[nodes])

    def is_connected(self) -> bool:
        ncomp, _ = connected_components(self.adjacency, directed=False)
        return ncomp == 1

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def parse_edge_list(source: bytes | str | IO, comment_prefix: str = "#",
                    index_base: int = 0) -> Graph:
    """Parse whitespace-separated edge-list text into a simplified Graph.

    Node ids are remapped to ``0..n-1`` in order of first appearance; the
    source id (minus ``index_base``) is kept in ``Graph.original_ids``.
    """
    if isinstance(source, bytes):
        source = source.decode()
    if isinstance(source, str):
        source = io.StringIO(source)
    remap: dict[int, int] = {}
    edges = []
    for lineno, raw in enumerate(source, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode()
        line = raw.strip()
        if not line or (comment_prefix and line.startswith(comment_prefix)):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise ParseError(lineno, line)
        try:
            a, b = int(tokens[0]) - index_base, int(tokens[1]) - index_base
        except ValueError:
            raise ParseError(lineno, line) from None
        ia = remap.setdefault(a, len(remap))
        ib = remap.setdefault(b, len(remap))
        edges.append((ia, ib))
    if not remap:
        raise EmptyGraphError("edge list is empty after filtering comments")
    g = Graph.from_edges(len(remap), edges, list(remap))
    if g.m == 0:
        raise EmptyGraphError("graph has no edges after simplification")
    return g


def read_edge_list(path, comment_prefix: str = "#", index_base: int = 0) -> Graph:
    with open(path) as fh:
        return parse_edge_list(fh, comment_prefix, index_base)


def format_edge_list(g: Graph, use_original_ids: bool = True, header: str | None = None) -> str:
    ids = g.original_ids if use_original_ids else np.arange(g.n)
    lines = [] if header is None else [f"# {h}" for h in header.splitlines()]
    lines.extend(f"{ids[u]} {ids[v]}" for u, v in g.edges())
    return "\n".join(lines) + "\n"


def largest_connected_component(g: Graph) -> tuple[Graph, np.ndarray]:
    """Induced subgraph on the largest connected component.

    Ties go to the component holding the smallest node id. Returns the
    subgraph and ``old_ids`` with ``old_ids[new] == old``.
    """
    ncomp, comp = connected_components(g.adjacency, directed=False)
    if ncomp == 1:
        return g, np.arange(g.n, dtype=np.int64)
    sizes = np.bincount(comp)
    # component labels are assigned in order of their smallest node, so argmax
    # already prefers the earliest component among equal sizes
    best = int(np.argmax(sizes))
    nodes = np.flatnonzero(comp == best)
    return g.subgraph(nodes), nodes


def volume(g: Graph, nodes: Iterable[int]) -> int:
    nodes = np.fromiter(nodes, dtype=np.int64)
    if nodes.size and (nodes.min() < 0 or nodes.max() >= g.n):
        raise GraphError(f"node id out of range 0..{g.n - 1}")
    return int(g.degrees[nodes].sum())


# --- label files ---------------------------------------------------------------

def parse_label_file(source: bytes | str | IO, comment_prefix: str = "#",
                     index_base: int = 0) -> dict[int, list[int]]:
    """Read ``node_id label_id`` lines; a node may appear with several labels."""
    if isinstance(source, bytes):
        source = source.decode()
    if isinstance(source, str):
        source = io.StringIO(source)
    labels: dict[int, list[int]] = {}
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or (comment_prefix and line.startswith(comment_prefix)):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise ParseError(lineno, line, "expected 'node_id label_id'")
        try:
            node, lab = int(tokens[0]) - index_base, int(tokens[1])
        except ValueError:
            raise ParseError(lineno, line, "expected 'node_id label_id'") from None
        cands = labels.setdefault(node, [])
        if lab not in cands:
            cands.append(lab)
    return labels


def read_label_file(path, comment_prefix: str = "#", index_base: int = 0) -> dict[int, list[int]]:
    with open(path) as fh:
        return parse_label_file(fh, comment_prefix, index_base)


def format_label_file(node_ids: Sequence[int], labels: Sequence[int], header: str | None = None) -> str:
    lines = [] if header is None else [f"# {h}" for h in header.splitlines()]
    lines.extend(f"{int(i)} {int(l)}" for i, l in zip(node_ids, labels))
    return "\n".join(lines) + "\n"


def resolve_labels(g: Graph, labels: dict[int, list[int]]) -> np.ndarray:
    """Map a (possibly multi-label) label table onto the nodes of ``g``.

    Keys are original node ids. A node carrying several candidate labels gets
    the candidate that is most common among its neighbors' labels, ties going
    to the smallest label id. Raises if any node of ``g`` is unlabeled.
    """
    cands = []
    for orig in g.original_ids:
        c = labels.get(int(orig))
        if not c:
            raise GraphError(f"node {int(orig)} has no label")
        cands.append(sorted(c))
    out = np.array([c[0] for c in cands], dtype=np.int64)
    for i, c in enumerate(cands):
        if len(c) == 1:
            continue
        counts: Counter[int] = Counter()
        for j in g.neighbors(i):
            counts.update(cands[j])
        out[i] = max(c, key=lambda lab: (counts[lab], -lab))
    return out
