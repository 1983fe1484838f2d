"""Immutable undirected simple graphs."""

from __future__ import annotations

from collections import deque
from typing import Iterable, Sequence

import numpy as np

from ..errors import GraphInvalidError, InputConstraintError


class Graph:
    """Undirected simple graph on vertices ``0..n-1``.

    Build instances with :func:`build_graph`. Adjacency is stored twice: as
    sorted tuples for Python callers and as CSR arrays (``indptr``,
    ``indices``) for the compiled kernels. All arrays are read-only.
    """

    __slots__ = ("n", "edges", "adjacency", "degree", "indptr", "indices", "_connected")

    def __init__(self, n: int, edges: Sequence[tuple[int, int]]):
        adj: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            adj[u].add(v)
            adj[v].add(u)
        self.n = n
        self.edges = tuple(sorted({(min(u, v), max(u, v)) for u, v in edges}))
        self.adjacency = tuple(tuple(sorted(a)) for a in adj)
        degree = np.array([len(a) for a in adj], dtype=np.int64)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(degree, out=indptr[1:])
        indices = np.fromiter((w for a in self.adjacency for w in a), dtype=np.int64, count=int(indptr[-1]))
        for arr in (degree, indptr, indices):
            arr.setflags(write=False)
        self.degree = degree
        self.indptr = indptr
        self.indices = indices
        self._connected: bool | None = None

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def deg_min(self) -> int:
        return int(self.degree.min())

    @property
    def deg_max(self) -> int:
        return int(self.degree.max())

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def is_regular(self) -> bool:
        return self.n > 0 and self.deg_min == self.deg_max

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.int8)
        for u, v in self.edges:
            a[u, v] = a[v, u] = 1
        return a

    def __eq__(self, other):
        return isinstance(other, Graph) and self.n == other.n and self.edges == other.edges

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


def build_graph(n: int, edge_list: Iterable[Sequence[int]]) -> Graph:
    """Validate an edge list and return the graph it describes.

    Duplicate edges (in either orientation) are merged. Self-loops and
    out-of-range endpoints raise :class:`InputConstraintError` naming the
    offending pair.
    """
    if int(n) != n or n < 1:
        raise InputConstraintError(f"vertex count must be a positive integer, got {n!r}")
    n = int(n)
    pairs = []
    for pair in edge_list:
        u, v = (int(t) for t in pair)
        if not (0 <= u < n and 0 <= v < n):
            raise InputConstraintError(f"edge ({u}, {v}) out of range for n={n}")
        if u == v:
            raise InputConstraintError(f"self-loop ({u}, {v}) is not allowed")
        pairs.append((u, v))
    return Graph(n, pairs)


def is_connected(g: Graph) -> bool:
    if g._connected is None:
        seen = [False] * g.n
        seen[0] = True
        queue = deque([0])
        count = 1
        while queue:
            u = queue.popleft()
            for w in g.adjacency[u]:
                if not seen[w]:
                    seen[w] = True
                    count += 1
                    queue.append(w)
        g._connected = count == g.n
    return g._connected


def require_connected(g: Graph) -> None:
    if not is_connected(g):
        raise GraphInvalidError(f"graph with n={g.n} is not connected; fixation probabilities are zero")
