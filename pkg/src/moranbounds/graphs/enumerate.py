"""Exhaustive enumeration of small connected graphs.

Graphs on ``n`` labelled vertices are encoded as bitmasks over the
``n(n-1)/2`` vertex pairs. Isomorphism classes are collected by sweeping
the masks in increasing order and marking each new mask's whole orbit under
the symmetric group, so the representative of a class is its smallest mask.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations, permutations
from typing import Iterator

import numpy as np

from ..errors import SizeCapError
from .core import Graph, build_graph, is_connected

MAX_ENUMERATION_N = 7


def _pairs(n: int) -> list[tuple[int, int]]:
    return list(combinations(range(n), 2))


def _graph_from_mask(n: int, mask: int, pairs) -> Graph:
    return build_graph(n, [p for b, p in enumerate(pairs) if mask >> b & 1])


def _mask_connected(n: int, mask: int, pairs) -> bool:
    adj = [0] * n
    for b, (u, v) in enumerate(pairs):
        if mask >> b & 1:
            adj[u] |= 1 << v
            adj[v] |= 1 << u
    seen, frontier = 1, 1
    while frontier:
        nxt = 0
        for v in range(n):
            if frontier >> v & 1:
                nxt |= adj[v]
        frontier = nxt & ~seen
        seen |= nxt
    return seen == (1 << n) - 1


def labeled_connected_graphs(n: int) -> Iterator[Graph]:
    """Every connected graph on the labelled vertex set ``0..n-1``."""
    if n > 6:
        raise SizeCapError(f"labelled enumeration capped at n=6, got {n}")
    pairs = _pairs(n)
    for mask in range(1 << len(pairs)):
        if _mask_connected(n, mask, pairs):
            yield _graph_from_mask(n, mask, pairs)


@lru_cache(maxsize=None)
def _connected_class_masks(n: int) -> tuple[int, ...]:
    pairs = _pairs(n)
    index = {p: b for b, p in enumerate(pairs)}
    npairs = len(pairs)
    if npairs == 0:
        return (0,)
    # perm_bits[b, s] = bit weight of pair b after applying permutation s
    cols = []
    for perm in permutations(range(n)):
        col = []
        for u, v in pairs:
            a, b = perm[u], perm[v]
            col.append(1 << index[(min(a, b), max(a, b))])
        cols.append(col)
    perm_bits = np.array(cols, dtype=np.int64).T
    seen = np.zeros(1 << npairs, dtype=bool)
    shifts = np.arange(npairs, dtype=np.int64)
    reps = []
    for mask in range(1 << npairs):
        if seen[mask]:
            continue
        bits = (mask >> shifts) & 1
        seen[bits @ perm_bits] = True
        if _mask_connected(n, mask, pairs):
            reps.append(mask)
    return tuple(reps)


def connected_graphs(n: int) -> list[Graph]:
    """One representative per isomorphism class of connected graphs on n vertices."""
    if not 1 <= n <= MAX_ENUMERATION_N:
        raise SizeCapError(f"enumeration supports 1 <= n <= {MAX_ENUMERATION_N}, got {n}")
    pairs = _pairs(n)
    return [_graph_from_mask(n, m, pairs) for m in _connected_class_masks(n)]


def connected_corpus(max_n: int) -> list[Graph]:
    """All connected graphs with ``1 <= n <= max_n`` up to isomorphism."""
    out = []
    for n in range(1, max_n + 1):
        out.extend(connected_graphs(n))
    assert all(is_connected(g) for g in out)
    return out
