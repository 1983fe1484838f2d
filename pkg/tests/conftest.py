"""Shared independent oracles and fixtures.

The oracles here deliberately avoid the production code paths: they build the
*naive* Moran transition matrix (self-loops kept) term by term and solve it
densely, so agreement with the package checks both the self-loop
elimination and the iterative solvers.
"""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from moranbounds.graphs import connected_corpus, make_urchin


def naive_transition_matrix(g, r: float) -> np.ndarray:
    """One step of the birth-death Moran process, self-loops included."""
    n = g.n
    size = 1 << n
    P = np.zeros((size, size))
    for s in range(size):
        infected = [(s >> v) & 1 for v in range(n)]
        fit = sum(r if infected[v] else 1.0 for v in range(n))
        for parent in range(n):
            w_parent = (r if infected[parent] else 1.0) / fit
            nbrs = g.adjacency[parent]
            for child in nbrs:
                if infected[parent]:
                    t = s | (1 << child)
                else:
                    t = s & ~(1 << child)
                P[s, t] += w_parent / len(nbrs)
    return P


def dense_fixation(g, r: float) -> np.ndarray:
    """Fixation probability of every configuration by a dense direct solve."""
    n = g.n
    size = 1 << n
    if n == 1:
        return np.array([0.0, 1.0])
    P = naive_transition_matrix(g, r)
    A = np.eye(size) - P
    b = np.zeros(size)
    for absorbing, value in ((0, 0.0), (size - 1, 1.0)):
        A[absorbing] = 0.0
        A[absorbing, absorbing] = 1.0
        b[absorbing] = value
    return np.linalg.solve(A, b)


def brute_force_effective_distribution(g, infected: frozenset, r: float) -> dict:
    """Distribution of the next *changed* configuration, from the naive chain."""
    n = g.n
    s = sum(1 << v for v in infected)
    row = naive_transition_matrix_row(g, s, r)
    row.pop(s, None)
    total = sum(row.values())
    return {frozenset(v for v in range(n) if (t >> v) & 1): p / total for t, p in row.items()}


def naive_transition_matrix_row(g, s: int, r: float) -> dict:
    n = g.n
    infected = [(s >> v) & 1 for v in range(n)]
    fit = sum(r if infected[v] else 1.0 for v in range(n))
    out: dict[int, float] = {}
    for parent in range(n):
        w_parent = (r if infected[parent] else 1.0) / fit
        for child in g.adjacency[parent]:
            t = s | (1 << child) if infected[parent] else s & ~(1 << child)
            out[t] = out.get(t, 0.0) + w_parent / len(g.adjacency[parent])
    return out


def urchin_full_level_hitting(n: int, r: float, k: int) -> dict[int, float]:
    """Per-configuration probability (full 2^(2n) chain) of reaching k+1 noses before k-1."""
    g = make_urchin(n)
    N = 2 * n

    def noses(s):
        return sum((s >> (n + j)) & 1 for j in range(n))

    states = [s for s in range(1 << N) if noses(s) == k]
    idx = {s: j for j, s in enumerate(states)}
    A = np.eye(len(states))
    b = np.zeros(len(states))
    for s in states:
        row = naive_transition_matrix_row(g, s, r)
        row.pop(s, None)
        total = sum(row.values())
        for t, p in row.items():
            kt = noses(t)
            if kt == k + 1:
                b[idx[s]] += p / total
            elif kt == k:
                A[idx[s], idx[t]] -= p / total
    q = np.linalg.solve(A, b)
    return {s: float(q[idx[s]]) for s in states}


def subsets(n: int):
    for size in range(n + 1):
        yield from itertools.combinations(range(n), size)


@pytest.fixture(scope="session")
def corpus6():
    return connected_corpus(6)


@pytest.fixture(scope="session")
def corpus5():
    return connected_corpus(5)


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion(request):
    """Record one pass/fail line for an acceptance criterion, then assert it."""

    def record(label: str, ok: bool, detail: str) -> None:
        line = f"criterion {label}: {'PASS' if ok else 'FAIL'} - {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
