"""Compiled Moran-process run loops.

Outcome codes: 1 fixation, 0 extinction, -1 timeout.
"""

from __future__ import annotations

import numba
import numpy as np

from .rng import nb_stream_key, nb_uniform

FIXATION = 1
EXTINCTION = 0
TIMEOUT = -1


@numba.njit(cache=True)
def _init_weights(indptr, indices, inv_deg, r, infected, w, cnt):
    n = infected.shape[0]
    for v in range(n):
        acc = 0.0
        c = 0
        for p in range(indptr[v], indptr[v + 1]):
            y = indices[p]
            if infected[y] != infected[v]:
                c += 1
                # v infected: disinfected by y at 1/deg y; v clean: infected by y at r/deg y
                acc += inv_deg[y] if infected[v] else r * inv_deg[y]
        w[v] = acc
        cnt[v] = c


@numba.njit(cache=True)
def _flip(v, indptr, indices, inv_deg, r, infected, w, cnt):
    """Flip vertex v and patch the flip weights of v and its neighbours."""
    now = 1 - infected[v]
    infected[v] = now
    acc = 0.0
    c = 0
    for p in range(indptr[v], indptr[v + 1]):
        y = indices[p]
        if infected[y] != now:
            c += 1
            acc += inv_deg[y] if now else r * inv_deg[y]
            # edge (v, y) became a boundary edge
            cnt[y] += 1
            w[y] += r * inv_deg[v] if now else inv_deg[v]
        else:
            cnt[y] -= 1
            if cnt[y] == 0:
                w[y] = 0.0
            else:
                w[y] -= inv_deg[v] if now else r * inv_deg[v]
    w[v] = acc
    cnt[v] = c


@numba.njit(cache=True)
def _pick(w, u):
    n = w.shape[0]
    total = 0.0
    for v in range(n):
        total += w[v]
    target = u * total
    acc = 0.0
    last = -1
    for v in range(n):
        if w[v] > 0.0:
            acc += w[v]
            last = v
            if target < acc:
                return v
    return last


@numba.njit(cache=True)
def run_effective(indptr, indices, inv_deg, r, start, key, max_steps):
    """One run of the self-loop-free chain. Returns (outcome, steps)."""
    n = start.shape[0]
    infected = start.copy()
    count = 0
    for v in range(n):
        count += infected[v]
    w = np.empty(n)
    cnt = np.empty(n, dtype=np.int64)
    _init_weights(indptr, indices, inv_deg, r, infected, w, cnt)
    steps = 0
    while True:
        if count == n:
            return FIXATION, steps
        if count == 0:
            return EXTINCTION, steps
        if steps >= max_steps:
            return TIMEOUT, steps
        steps += 1
        v = _pick(w, nb_uniform(key, steps))
        _flip(v, indptr, indices, inv_deg, r, infected, w, cnt)
        count += 1 if infected[v] else -1


@numba.njit(cache=True)
def run_naive(indptr, indices, r, start, key, max_steps):
    """Reference sampler: fitness-proportional parent, uniform neighbour, no-ops kept."""
    n = start.shape[0]
    infected = start.copy()
    count = 0
    for v in range(n):
        count += infected[v]
    steps = 0
    draws = 0
    while True:
        if count == n:
            return FIXATION, steps
        if count == 0:
            return EXTINCTION, steps
        if steps >= max_steps:
            return TIMEOUT, steps
        steps += 1
        draws += 1
        target = nb_uniform(key, draws) * (r * count + (n - count))
        parent = n - 1
        acc = 0.0
        for v in range(n):
            acc += r if infected[v] else 1.0
            if target < acc:
                parent = v
                break
        draws += 1
        d = indptr[parent + 1] - indptr[parent]
        j = int(nb_uniform(key, draws) * d)
        if j == d:
            j = d - 1
        child = indices[indptr[parent] + j]
        if infected[child] != infected[parent]:
            infected[child] = infected[parent]
            count += 1 if infected[parent] else -1


@numba.njit(cache=True, parallel=True)
def batch_runs(indptr, indices, inv_deg, r, starts, start_of_run, seed, first_run, max_steps, naive):
    runs = start_of_run.shape[0]
    outcomes = np.empty(runs, dtype=np.int8)
    steps = np.empty(runs, dtype=np.int64)
    for j in numba.prange(runs):
        key = nb_stream_key(seed, first_run + j)
        start = starts[start_of_run[j]]
        if naive:
            o, s = run_naive(indptr, indices, r, start, key, max_steps)
        else:
            o, s = run_effective(indptr, indices, inv_deg, r, start, key, max_steps)
        outcomes[j] = o
        steps[j] = s
    return outcomes, steps
