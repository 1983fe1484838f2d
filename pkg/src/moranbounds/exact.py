"""Exact fixation probabilities over all 2^n configurations.

Configurations are bitmasks (bit ``v`` set means vertex ``v`` is infected).
The self-loop-free fixation equations are solved by Gauss-Seidel sweeps in
order of increasing population count. A state's equation only references
states one level above or below, so all states of one level are updated
together without changing the Gauss-Seidel iterate.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Union

import numpy as np

from .errors import ConvergenceError, InputConstraintError, ParameterDomainError, SizeCapError
from .graphs.core import Graph, require_connected

DEFAULT_CAP = 22
TOLERANCE = 1e-13
MAX_SWEEPS = 10**6
_CACHE_ENTRIES = 1 << 24
_CHUNK = 1 << 16


@dataclass
class FixationTable:
    n: int
    values: np.ndarray
    r: float
    residual: float
    sweeps: int = 0

    def singleton(self, v: int) -> float:
        return float(self.values[1 << v])

    def per_vertex(self) -> np.ndarray:
        return self.values[1 << np.arange(self.n)]

    def graph_value(self) -> float:
        return float(self.per_vertex().mean())

    def __getitem__(self, infected) -> float:
        return float(self.values[to_mask(infected)])

    def summary(self) -> dict:
        return {
            "n": self.n,
            "r": self.r,
            "per_vertex": [float(v) for v in self.per_vertex()],
            "graph": self.graph_value(),
            "residual": self.residual,
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["bitmask", "probability"])
        for mask, p in enumerate(self.values):
            writer.writerow([mask, f"{p:.12g}"])
        return buf.getvalue()


def to_mask(infected) -> int:
    if isinstance(infected, (int, np.integer)):
        return int(infected)
    mask = 0
    for v in infected:
        mask |= 1 << int(v)
    return mask


def _check(g: Graph, r: float, cap: int) -> None:
    if not r > 0:
        raise ParameterDomainError(f"fitness r must be positive, got {r}")
    if g.n > cap:
        raise SizeCapError(f"exact solver is capped at n={cap} vertices (got n={g.n}); use Monte Carlo instead")
    require_connected(g)


def _levels(n: int) -> list[np.ndarray]:
    masks = np.arange(1 << n, dtype=np.int64)
    pop = np.zeros(1 << n, dtype=np.int64)
    for v in range(n):
        pop += (masks >> v) & 1
    order = np.argsort(pop, kind="stable")
    bounds = np.searchsorted(pop[order], np.arange(n + 2))
    return [order[bounds[k] : bounds[k + 1]] for k in range(n + 1)]


def _chunks(states: np.ndarray):
    for start in range(0, states.size, _CHUNK):
        yield states[start : start + _CHUNK]


def _effective_probs(states: np.ndarray, scaled_adj: np.ndarray, r: float) -> np.ndarray:
    """Row-normalised effective-step probabilities of flipping each vertex."""
    n = scaled_adj.shape[0]
    bits = ((states[:, None] >> np.arange(n)) & 1).astype(float)
    infect = r * (bits @ scaled_adj)
    disinfect = (1.0 - bits) @ scaled_adj
    w = np.where(bits > 0, disinfect, infect)
    return w / w.sum(axis=1, keepdims=True)


def _scaled_adjacency(g: Graph, weights: Optional[np.ndarray] = None) -> np.ndarray:
    # scaled[x, v] = A[x, v] * (1/deg x); the row vertex is the one acting
    temp = 1.0 / g.degree if weights is None else weights
    return g.adjacency_matrix().astype(float) * temp[:, None]


def _flip_index(states: np.ndarray, n: int) -> np.ndarray:
    return states[:, None] ^ (np.int64(1) << np.arange(n, dtype=np.int64))


def moran_residual(g: Graph, values: np.ndarray, r: float) -> float:
    """Max violation of the fixation equations over all interior states."""
    n = g.n
    if n == 1:
        return 0.0
    scaled = _scaled_adjacency(g)
    worst = 0.0
    for level in _levels(n)[1:n]:
        for states in _chunks(level):
            p = _effective_probs(states, scaled, r)
            rhs = (p * values[_flip_index(states, n)]).sum(axis=1)
            worst = max(worst, float(np.max(np.abs(values[states] - rhs))))
    return worst


def exact_fixation_all(
    g: Graph,
    r: float,
    *,
    cap: int = DEFAULT_CAP,
    tol: float = TOLERANCE,
    max_sweeps: int = MAX_SWEEPS,
) -> FixationTable:
    """Solve for the fixation probability of every configuration.

    Raises
    ------
    SizeCapError
        if ``g.n > cap``.
    ConvergenceError
        if the sweep budget runs out before successive sweeps agree to ``tol``.
    """
    _check(g, r, cap)
    n = g.n
    values = np.zeros(1 << n)
    values[-1] = 1.0
    if n == 1:
        return FixationTable(n, values, float(r), 0.0, 0)
    levels = _levels(n)[1:n]
    scaled = _scaled_adjacency(g)
    cached = None
    if (1 << n) * n <= _CACHE_ENTRIES:
        cached = [(_flip_index(s, n), _effective_probs(s, scaled, r)) for s in levels]

    delta = np.inf
    sweeps = 0
    while delta >= tol:
        if sweeps >= max_sweeps:
            raise ConvergenceError(f"Gauss-Seidel did not converge in {max_sweeps} sweeps", delta)
        delta = 0.0
        for k, level in enumerate(levels):
            if cached is not None:
                nbr, p = cached[k]
                new = (p * values[nbr]).sum(axis=1)
                delta = max(delta, float(np.max(np.abs(new - values[level]))))
                values[level] = new
                continue
            for states in _chunks(level):
                p = _effective_probs(states, scaled, r)
                new = (p * values[_flip_index(states, n)]).sum(axis=1)
                delta = max(delta, float(np.max(np.abs(new - values[states]))))
                values[states] = new
        sweeps += 1
    residual = moran_residual(g, values, r)
    return FixationTable(n, values, float(r), residual, sweeps)


def fixation_of_vertex(g: Graph, r: float, v: int, **kw) -> float:
    if not 0 <= v < g.n:
        raise InputConstraintError(f"vertex {v} out of range for n={g.n}")
    return exact_fixation_all(g, r, **kw).singleton(v)


def fixation_of_graph(g: Graph, r: float, **kw) -> float:
    return exact_fixation_all(g, r, **kw).graph_value()


@dataclass(frozen=True)
class WeightVector:
    """Per-vertex positive weights ("temperatures")."""

    d: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        if d.ndim != 1 or np.any(~np.isfinite(d)) or np.any(d <= 0):
            raise ParameterDomainError("weights must be positive and finite")
        object.__setattr__(self, "d", d)

    @classmethod
    def temperatures(cls, g: Graph) -> "WeightVector":
        return cls(1.0 / g.degree)

    @classmethod
    def uniform(cls, n: int, value: float = 1.0) -> "WeightVector":
        return cls(np.full(n, float(value)))


PairPolicy = Union[str, Mapping[int, tuple[int, int]], Callable[[int], tuple[int, int]]]


@dataclass
class L0Table:
    n: int
    values: np.ndarray
    r: float
    residual: float
    sweeps: int
    policy: str

    def singleton(self, v: int) -> float:
        return float(self.values[1 << v])

    def per_vertex(self) -> np.ndarray:
        return self.values[1 << np.arange(self.n)]

    def __getitem__(self, infected) -> float:
        return float(self.values[to_mask(infected)])


def _resolve_pairs(g: Graph, policy, states: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    getter = policy.__getitem__ if isinstance(policy, Mapping) else policy
    xs = np.empty(states.size, dtype=np.int64)
    ys = np.empty(states.size, dtype=np.int64)
    for j, s in enumerate(states.tolist()):
        try:
            x, y = getter(s)
        except KeyError:
            raise InputConstraintError(f"pair map has no entry for state {s:#x}") from None
        if not (s >> x & 1) or (s >> y & 1) or y not in g.adjacency[x]:
            raise InputConstraintError(f"pair ({x}, {y}) is not a boundary edge of state {s:#x}")
        xs[j], ys[j] = x, y
    return xs, ys


def solve_L0(
    g: Graph,
    r: float,
    w: WeightVector,
    policy: PairPolicy = "min_pair",
    *,
    cap: int = DEFAULT_CAP,
    tol: float = TOLERANCE,
    max_sweeps: int = MAX_SWEEPS,
) -> L0Table:
    """Solve the weighted two-transition system with one boundary pair per state.

    With ``policy="min_pair"`` each interior state takes the minimum, over all
    boundary edges ``(x, y)``, of
    ``(r d_x p(S+y) + d_y p(S-x)) / (r d_x + d_y)``; iteration starts from an
    all-zero interior, so it converges monotonically to the least fixed
    point. Otherwise ``policy`` maps every interior bitmask to its pair
    ``(x, y)`` (mapping or callable) and the linear system is solved as is.
    """
    if not r > 1:
        raise ParameterDomainError(f"the weighted lower-bound system requires r > 1, got {r}")
    _check(g, r, cap)
    if w.d.size != g.n:
        raise InputConstraintError(f"weight vector has length {w.d.size}, expected {g.n}")
    n = g.n
    d = w.d
    values = np.zeros(1 << n)
    values[-1] = 1.0
    if n == 1:
        return L0Table(n, values, float(r), 0.0, 0, "trivial")
    levels = _levels(n)[1:n]
    one = np.int64(1)

    if isinstance(policy, str):
        if policy != "min_pair":
            raise InputConstraintError(f"unknown pair policy {policy!r}")
        ex = np.array([u for u, v in g.edges] + [v for u, v in g.edges], dtype=np.int64)
        ey = np.array([v for u, v in g.edges] + [u for u, v in g.edges], dtype=np.int64)
        fwd = r * d[ex] / (r * d[ex] + d[ey])

        def update(k, states):
            s = states[:, None]
            valid = ((s >> ex) & 1).astype(bool) & ~((s >> ey) & 1).astype(bool)
            vals = fwd * values[s | (one << ey)] + (1 - fwd) * values[s & ~(one << ex)]
            return np.where(valid, vals, np.inf).min(axis=1)

        name = "min_pair"
        level_chunks = [list(_chunks(level)) for level in levels]
    else:
        pairs = [_resolve_pairs(g, policy, level) for level in levels]

        def update(k, states):
            xs, ys = pairs[k]
            fwd = r * d[xs] / (r * d[xs] + d[ys])
            return fwd * values[states | (one << ys)] + (1 - fwd) * values[states & ~(one << xs)]

        name = "pair_map"
        level_chunks = [[level] for level in levels]

    def sweep(write: bool) -> float:
        change = 0.0
        for k, chunks in enumerate(level_chunks):
            for states in chunks:
                new = update(k, states)
                change = max(change, float(np.max(np.abs(new - values[states]))))
                if write:
                    values[states] = new
        return change

    delta = np.inf
    sweeps = 0
    while delta >= tol:
        if sweeps >= max_sweeps:
            raise ConvergenceError(f"L0 iteration did not converge in {max_sweeps} sweeps", delta)
        delta = sweep(write=True)
        sweeps += 1
    return L0Table(n, values, float(r), sweep(write=False), sweeps, name)
