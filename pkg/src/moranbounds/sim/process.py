"""Monte Carlo simulation of the generalized Moran process.

Only state-changing ("effective") steps are simulated: from configuration S
the next flipped vertex is drawn with probability proportional to its flip
weight, which is ``r/deg x`` summed over infected neighbours ``x`` for a clean
vertex and ``1/deg y`` summed over clean neighbours ``y`` for an infected one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numba
import numpy as np

from ..errors import AllRunsTimedOut, InputConstraintError, ParameterDomainError
from ..graphs.core import Graph, require_connected
from . import kernels
from .rng import _MASK, CounterStream

DEFAULT_MAX_STEPS = 10**9
_OUTCOME_NAMES = {kernels.FIXATION: "fixation", kernels.EXTINCTION: "extinction", kernels.TIMEOUT: "timeout"}


@dataclass(frozen=True)
class Configuration:
    """Infected vertex set plus its boundary ``{(x, y) in E : x infected, y clean}``."""

    infected: frozenset
    boundary: frozenset

    @classmethod
    def of(cls, g: Graph, infected: Iterable[int]) -> "Configuration":
        s = frozenset(int(v) for v in infected)
        for v in s:
            if not 0 <= v < g.n:
                raise InputConstraintError(f"vertex {v} out of range for n={g.n}")
        return cls(s, cls.compute_boundary(g, s))

    @staticmethod
    def compute_boundary(g: Graph, infected: frozenset) -> frozenset:
        return frozenset((x, y) for x in infected for y in g.adjacency[x] if y not in infected)

    def is_absorbing(self, g: Graph) -> bool:
        return not self.infected or len(self.infected) == g.n

    def flip(self, g: Graph, v: int) -> "Configuration":
        """Toggle ``v``; the boundary is patched locally around ``v``."""
        boundary = set(self.boundary)
        if v in self.infected:
            infected = self.infected - {v}
            for y in g.adjacency[v]:
                boundary.discard((v, y))
                if y in infected:
                    boundary.add((y, v))
        else:
            infected = self.infected | {v}
            for y in g.adjacency[v]:
                boundary.discard((y, v))
                if y not in infected:
                    boundary.add((v, y))
        return Configuration(frozenset(infected), frozenset(boundary))


def flip_weights(g: Graph, c: Configuration, r: float) -> dict[int, float]:
    """Unnormalised probability of flipping each vertex in one effective step."""
    weights: dict[int, float] = {}
    for x, y in c.boundary:
        weights[y] = weights.get(y, 0.0) + r / g.degree[x]
        weights[x] = weights.get(x, 0.0) + 1.0 / g.degree[y]
    return weights


def step_effective(g: Graph, c: Configuration, r: float, rng) -> Configuration:
    """Sample the next state-changing transition.

    ``rng`` is anything with a ``random()`` method returning a float in
    ``[0, 1)`` (a :class:`CounterStream`, ``numpy.random.Generator``, ...).
    """
    if c.is_absorbing(g):
        raise InputConstraintError("configuration is absorbing; no effective step exists")
    weights = flip_weights(g, c, r)
    order = sorted(weights)
    target = rng.random() * math.fsum(weights.values())
    acc = 0.0
    for v in order:
        acc += weights[v]
        if target < acc:
            return c.flip(g, v)
    return c.flip(g, order[-1])


@dataclass(frozen=True)
class SimParams:
    r: float
    seed: int = 0
    runs: int = 10_000
    max_steps: int = DEFAULT_MAX_STEPS

    def __post_init__(self):
        if not (self.r > 0 and math.isfinite(self.r)):
            raise ParameterDomainError(f"fitness r must be positive and finite, got {self.r}")
        if int(self.runs) != self.runs or self.runs < 1:
            raise InputConstraintError(f"runs must be a positive integer, got {self.runs}")
        if self.max_steps < 1:
            raise InputConstraintError(f"max_steps must be positive, got {self.max_steps}")


@dataclass(frozen=True)
class RunOutcome:
    outcome: str
    steps: int


@dataclass(frozen=True)
class Estimate:
    """Binomial estimate of a fixation probability.

    ``runs`` counts completed runs only; timed-out runs are reported in
    ``timeouts`` and excluded from every statistic.
    """

    p_hat: float
    std_err: float
    ci95: tuple[float, float]
    runs: int
    fixations: int
    mean_steps: float
    timeouts: int = 0
    seed: int = 0

    @classmethod
    def from_counts(cls, fixations: int, runs: int, mean_steps: float, timeouts: int = 0, seed: int = 0):
        p = fixations / runs
        se = math.sqrt(p * (1.0 - p) / runs)
        ci = (max(0.0, p - 1.96 * se), min(1.0, p + 1.96 * se))
        return cls(p, se, ci, runs, fixations, mean_steps, timeouts, seed)

    def within(self, value: float, sigmas: float = 4.0) -> bool:
        return abs(self.p_hat - value) <= sigmas * self.std_err

    def as_dict(self) -> dict:
        return {
            "p_hat": self.p_hat,
            "std_err": self.std_err,
            "ci95": list(self.ci95),
            "runs": self.runs,
            "fixations": self.fixations,
            "mean_steps": self.mean_steps,
            "timeouts": self.timeouts,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class GraphEstimate:
    """Random-start estimate: mean of per-vertex estimates."""

    p_hat: float
    std_err: float
    ci95: tuple[float, float]
    per_vertex: tuple = field(repr=False)

    def as_dict(self) -> dict:
        return {
            "p_hat": self.p_hat,
            "std_err": self.std_err,
            "ci95": list(self.ci95),
            "runs": sum(e.runs for e in self.per_vertex),
            "fixations": sum(e.fixations for e in self.per_vertex),
            "timeouts": sum(e.timeouts for e in self.per_vertex),
            "per_vertex": [e.as_dict() for e in self.per_vertex],
        }


def _start_row(g: Graph, start: Iterable[int]) -> np.ndarray:
    row = np.zeros(g.n, dtype=np.uint8)
    for v in start:
        v = int(v)
        if not 0 <= v < g.n:
            raise InputConstraintError(f"start vertex {v} out of range for n={g.n}")
        row[v] = 1
    return row


def _inv_degree(g: Graph) -> np.ndarray:
    return 1.0 / np.maximum(g.degree, 1).astype(float)


def _seed64(seed: int) -> np.uint64:
    return np.uint64(int(seed) & _MASK)


def _run_batch(g, params, starts, start_of_run, naive=False, threads=None):
    if threads is not None:
        numba.set_num_threads(max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS)))
    return kernels.batch_runs(
        g.indptr,
        g.indices,
        _inv_degree(g),
        float(params.r),
        starts,
        start_of_run,
        _seed64(params.seed),
        np.int64(0),
        np.int64(params.max_steps),
        naive,
    )


def _summarize(outcomes: np.ndarray, steps: np.ndarray, seed: int) -> Estimate:
    done = outcomes != kernels.TIMEOUT
    completed = int(done.sum())
    timeouts = outcomes.size - completed
    if completed == 0:
        raise AllRunsTimedOut(f"all {outcomes.size} runs hit the step cap")
    fixations = int((outcomes == kernels.FIXATION).sum())
    return Estimate.from_counts(fixations, completed, float(steps[done].mean()), timeouts, seed)


def run_to_absorption(g: Graph, start: Iterable[int], p: SimParams, run_index: int) -> RunOutcome:
    """Simulate one run; the stream is a pure function of ``(p.seed, run_index)``."""
    row = _start_row(g, start)
    if 0 < row.sum() < g.n:
        require_connected(g)
    from .rng import stream_key

    key = np.uint64(stream_key(int(p.seed) & _MASK, int(run_index)))
    o, s = kernels.run_effective(g.indptr, g.indices, _inv_degree(g), float(p.r), row, key, np.int64(p.max_steps))
    return RunOutcome(_OUTCOME_NAMES[int(o)], int(s))


def estimate_fixation(
    g: Graph, start: Iterable[int], p: SimParams, *, naive: bool = False, threads: Optional[int] = None
) -> Estimate:
    """Estimate the fixation probability of the infected set ``start``.

    ``naive=True`` switches to the reference sampler that keeps no-op steps;
    it exists for cross-checking only.
    """
    require_connected(g)
    starts = _start_row(g, start)[None, :]
    start_of_run = np.zeros(p.runs, dtype=np.int64)
    outcomes, steps = _run_batch(g, p, starts, start_of_run, naive, threads)
    return _summarize(outcomes, steps, p.seed)


def split_runs(runs: int, n: int) -> list[int]:
    """Even split of ``runs`` over ``n`` starts; the remainder goes to the lowest indices."""
    base, extra = divmod(runs, n)
    return [base + (1 if v < extra else 0) for v in range(n)]


def estimate_graph_fixation(
    g: Graph, p: SimParams, *, naive: bool = False, threads: Optional[int] = None
) -> GraphEstimate:
    """Estimate the random-start fixation probability and its per-vertex breakdown."""
    require_connected(g)
    if p.runs < g.n:
        raise InputConstraintError(f"need at least one run per vertex (runs={p.runs} < n={g.n})")
    counts = split_runs(p.runs, g.n)
    starts = np.eye(g.n, dtype=np.uint8)
    start_of_run = np.repeat(np.arange(g.n, dtype=np.int64), counts)
    outcomes, steps = _run_batch(g, p, starts, start_of_run, naive, threads)
    bounds = np.concatenate(([0], np.cumsum(counts)))
    per_vertex = tuple(
        _summarize(outcomes[bounds[v] : bounds[v + 1]], steps[bounds[v] : bounds[v + 1]], p.seed) for v in range(g.n)
    )
    mean = float(np.mean([e.p_hat for e in per_vertex]))
    se = math.sqrt(sum(e.std_err**2 for e in per_vertex)) / g.n
    ci = (max(0.0, mean - 1.96 * se), min(1.0, mean + 1.96 * se))
    return GraphEstimate(mean, se, ci, per_vertex)
