"""Closed-form fixation bounds and finite-size vertex classification."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InputConstraintError, ParameterDomainError
from .exact import DEFAULT_CAP, exact_fixation_all
from .graphs.core import Graph, require_connected

# keeps exactly-regular graphs neutral when the solver residual is ~1e-16
NEUTRAL_FLOOR = 1e-9


def _vertex(g: Graph, v: int) -> int:
    if not 0 <= v < g.n:
        raise InputConstraintError(f"vertex {v} out of range for n={g.n}")
    return v


def thermal_lower_bound(g: Graph, r: float, v: int) -> float:
    """``(r-1)/(r + deg v / deg_min)``; requires ``r > 1``."""
    if not r > 1:
        raise ParameterDomainError(f"the thermal bound requires r > 1 (got r={r})")
    require_connected(g)
    v = _vertex(g, v)
    if g.n == 1:
        return 1.0
    return min(1.0, max(0.0, (r - 1.0) / (r + g.degree[v] / g.deg_min)))


def isothermal_value(n: int, r: float) -> float:
    """Fixation probability of a single mutant on any regular graph of ``n`` vertices."""
    if n < 1:
        raise InputConstraintError(f"n must be positive (got {n})")
    if not r > 0:
        raise ParameterDomainError(f"r must be positive (got {r})")
    if r == 1:
        return 1.0 / n
    # (1 - 1/r) / (1 - r^-n) = -expm1(-log r) / -expm1(-n log r)
    log_r = math.log(r)
    num = -math.expm1(-log_r)
    if n * log_r > 745:
        return num
    if n * log_r < -709:
        # r < 1 with r^-n overflowing: value is (1/r - 1) r^n, i.e. vanishing
        return math.exp(math.log1p(-r) + (n - 1) * log_r)
    return num / -math.expm1(-n * log_r)


def _inverse_degree_sum(g: Graph, v: int, exclude: Optional[int] = None) -> float:
    return math.fsum(1.0 / g.degree[x] for x in g.adjacency[v] if x != exclude)


def single_mutant_upper_bound(g: Graph, r: float, v: int) -> float:
    """``r / (r + sum_{x in N(v)} 1/deg x)``: fixation counted once a second vertex is infected."""
    if not r > 0:
        raise ParameterDomainError(f"r must be positive (got {r})")
    require_connected(g)
    v = _vertex(g, v)
    if g.n == 1:
        return 1.0
    return r / (r + _inverse_degree_sum(g, v))


def pair_upper_bound(g: Graph, r: float) -> float:
    """Max over vertices ``v`` and neighbours ``u`` of ``2r^2 / (2r^2 + Q_v Q_uv)``.

    Taking the max over every ``v`` (not just the unknown maximiser of the
    fixation probability) keeps the result a valid upper bound on the
    random-start fixation probability.
    """
    if not r > 0:
        raise ParameterDomainError(f"r must be positive (got {r})")
    require_connected(g)
    if g.n < 2:
        raise InputConstraintError("pair bound needs at least two vertices")
    two_r2 = 2.0 * r * r
    best = 0.0
    for v in range(g.n):
        q_v = _inverse_degree_sum(g, v)
        for u in g.adjacency[v]:
            q_uv = _inverse_degree_sum(g, v, exclude=u) + _inverse_degree_sum(g, u, exclude=v)
            best = max(best, two_r2 / (two_r2 + q_v * q_uv))
    return best


AMPLIFYING, SUPPRESSING, NEUTRAL = "amplifying", "suppressing", "neutral"


@dataclass
class VertexBoundReport:
    n: int
    r: float
    method: str
    isothermal: float
    pair_ub: float
    thermal_lb: list
    single_mutant_ub: list
    value: list
    std_err: Optional[list]
    epsilon: float
    tags: list
    c: Optional[float] = None
    residual: Optional[float] = None
    notes: list = field(default_factory=list)

    @property
    def counts(self) -> dict:
        out = {AMPLIFYING: 0, SUPPRESSING: 0, NEUTRAL: 0}
        for t in self.tags:
            out[t] += 1
        return out

    @property
    def above_threshold(self) -> Optional[int]:
        """How many vertices exceed ``1 - c/n`` (only when ``c`` was supplied)."""
        if self.c is None:
            return None
        return int(sum(v > 1.0 - self.c / self.n for v in self.value))

    def sandwich_holds(self, tol: float = 1e-10) -> bool:
        if self.method != "exact":
            return True
        return all(
            lb - tol <= f <= ub + tol for lb, f, ub in zip(self.thermal_lb, self.value, self.single_mutant_ub)
        )

    def as_dict(self) -> dict:
        vertices = []
        for v in range(self.n):
            row = {
                "vertex": v,
                "thermal_lb": self.thermal_lb[v],
                "single_mutant_ub": self.single_mutant_ub[v],
                "tag": self.tags[v],
            }
            row["exact" if self.method == "exact" else "estimate"] = self.value[v]
            if self.std_err is not None:
                row["std_err"] = self.std_err[v]
            vertices.append(row)
        return {
            "n": self.n,
            "r": self.r,
            "method": self.method,
            "isothermal": self.isothermal,
            "pair_ub": self.pair_ub,
            "graph_value": float(np.mean(self.value)),
            "epsilon": self.epsilon,
            "residual": self.residual,
            "counts": self.counts,
            "c": self.c,
            "above_threshold": self.above_threshold,
            "sandwich_holds": self.sandwich_holds(),
            "vertices": vertices,
            "notes": list(self.notes),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["vertex", "thermal_lb", "value", "std_err", "single_mutant_ub", "tag"])
        for v in range(self.n):
            se = "" if self.std_err is None else f"{self.std_err[v]:.12g}"
            w.writerow(
                [
                    v,
                    f"{self.thermal_lb[v]:.12g}",
                    f"{self.value[v]:.12g}",
                    se,
                    f"{self.single_mutant_ub[v]:.12g}",
                    self.tags[v],
                ]
            )
        return buf.getvalue()


def classify_vertices(
    g: Graph,
    r: float,
    method: str = "exact",
    *,
    sim_params=None,
    c: Optional[float] = None,
    cap: int = DEFAULT_CAP,
    threads: Optional[int] = None,
) -> VertexBoundReport:
    """Tag each vertex against the regular-graph benchmark.

    ``method="exact"`` solves every configuration (``n <= cap``);
    ``method="mc"`` needs ``sim_params`` (a :class:`moranbounds.sim.SimParams`)
    and spends ``sim_params.runs`` runs per vertex.
    """
    if not r > 1:
        raise ParameterDomainError(f"classification requires r > 1 (got r={r})")
    require_connected(g)
    iso = isothermal_value(g.n, r)
    thermal = [thermal_lower_bound(g, r, v) for v in range(g.n)]
    smub = [single_mutant_upper_bound(g, r, v) for v in range(g.n)]
    pair = pair_upper_bound(g, r) if g.n >= 2 else 1.0
    notes = ["pair_ub maximises over every vertex, so it bounds the random-start value"]
    if method == "exact":
        table = exact_fixation_all(g, r, cap=cap)
        value = [float(x) for x in table.per_vertex()]
        std_err = None
        eps = max(2.0 * table.residual, NEUTRAL_FLOOR)
        residual = table.residual
    elif method == "mc":
        from .sim import estimate_fixation

        if sim_params is None:
            raise InputConstraintError("method='mc' needs sim_params")
        if sim_params.r != r:
            raise InputConstraintError(f"sim_params.r={sim_params.r} differs from r={r}")
        ests = [estimate_fixation(g, [v], sim_params, threads=threads) for v in range(g.n)]
        value = [e.p_hat for e in ests]
        std_err = [e.std_err for e in ests]
        eps = max(4.0 * max(std_err), NEUTRAL_FLOOR)
        residual = None
    else:
        raise InputConstraintError(f"unknown method {method!r} (expected 'exact' or 'mc')")
    tags = []
    for v, f in enumerate(value):
        e = eps if std_err is None else max(4.0 * std_err[v], NEUTRAL_FLOOR)
        tags.append(AMPLIFYING if f > iso + e else SUPPRESSING if f < iso - e else NEUTRAL)
    return VertexBoundReport(
        g.n, float(r), method, iso, pair, thermal, smub, value, std_err, eps, tags, c, residual, notes
    )
