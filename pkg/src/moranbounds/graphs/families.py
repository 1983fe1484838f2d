"""Benchmark graph families and the (phi-)urchin constructions.

Vertex numbering is fixed: star center is 0; in urchin-type graphs the clique
comes first and the independent set ("noses") second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Optional

from ..errors import InputConstraintError
from .core import Graph, build_graph


class Family(str, Enum):
    complete = "complete"
    cycle = "cycle"
    star = "star"
    path = "path"
    urchin = "urchin"
    phi_urchin = "phi_urchin"


BENCHMARKS = (Family.complete, Family.cycle, Family.star, Family.path)


@dataclass(frozen=True)
class GraphFamilySpec:
    kind: Family
    n: int
    phi: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Family(self.kind))
        if (self.phi is not None) != (self.kind is Family.phi_urchin):
            raise InputConstraintError("phi is required for phi_urchin and forbidden for other families")
        if self.kind is Family.phi_urchin:
            check_phi_urchin(self.n, self.phi)

    def build(self) -> Graph:
        if self.kind is Family.urchin:
            return make_urchin(self.n)
        if self.kind is Family.phi_urchin:
            return make_phi_urchin(self.n, self.phi)
        return make_benchmark(self)


def make_benchmark(spec: GraphFamilySpec) -> Graph:
    kind, n = spec.kind, spec.n
    if kind not in BENCHMARKS:
        raise InputConstraintError(f"{kind.value} is not a benchmark family")
    if n < 1:
        raise InputConstraintError(f"{kind.value} needs n >= 1, got {n}")
    if kind is Family.complete:
        edges = list(combinations(range(n), 2))
    elif kind is Family.cycle:
        if n < 3:
            raise InputConstraintError(f"cycle needs n >= 3, got {n}")
        edges = [(i, (i + 1) % n) for i in range(n)]
    elif kind is Family.star:
        edges = [(0, i) for i in range(1, n)]
    else:
        edges = [(i, i + 1) for i in range(n - 1)]
    return build_graph(n, edges)


def complete_graph(n: int) -> Graph:
    return make_benchmark(GraphFamilySpec(Family.complete, n))


def cycle_graph(n: int) -> Graph:
    return make_benchmark(GraphFamilySpec(Family.cycle, n))


def star_graph(n: int) -> Graph:
    return make_benchmark(GraphFamilySpec(Family.star, n))


def path_graph(n: int) -> Graph:
    return make_benchmark(GraphFamilySpec(Family.path, n))


def make_urchin(n: int) -> Graph:
    """Urchin graph: clique ``0..n-1``, nose ``n+j`` matched to clique vertex ``j``."""
    if n < 1:
        raise InputConstraintError(f"urchin needs n >= 1, got {n}")
    edges = list(combinations(range(n), 2))
    edges += [(j, n + j) for j in range(n)]
    return build_graph(2 * n, edges)


def check_phi_urchin(n: int, phi: int) -> tuple[int, int]:
    """Validate phi-urchin parameters; return (clique size, nose count)."""
    if phi is None or int(phi) != phi:
        raise InputConstraintError(f"phi must be an integer, got {phi!r}")
    if phi < 2:
        raise InputConstraintError(f"phi must be >= 2, got {phi}")
    if phi > math.isqrt(n):
        raise InputConstraintError(f"phi <= sqrt(n) violated: phi={phi}, n={n}")
    if n % (phi + 1):
        raise InputConstraintError(f"(phi+1)={phi + 1} does not divide n={n}")
    clique = n // (phi + 1)
    if clique < phi:
        raise InputConstraintError(
            f"clique size n/(phi+1)={clique} < phi={phi}: noses cannot have phi distinct clique neighbors"
        )
    return clique, n - clique


def make_phi_urchin(n: int, phi: int) -> Graph:
    """Clique on ``n/(phi+1)`` vertices plus an independent set of noses.

    Nose ``j`` (vertex ``clique + j``) is wired to clique vertices
    ``(j + t) mod clique`` for ``t = 0..phi-1``; every clique vertex then has
    exactly ``phi**2`` nose neighbours.
    """
    clique, noses = check_phi_urchin(n, phi)
    edges = list(combinations(range(clique), 2))
    for j in range(noses):
        edges += [((j + t) % clique, clique + j) for t in range(phi)]
    return build_graph(n, edges)
