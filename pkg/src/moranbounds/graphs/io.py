"""Plain-text edge-list format.

Line 1 holds ``n m``; then ``m`` lines ``u v`` (0-indexed). Lines starting
with ``#`` and blank lines are ignored.
"""

from __future__ import annotations

from pathlib import Path

from ..errors import InputConstraintError
from .core import Graph, build_graph


def parse_edge_list(text: str) -> Graph:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InputConstraintError(f"line {lineno}: expected two integers, got {raw!r}")
        try:
            rows.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise InputConstraintError(f"line {lineno}: expected two integers, got {raw!r}") from None
    if not rows:
        raise InputConstraintError("empty edge-list file (missing 'n m' header)")
    (n, m), body = rows[0], rows[1:]
    if len(body) != m:
        raise InputConstraintError(f"header declares m={m} edges but {len(body)} edge lines follow")
    return build_graph(n, body)


def serialize_edge_list(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines += [f"{u} {v}" for u, v in g.edges]
    return "\n".join(lines) + "\n"


def read_edge_list(path) -> Graph:
    return parse_edge_list(Path(path).read_text())


def write_edge_list(g: Graph, path) -> None:
    Path(path).write_text(serialize_edge_list(g))
