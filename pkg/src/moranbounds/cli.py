"""Command-line interface.

Every command prints one JSON envelope on stdout:
``{schema, command, parameters, payload, wall_time, version}``. Errors go to
stderr with a nonzero exit code (2 input, 3 size cap, 4 invalid graph,
5 parameter domain).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Any, Optional, Sequence

import numba

from . import __version__
from .errors import InputConstraintError, MoranError

EXIT_OK = 0
EXIT_INPUT = 2


def _round(obj: Any) -> Any:
    """Round every float to 12 significant digits for stable output."""
    if isinstance(obj, float):
        return float(f"{obj:.12g}") if obj == obj and abs(obj) != float("inf") else None
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def load_schema(name: str) -> dict:
    """JSON Schema for ``envelope`` or a command's payload (``gen``, ``exact``, ...)."""
    from importlib.resources import files

    return json.loads(files("moranbounds.schemas").joinpath(f"{name}.v1.json").read_text())


def _set_threads(threads: Optional[int]) -> None:
    if threads is not None:
        if threads < 1:
            raise InputConstraintError(f"--threads must be positive (got {threads})")
        numba.set_num_threads(min(threads, numba.config.NUMBA_NUM_THREADS))


def _write(path: Optional[str], text: str) -> Optional[str]:
    if path is None:
        return None
    Path(path).write_text(text)
    return str(path)


# -- commands ---------------------------------------------------------------


def cmd_gen(args) -> dict:
    from .graphs import Family, GraphFamilySpec, serialize_edge_list

    kind = Family(args.family.replace("-", "_"))
    g = GraphFamilySpec(kind, args.n, args.phi).build()
    text = serialize_edge_list(g)
    if args.out is None:
        sys.stdout.write(text)
        return {}
    _write(args.out, text)
    return {"family": args.family, "n": args.n, "phi": args.phi, "vertices": g.n, "edges": g.m, "out": args.out}


def cmd_exact(args) -> dict:
    from .exact import exact_fixation_all
    from .graphs import read_edge_list

    g = read_edge_list(args.graph)
    table = exact_fixation_all(g, args.r, cap=args.cap)
    payload = {"n": g.n, "r": args.r, "graph": table.graph_value(), "residual": table.residual, "sweeps": table.sweeps}
    if args.per_vertex:
        payload["per_vertex"] = [float(v) for v in table.per_vertex()]
    if args.all_states:
        payload["all_states"] = _write(args.all_states, table.to_csv())
    return payload


def _parse_start(text: str):
    if text == "random":
        return "random"
    try:
        v = int(text)
    except ValueError:
        raise InputConstraintError(f"--start must be a vertex id or 'random' (got {text!r})") from None
    if v < 0:
        raise InputConstraintError(f"--start must be nonnegative (got {v})")
    return v


def cmd_simulate(args) -> dict:
    from .graphs import read_edge_list
    from .sim import SimParams, estimate_fixation, estimate_graph_fixation

    g = read_edge_list(args.graph)
    start = _parse_start(args.start)
    p = SimParams(args.r, args.seed, args.runs, args.max_steps)
    if start == "random":
        est = estimate_graph_fixation(g, p, naive=args.naive)
        payload = est.as_dict()
        payload["mean_steps"] = sum(e.mean_steps * e.runs for e in est.per_vertex) / payload["runs"]
    else:
        if start >= g.n:
            raise InputConstraintError(f"start vertex {start} out of range for n={g.n}")
        payload = estimate_fixation(g, [start], p, naive=args.naive).as_dict()
    payload["start"] = start
    payload["seed"] = args.seed
    return payload


def cmd_urchin(args) -> dict:
    from .urchin import (
        DOMINATION_CAP,
        EXACT_CAP,
        LumpedUrchinState,
        amplifier_constant,
        level_bound_checks,
        level_table,
        urchin_exact_table,
        verify_domination,
    )

    table = level_table(args.n, args.r)
    p1 = table.p1()
    applicable = args.r > 5
    c_r = amplifier_constant(args.r) if applicable else None
    threshold = 1.0 - c_r / args.n if applicable else None
    payload = {
        "n": args.n,
        "r": args.r,
        "p1": p1,
        "saturated_levels": int(table.saturated.sum()),
        "c_r_check": {
            "applicable": applicable,
            "c_r": c_r,
            "threshold": threshold,
            "pass": (p1 >= threshold) if applicable else None,
        },
    }
    if args.n <= DOMINATION_CAP:
        payload["domination"] = verify_domination(args.n, args.r).as_dict()
    if args.bounds:
        payload["level_bound_checks"] = {k: v.as_dict() for k, v in level_bound_checks(table).items()}
    if args.exact:
        if args.n > EXACT_CAP:
            from .errors import SizeCapError

            raise SizeCapError(f"--exact is capped at n={EXACT_CAP} (got n={args.n})")
        exact = urchin_exact_table(args.n, args.r)
        payload["exact_nose"] = exact[LumpedUrchinState.nose(args.n)]
        payload["exact_clique_vertex"] = exact[LumpedUrchinState.clique_vertex(args.n)]
    if args.csv:
        payload["table"] = _write(args.csv, table.to_csv())
    return payload


def cmd_bounds(args) -> dict:
    from .bounds import classify_vertices
    from .graphs import read_edge_list
    from .sim import SimParams

    g = read_edge_list(args.graph)
    params = SimParams(args.r, args.seed, args.runs) if args.method == "mc" else None
    report = classify_vertices(g, args.r, args.method, sim_params=params, c=args.c, cap=args.cap)
    payload = report.as_dict()
    if args.csv:
        payload["csv"] = _write(args.csv, report.to_csv())
    return payload


def cmd_suppressor(args) -> dict:
    from .suppressor import CliqueChainParams, clique_chain_csv, clique_chain_values, suppressor_bound_check

    payload = suppressor_bound_check(args.n, args.phi, args.r).as_dict()
    if args.csv:
        values = clique_chain_values(CliqueChainParams(args.n, args.phi, args.r))
        payload["csv"] = _write(args.csv, clique_chain_csv(values))
    return payload


# -- parser -----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors share the input-constraint exit code
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    from .exact import DEFAULT_CAP
    from .sim import DEFAULT_MAX_STEPS

    parser = _Parser(prog="moranbounds", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--threads", type=int, default=None, help="worker threads (results do not depend on it)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="write a graph family as an edge list")
    p.add_argument("family", choices=["complete", "cycle", "star", "path", "urchin", "phi-urchin"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--phi", type=int, default=None)
    p.add_argument("--out", default=None, help="output path (edge list goes to stdout if omitted)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("exact", help="exact fixation probabilities")
    p.add_argument("graph")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--per-vertex", action="store_true")
    p.add_argument("--all-states", metavar="CSV", default=None)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("simulate", help="Monte Carlo fixation estimate")
    p.add_argument("graph")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--start", default="random", help="vertex id or 'random'")
    p.add_argument("--runs", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    p.add_argument("--naive", action="store_true", help="use the reference sampler")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("urchin", help="urchin level table and nose lower bound")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--bounds", action="store_true", help="evaluate the per-level inequalities")
    p.add_argument("--exact", action="store_true", help="exact lumped fixation values (n <= 60)")
    p.add_argument("--csv", default=None, help="write the per-level table here")
    p.set_defaults(func=cmd_urchin)

    p = sub.add_parser("bounds", help="per-vertex bounds and classification")
    p.add_argument("graph")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--method", choices=["exact", "mc"], default="exact")
    p.add_argument("--runs", type=int, default=10_000, help="runs per vertex (mc)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--c", type=float, default=None, help="count vertices above 1 - c/n")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("suppressor", help="relaxed clique chain bound for phi-urchins")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--phi", type=int, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_suppressor)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> tuple[int, Optional[dict]]:
    """Parse and execute; returns ``(exit_code, envelope)``."""
    parser = build_parser()
    args = parser.parse_args(argv)
    params = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
    t0 = time.perf_counter()
    try:
        _set_threads(args.threads)
        payload = args.func(args)
    except MoranError as exc:
        print(f"moranbounds {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code, None
    except OSError as exc:
        print(f"moranbounds {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT, None
    if args.command == "gen" and args.out is None:
        return EXIT_OK, None
    envelope = {
        "schema": f"moranbounds/{args.command}.v1",
        "command": args.command,
        "parameters": params,
        "payload": payload,
        "wall_time": time.perf_counter() - t0,
        "version": __version__,
    }
    return EXIT_OK, _round(envelope)


def main(argv: Optional[Sequence[str]] = None) -> int:
    code, envelope = run(argv)
    if envelope is not None:
        print(json.dumps(envelope, indent=2))
    return code


if __name__ == "__main__":
    sys.exit(main())
