"""Command-line entry point: ``fairload <subcommand> ...``.

Every subcommand reads JSON, writes JSON and exits with 0 on success, 1 when
the answer is a failure (violated check, infeasible objective, invalid
instance) and 2 on usage or parse errors. Output depends only on the inputs
and flags; ``--meta`` writes a separate metadata line to standard error.
"""

from __future__ import annotations

import argparse
import json
import platform
import sys
import time
from fractions import Fraction
from typing import List, Optional, Sequence

from . import __version__, lp
from .errors import FairloadError
from .expr import edge_key, parse_edge_key
from .generate import GenParams, gen_random_instance
from .instance import (Assignment, BipartiteInstance, assignment_from_json, assignment_to_json,
                       evaluate_loads, instance_from_json, instance_to_json, load_report_to_json,
                       validate_instance)
from .integral import DEFAULT_CAP, IntegralSolutionSet, integral_min_lmax
from .rational import format_number
from .tree import bfs_tree, equalize_connected, fix_loads, rooted_view
from .verify import GENERAL_TOL, run_suite, summarize

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _load_json(path: str):
    text = _read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        name = "<stdin>" if path == "-" else path
        raise FairloadError("PARSE_ERROR",
                            f"{name}: {exc.msg} at line {exc.lineno} column {exc.colno}") from exc


def _load_instance(path: str) -> tuple:
    raw = _load_json(path)
    return instance_from_json(raw), raw


def _int_or_str(v):
    """Integers stay JSON numbers; other rationals become "p/q" strings."""
    if isinstance(v, int):
        return v
    if isinstance(v, Fraction) and v.denominator == 1:
        return v.numerator
    return format_number(v)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


# --- subcommands --------------------------------------------------------------

def cmd_validate(args, out) -> int:
    inst, _ = _load_instance(args.instance)
    report = validate_instance(inst)
    out.write(_dump({"ok": report.ok, "digest": inst.digest(),
                     "violations": [{"code": v.code, "message": v.message} for v in report.violations]}))
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_solve(args, out) -> int:
    inst, _ = _load_instance(args.instance)
    res = lp.OBJECTIVES[args.objective](inst)
    out.write(_dump(lp.solve_result_to_json(res, inst)))
    if res.optimal:
        return EXIT_OK
    # an infeasible equal-load test is an answer, not a failure
    return EXIT_OK if args.objective == "equal-feas" and res.status == lp.INFEASIBLE else EXIT_FAIL


def default_start(inst: BipartiteInstance) -> Assignment:
    """The point with every non-root worker load 0 on the BFS tree and 0 on the other edges."""
    root = min(inst.workers)
    tree = bfs_tree(inst, root)
    kept = set(tree)
    view = rooted_view(inst, tree, root, {e: Fraction(0) for e in inst.edges if e not in kept})
    return fix_loads(view, {w: Fraction(0) for w in inst.workers if w != root})


def cmd_equalize(args, out) -> int:
    inst, raw = _load_instance(args.instance)
    if args.start:
        x0 = assignment_from_json(_load_json(args.start), inst)
    elif "start" in raw:
        x0 = assignment_from_json(raw["start"], inst)
    else:
        x0 = default_start(inst)
    tree = None
    if args.tree == "given":
        keys = raw.get("spanning_tree")
        if not isinstance(keys, list):
            raise UsageError("--tree given needs a 'spanning_tree' list of \"task:worker\" keys in the instance")
        tree = [parse_edge_key(k) for k in keys]
    res = equalize_connected(inst, x0, tree_policy=args.tree, tree=tree, root=args.root,
                             tol=args.tol, method=args.method)
    out.write(_dump({
        "improved": res.improved,
        "lambda": format_number(res.lam),
        "root": res.root,
        "tree": [edge_key(e) for e in res.tree_edges],
        "warn_negative": res.warn_negative,
        "start": assignment_to_json(x0, inst),
        "start_loads": load_report_to_json(evaluate_loads(inst, x0)),
        "assignment": assignment_to_json(res.x, inst),
        "loads": load_report_to_json(evaluate_loads(inst, res.x)),
    }))
    return EXIT_OK


def cmd_enumerate(args, out) -> int:
    inst, _ = _load_instance(args.instance)
    sols = IntegralSolutionSet(inst, cap=args.cap)
    if args.dump:
        for x, loads in sols.with_loads():
            out.write(json.dumps({"x": list(x), "loads": [_int_or_str(v) for v in loads]}) + "\n")
    s = sols.summary()
    best = integral_min_lmax(inst, cap=args.cap)
    summary = {
        "count": s.count,
        "edges": [edge_key(e) for e in inst.edges],
        "min_lmax": _int_or_str(best.value),
        "argmin_count": best.argmin_count,
        "argmin": None if best.argmin is None else [list(x) for x in best.argmin],
        "min_spread_among_argmin": _int_or_str(best.min_spread_among_argmin),
        "max_lmin": _int_or_str(s.max_lmin),
        "min_spread": _int_or_str(s.min_spread),
        "min_spread_witness": None if s.min_spread_witness is None else list(s.min_spread_witness),
    }
    if args.pareto:
        summary["pareto"] = [[_int_or_str(a), _int_or_str(b)] for a, b in s.pareto]
    out.write(json.dumps(summary) + "\n" if args.dump else _dump(summary))
    return EXIT_OK


def parse_seeds(text: str) -> range:
    """``"a..b"`` (inclusive) or a single seed."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError as exc:
        raise UsageError(f"--seeds: expected 'a..b', got {text!r}") from exc
    if hi < lo:
        raise UsageError(f"--seeds: empty range {text!r}")
    return range(lo, hi + 1)


def cmd_verify(args, out) -> int:
    seeds = parse_seeds(args.seeds)
    reports = run_suite(args.theorem, seeds, trials=args.trials, tol=args.tol, jobs=args.jobs)
    counts = summarize(reports)
    out.write(json.dumps([r.to_json() for r in reports]) + "\n")
    out.write(json.dumps({"summary": {"theorem": args.theorem, "seeds": args.seeds, **counts}}) + "\n")
    return EXIT_FAIL if counts["VIOLATED"] else EXIT_OK


def cmd_gen(args, out) -> int:
    text = args.params
    if text.startswith("@"):
        text = _read_text(text[1:])
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FairloadError("PARSE_ERROR",
                            f"--params: {exc.msg} at line {exc.lineno} column {exc.colno}") from exc
    if not isinstance(obj, dict):
        raise FairloadError("PARSE_ERROR", "--params must be a JSON object")
    if args.seed is not None:
        obj["seed"] = args.seed
    try:
        params = GenParams.from_json(obj)
    except (TypeError, ValueError) as exc:
        raise FairloadError("PARSE_ERROR", f"--params: {exc}") from exc
    out.write(_dump(instance_to_json(gen_random_instance(params))))
    return EXIT_OK


# --- plumbing -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fairload", description="Fair load allocation on bipartite graphs.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-o", "--output", default="-", help="output file (default: standard output)")
    p.add_argument("--meta", action="store_true",
                   help="write a metadata line (version, time, host) to standard error")
    # the same flags after the subcommand; SUPPRESS keeps the top-level values otherwise
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    common.add_argument("--meta", action="store_true", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")
    add = sub.add_parser

    def add_parser(name, **kw):
        return add(name, parents=[common], **kw)

    sub.add_parser = add_parser

    def with_instance(sp):
        sp.add_argument("instance", nargs="?", default="-", help="instance JSON file ('-' for stdin)")
        return sp

    sp = with_instance(sub.add_parser("validate", help="check an instance against its invariants"))
    sp.set_defaults(func=cmd_validate)

    sp = with_instance(sub.add_parser("solve", help="exact LP objectives (linear instances)"))
    sp.add_argument("--objective", required=True, choices=sorted(lp.OBJECTIVES))
    sp.set_defaults(func=cmd_solve)

    sp = with_instance(sub.add_parser("equalize", help="equal-load point of a connected instance"))
    sp.add_argument("--start", help="assignment JSON for the start point")
    sp.add_argument("--tree", choices=("bfs", "given"), default="bfs")
    sp.add_argument("--root", help="root worker (default: smallest worker id)")
    sp.add_argument("--tol", type=float, default=GENERAL_TOL)
    sp.add_argument("--method", choices=("brent", "bisect"), default="brent")
    sp.set_defaults(func=cmd_equalize)

    sp = with_instance(sub.add_parser("enumerate", help="integer points of a linear instance"))
    sp.add_argument("--pareto", action="store_true", help="include the (lmax, lmin) Pareto front")
    sp.add_argument("--dump", action="store_true", help="stream every point as a JSON line")
    sp.add_argument("--cap", type=int, default=DEFAULT_CAP)
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("verify", help="seeded theorem checks")
    sp.add_argument("--theorem", required=True, choices=("prop1", "thm1", "thm2"))
    sp.add_argument("--seeds", required=True, help="inclusive range 'a..b'")
    sp.add_argument("--trials", type=int, default=2, help="extra min-spread vertices checked per instance")
    sp.add_argument("--tol", type=float, default=GENERAL_TOL)
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("gen", help="seeded random instance")
    sp.add_argument("--params", required=True, help="generator parameters as JSON, or @FILE")
    sp.add_argument("--seed", type=int)
    sp.set_defaults(func=cmd_gen)
    return p


def _error(code: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": code, "message": message}) + "\n")


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse has already printed the offending flag
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    if args.meta:
        sys.stderr.write(json.dumps({"meta": {"version": __version__, "time": time.time(),
                                              "host": platform.node(), "python": platform.python_version(),
                                              "argv": list(argv if argv is not None else sys.argv[1:])}})
                         + "\n")
    try:
        if args.output == "-":
            return args.func(args, sys.stdout)
        with open(args.output, "w", encoding="utf-8") as fh:
            return args.func(args, fh)
    except UsageError as exc:
        _error("USAGE", str(exc))
        return EXIT_USAGE
    except FairloadError as exc:
        _error(exc.code, exc.message)
        return EXIT_USAGE if exc.code in ("PARSE_ERROR", "KEY_MISMATCH") else EXIT_FAIL
    except OSError as exc:
        _error("IO_ERROR", str(exc))
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())
