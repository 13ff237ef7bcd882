"""Command-line front end.

Exit codes: 0 success, 2 input parse error, 3 enumeration budget exceeded,
4 verification failure, 5 cache conflict, 6 unusable cache file.
"""

from __future__ import annotations

import argparse
import inspect
import json
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from .assignments import PlaquetteAssignment
from .enumerator import DEFAULT_BUDGET, BudgetExceeded, enumerate_gluings
from .loops import Loop, LoopParseError
from .maps import weight_infinity
from .solver import CacheConflict, CacheError, MemoTable, Solver
from .suites import SUITES

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_BUDGET = 3
EXIT_VERIFY = 4
EXIT_CONFLICT = 5
EXIT_CACHE = 6

CACHE_ENV = "LATTICELOOP_CACHE"


class InputError(ValueError):
    """Malformed user input; the message carries line and column."""


def _dumps(doc: Any) -> str:
    return json.dumps(doc, separators=(",", ":"), sort_keys=True)


def parse_loop(text: str, dim: int) -> Loop:
    try:
        return Loop.parse(text, dim)
    except LoopParseError as exc:
        col = exc.column if exc.column is not None else 1
        raise InputError(f"loop: line 1, column {col}: {exc}") from None


def parse_beta(text: str) -> Fraction | float:
    """Decimal or ``a/b`` text parses exactly; a trailing ``f`` asks for floating point."""
    try:
        if text.endswith("f"):
            return float(text[:-1])
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"beta: line 1, column 1: cannot parse {text!r}") from None


def read_assignment(path: str, dim: int) -> PlaquetteAssignment:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if isinstance(data, dict):
        data = data.get("K", data.get("assignment"))
    if not isinstance(data, list):
        raise InputError(f"{path}: line 1, column 1: expected a list of plaquettes")
    try:
        K = PlaquetteAssignment.from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: line 1, column 1: {exc}") from None
    if any(p.dim != dim for p in K):
        raise InputError(f"{path}: line 1, column 1: plaquette dimension differs from --dim {dim}")
    return K


def _cache_path(args: argparse.Namespace) -> str | None:
    return args.cache or os.environ.get(CACHE_ENV) or None


def _load_memo(path: str | None, dim: int) -> MemoTable:
    if path and Path(path).exists():
        return MemoTable.load(path, dim)
    return MemoTable(dim)


# --- commands -----------------------------------------------------------------------------


def cmd_series(args: argparse.Namespace) -> int:
    loop = parse_loop(args.loop, args.dim)
    beta = parse_beta(args.beta) if args.beta is not None else None
    path = _cache_path(args)
    solver = Solver(args.dim, _load_memo(path, args.dim))
    series = solver.phi_series(loop, args.amax, jobs=args.jobs)
    doc = series.to_json(args.dim, loop)
    if beta is not None:
        ev = series.evaluate(beta)
        doc["eval"] = {
            "beta": str(beta),
            "value": str(ev.value),
            "last_area": ev.last_area,
            "last_term": str(ev.last_term),
            "caveat": ev.caveat,
        }
    if path:
        solver.memo.save(path)
    if args.format == "table":
        print(f"loop {loop.text()}  d={args.dim}  a_max={args.amax}")
        for c in doc["coefficients"]:
            print(f"{c['area']:>4}  {c['coeff']}")
        if beta is not None:
            print(f"beta={doc['eval']['beta']}  value={doc['eval']['value']}")
    else:
        print(_dumps(doc))
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    fn = SUITES[args.suite]
    params = inspect.signature(fn).parameters
    kwargs: dict[str, Any] = {}
    if "dim" in params:
        kwargs["dim"] = args.dim
    elif args.dim != 2:
        raise InputError(f"--dim: line 1, column 1: suite {args.suite} runs in d=2 only")
    opts = {"a_max": args.amax, "max_len": args.max_len, "seed": args.seed, "budget": args.budget, "n": args.n}
    for k, v in opts.items():
        if v is not None and k in params:
            kwargs[k] = v
    res = fn(**kwargs)
    if args.format == "table":
        print(f"{res.name}: {'PASS' if res.ok else 'FAIL'} ({res.checked} checks, {len(res.failures)} failures)")
        for f in res.failures:
            print("  " + _dumps(f))
    else:
        print(_dumps(res.to_json()))
    return EXIT_OK if res.ok else EXIT_VERIFY


def cmd_enumerate(args: argparse.Namespace) -> int:
    loop = parse_loop(args.loop, args.dim)
    K = read_assignment(args.assignment, args.dim)
    cls = args.cls.upper()
    en = enumerate_gluings(loop, K, cls, args.budget)
    lines = []
    total = 0
    for m in en.maps:
        w = weight_infinity(m)
        total += w
        t = m.topology()
        rec = {"map": m.to_json(), "weight": str(w), "topology": t._asdict()}
        lines.append(_dumps(rec))
    summary = _dumps({"class": cls, "count": len(en.maps), "labelled": en.labelled, "sum": str(total)})
    if args.dump:
        Path(args.dump).write_text("".join(line + "\n" for line in lines))
    else:
        for line in lines:
            print(line)
    print(summary)
    return EXIT_OK


def cmd_cache(args: argparse.Namespace) -> int:
    if args.action == "inspect":
        for path in args.paths:
            t = MemoTable.load(path)
            print(_dumps({"path": path, "dim": t.dim, "entries": len(t)}))
    elif args.action == "clear":
        for path in args.paths:
            t = MemoTable.load(path)
            MemoTable(t.dim).save(path)
            print(_dumps({"path": path, "dim": t.dim, "entries": 0}))
    else:
        if len(args.paths) < 2:
            raise InputError("cache merge: line 1, column 1: need OUTPUT and at least one INPUT")
        out, inputs = args.paths[0], args.paths[1:]
        tables = [MemoTable.load(p) for p in inputs]
        merged = MemoTable.load(out) if Path(out).exists() else MemoTable(tables[0].dim)
        for t in tables:
            merged.update(t)
        merged.save(out)
        print(_dumps({"path": out, "dim": merged.dim, "entries": len(merged)}))
    return EXIT_OK


# --- argument parsing ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dim", type=int, default=2)
    common.add_argument("--format", choices=("json", "table"), default="json")
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    common.add_argument("--cache", default=None)
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="latticeloop", description="Exact large-N Wilson loop series on Z^d.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("series", parents=[common], help="beta-series coefficients of a loop")
    s.add_argument("--loop", required=True)
    s.add_argument("--amax", "--max-area", dest="amax", type=int, default=3)
    s.add_argument("--beta", default=None)
    s.set_defaults(func=cmd_series)

    v = sub.add_parser("verify", parents=[common], help="run a self-verification suite")
    v.add_argument("--suite", choices=sorted(SUITES), required=True)
    v.add_argument("--amax", "--max-area", dest="amax", type=int, default=None)
    v.add_argument("--max-len", type=int, default=None)
    v.add_argument("--n", type=int, default=None, help="instance count for randomized suites")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("enumerate", parents=[common], help="dump the maps of one class")
    e.add_argument("--loop", required=True)
    e.add_argument("--assignment", required=True, help="JSON list of plaquettes with counts")
    e.add_argument("--class", dest="cls", choices=("all", "pm", "npm"), default="npm")
    e.add_argument("--dump", default=None, help="write map JSON lines here instead of stdout")
    e.set_defaults(func=cmd_enumerate)

    c = sub.add_parser("cache", help="inspect, clear or merge cache files")
    c.add_argument("action", choices=("inspect", "clear", "merge"))
    c.add_argument("paths", nargs="+")
    c.set_defaults(func=cmd_cache)
    return p


def _check(args: argparse.Namespace) -> None:
    for name in ("dim", "amax", "jobs", "budget", "max_len", "n"):
        v = getattr(args, name, None)
        if v is not None and v < (2 if name == "dim" else 1):
            raise InputError(f"--{name.replace('_', '-')}: line 1, column 1: value {v} out of range")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _check(args)
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except CacheConflict as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFLICT
    except CacheError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CACHE


if __name__ == "__main__":
    sys.exit(main())
