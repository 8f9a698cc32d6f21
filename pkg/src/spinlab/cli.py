"""Command-line runner: identity reports (JSON), T-spectra and s-tables (CSV).

Exit codes: 0 when everything passes, 1 on a failed check or table mismatch,
2 on an unknown geometry, identity, case or quantity (or a bad argument).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .catalog import ENTRY_NAMES, CatalogError, entry_from_descriptor, expected_table, load_descriptor, load_entry
from .operators import PreconditionError
from .suites import IDENTITIES, parse_s_values, run_suite
from .torsion import t_spectrum

REPORT_SCHEMA = "spinlab-report/1"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _atomic_write(path: str, text: str) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _param(args):
    vals = [v for v in (args.tau0, args.lam) if v is not None]
    if len(vals) > 1:
        raise UsageError("give at most one of --tau0 and --lambda")
    if not vals:
        return None
    try:
        return Fraction(vals[0])
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad parameter value {vals[0]!r}") from exc


def _entry(args):
    name = args.geometry
    if name is None:
        raise UsageError("--geometry/--structure is required")
    param = _param(args)
    try:
        if name in ENTRY_NAMES:
            return load_entry(name, param)
        if Path(name).is_file():
            return entry_from_descriptor(load_descriptor(name), param)
    except CatalogError as exc:
        raise UsageError(str(exc)) from exc
    raise UsageError(f"unknown geometry {name!r}; choose from {', '.join(ENTRY_NAMES)} or pass a descriptor file")


def _s_values(args, default="0"):
    text = args.s if args.s is not None else default
    try:
        vals = parse_s_values(text, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if not vals:
        raise UsageError("empty s-grid")
    return vals


def _emit(text: str, out: str | None) -> None:
    if out:
        _atomic_write(out, text)
    else:
        sys.stdout.write(text)


# subcommands -------------------------------------------------------------

def cmd_verify(args) -> int:
    entry = _entry(args)
    s_values = _s_values(args)
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    start = time.perf_counter()
    try:
        results = run_suite(entry, args.identity, s_values, trials=args.trials, backend=args.backend,
                            seed=args.seed, tolerance=args.tolerance, convention=args.laplacian)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from exc
    except PreconditionError as exc:
        raise UsageError(str(exc)) from exc
    passed = all(r.passed for r in results)
    report = {
        "schema": REPORT_SCHEMA,
        "tool_version": __version__,
        "geometry": entry.name,
        "parameter": None if entry.parameter is None else [entry.parameter[0], str(entry.parameter[1])],
        "backend": args.backend,
        "seed": args.seed,
        "identity": args.identity,
        "s_values": [str(s) for s in s_values],
        "results": [r.as_dict() for r in results],
        "passed": passed,
        "wall_time": round(time.perf_counter() - start, 6),
    }
    text = json.dumps(report, indent=2, sort_keys=True, default=str) + "\n"
    if args.out:
        _atomic_write(args.out, text)
        failed = [r for r in results if not r.passed]
        print(f"{entry.name}: {len(results) - len(failed)}/{len(results)} checks passed -> {args.out}")
        for r in failed:
            print(f"  FAIL {r.identity} s={r.s} residual={r.max_residual:.3e} witness={r.witness}")
    else:
        sys.stdout.write(text)
    return EXIT_OK if passed else EXIT_FAIL


def _fmt_value(v) -> str:
    if hasattr(v, "denominator") and v.denominator == 1:
        return str(v.numerator)
    return str(v)


def cmd_spectrum(args) -> int:
    entry = _entry(args)
    spec = t_spectrum(entry.rep, entry.torsion)
    pairs = [(sp.value, sp.multiplicity) for sp in spec]
    line = "(" + ", ".join(f"{_fmt_value(v)}:{m}" for v, m in pairs) + ")"
    print(line)
    if args.out:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eigenvalue", "multiplicity"])
        for v, m in pairs:
            w.writerow([_fmt_value(v), m])
        _atomic_write(args.out, buf.getvalue())
    return EXIT_OK


def _cell(v) -> str:
    if isinstance(v, (list, tuple)):
        return " ".join(_cell(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return _fmt_value(v)


def cmd_table(args) -> int:
    name = args.geometry
    if name not in ENTRY_NAMES:
        raise UsageError(f"tables are available for the built-in entries: {', '.join(ENTRY_NAMES)}")
    s_values = _s_values(args, default="0:1:1/4")
    quantities = [q.strip() for q in args.quantity.split(",")] if args.quantity else None
    try:
        rows = expected_table(name, s_values, case=args.case, quantities=quantities, param=_param(args))
    except CatalogError as exc:
        raise UsageError(str(exc)) from exc
    qs = list(rows[0].values) if rows else []
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["s"] + [f"{q}:{col}" for q in qs for col in ("closed-form", "computed", "match")])
    for row in rows:
        cells = [_fmt_value(row.s)]
        for q in qs:
            p, c, ok = row.values[q]
            cells += [_cell(p), _cell(c), "yes" if ok else "no"]
        w.writerow(cells)
    _emit(buf.getvalue(), args.out)
    return EXIT_OK if all(r.ok for r in rows) else EXIT_FAIL


# parser ------------------------------------------------------------------

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--geometry", "--structure", dest="geometry", help="catalog name or descriptor file")
    p.add_argument("--tau0", help="G2 torsion parameter (positive rational)")
    p.add_argument("--lambda", dest="lam", help="scale parameter (positive rational)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output file (written atomically)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"spinlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run identity suites and write a JSON report")
    _common(v)
    v.add_argument("--identity", default="all", help=f"one of {', '.join(IDENTITIES)}")
    v.add_argument("--s", "--s-grid", dest="s", help='"0,1/4,0.75", "a:b:step" or "grid" (default 0)')
    v.add_argument("--trials", type=int, default=100, help="random jets per s value")
    v.add_argument("--backend", choices=("exact", "float"), default="exact")
    v.add_argument("--tolerance", type=float, default=None, help="float backend threshold (default 1e-10)")
    v.add_argument("--laplacian", choices=("plus", "minus"), default="plus",
                   help="sign convention of the connection Laplacian in the sl suite")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("spectrum", help="eigenvalues of the torsion form acting on spinors")
    _common(s)
    s.set_defaults(func=cmd_spectrum)

    t = sub.add_parser("table", help="closed forms against computed values over an s-grid (CSV)")
    _common(t)
    t.add_argument("--s-grid", "--s", dest="s", help='"0:1:0.25", "0,1/4" or "grid" (default 0:1:1/4)')
    t.add_argument("--case", help="spinor case, e.g. plus4 / minus4 / zero")
    t.add_argument("--quantity", help="comma-separated quantities (default: all for the entry)")
    t.set_defaults(func=cmd_table)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"spinlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
