"""Command-line front end: ``check``, ``graph`` and ``bench`` subcommands.

Exit codes: 10 satisfiable, 20 unsatisfiable, 0 success for graph/bench,
1 usage or syntax error, 2 timeout or resource limit, 3 validation mismatch.
"""
from __future__ import annotations

import argparse
import sys
from typing import Sequence

from . import formula as fm
from .bench import FAMILIES, FamilySpec, items_for, load_corpus, run_suite
from .checker import CheckOptions, CheckTimeout, InvariantCore, check, verify_core
from .oracle import eval_lasso
from .parser import LtlSyntaxError, parse
from .satkernel import ResourceLimit
from .transys import DEFAULT_GRAPH_CAP, CapExceeded, build_graph, to_dot

EXIT_SAT = 10
EXIT_UNSAT = 20
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_LIMIT = 2
EXIT_INVALID = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_source(p: argparse.ArgumentParser):
    p.add_argument("formula", nargs="?", help="formula text")
    p.add_argument("-f", "--file", help="read the formula from a file")


def _sizes(text: str) -> list[int]:
    out: list[int] = []
    for part in text.split(","):
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ltlsat", description="SAT-based explicit LTL satisfiability checking")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="decide satisfiability of one formula")
    _add_source(c)
    c.add_argument("--no-heuristics", action="store_true", help="plain enumeration only")
    c.add_argument("--timeout", type=int, metavar="MS", help="wall-clock limit in milliseconds")
    c.add_argument("--witness", action="store_true", help="print a lasso for satisfiable input")
    c.add_argument("--validate", action="store_true", help="re-check witnesses and cores")
    c.add_argument("--dimacs-dump", metavar="DIR", help="write each state's CNF to DIR")

    g = sub.add_parser("graph", help="build the full transition system")
    _add_source(g)
    g.add_argument("--dot", metavar="PATH", help="write Graphviz DOT to PATH ('-' for stdout)")
    g.add_argument("--cap", type=int, default=DEFAULT_GRAPH_CAP, help="state limit")

    b = sub.add_parser("bench", help="run formula families or a corpus, emit CSV")
    b.add_argument("--family", action="append", choices=FAMILIES, help="family to run (repeatable)")
    b.add_argument("--sizes", type=_sizes, default=[1, 2, 3, 4], help="e.g. 1-8 or 2,4,6")
    b.add_argument("--atoms", type=int, default=3, help="atom count for random-conjunction")
    b.add_argument("--seed", type=int, default=0, help="seed for random-conjunction")
    b.add_argument("--corpus", metavar="DIR", help="directory of formula files")
    b.add_argument("--timeout", type=int, metavar="MS", default=60000)
    b.add_argument("--no-heuristics", action="store_true")
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--output", metavar="PATH", help="CSV destination (default stdout)")
    return p


def _read_formula(args) -> fm.Formula:
    if (args.formula is None) == (args.file is None):
        raise UsageError("give exactly one formula source: a positional formula or --file")
    text = args.formula
    if args.file is not None:
        with open(args.file, encoding="utf-8") as fh:
            text = fh.read()
    return parse(text)


def _cmd_check(args, out) -> int:
    f = _read_formula(args)
    opts = CheckOptions(
        heuristics=not args.no_heuristics,
        timeout_ms=args.timeout,
        witness=True,
        dimacs_dir=args.dimacs_dump,
    )
    try:
        v = check(f, opts)
    except CheckTimeout as exc:
        print("unknown", file=out)
        print(f"ltlsat: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except ResourceLimit as exc:
        print("unknown", file=out)
        print(f"ltlsat: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    print(v.label, file=out)
    if v.sat and args.witness and v.witness is not None:
        for line in v.witness.lines():
            print(line, file=out)
    if isinstance(v.certificate, InvariantCore):
        print(f"core: {fm.to_str(v.certificate.theta)}", file=out)
    if args.validate:
        problems = []
        if v.sat and not eval_lasso(v.witness, fm.to_nnf(f)):
            problems.append("witness does not satisfy the formula")
        if isinstance(v.certificate, InvariantCore):
            inv, stuck = verify_core(v.certificate)
            if not (inv and stuck):
                problems.append("invariant core fails its checks")
        for msg in problems:
            print(f"ltlsat: validation failed: {msg}", file=sys.stderr)
        if problems:
            return EXIT_INVALID
    return EXIT_SAT if v.sat else EXIT_UNSAT


def _cmd_graph(args, out) -> int:
    f = fm.to_nnf(_read_formula(args))
    code = EXIT_OK
    try:
        g = build_graph(f, cap=args.cap)
    except CapExceeded as exc:
        g = exc.graph
        print(f"ltlsat: {exc}; graph is partial", file=sys.stderr)
        code = EXIT_LIMIT
    print(f"states: {len(g.states)}", file=out)
    print(f"edges: {g.edge_count()}", file=out)
    if args.dot == "-":
        out.write(to_dot(g))
    elif args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(to_dot(g))
    return code


def _cmd_bench(args, out) -> int:
    if args.corpus:
        items = load_corpus(args.corpus)
    else:
        fams = args.family or ["f-chain", "gf-cycle"]
        specs = [FamilySpec(fam, n, k=args.atoms, seed=args.seed) for fam in fams for n in args.sizes]
        items = items_for(specs)
    opts = CheckOptions(heuristics=not args.no_heuristics)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            run_suite(items, opts, args.timeout, args.workers, fh)
    else:
        run_suite(items, opts, args.timeout, args.workers, out)
    return EXIT_OK


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "check":
            return _cmd_check(args, out)
        if args.command == "graph":
            return _cmd_graph(args, out)
        return _cmd_bench(args, out)
    except (UsageError, LtlSyntaxError, ValueError, OSError) as exc:
        print(f"ltlsat: {exc}", file=sys.stderr)
        return EXIT_USAGE


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
