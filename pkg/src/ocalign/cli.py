"""Command-line conformance checker: ``ocalign --net N.pnml --log L.jsonocel``.

Exit codes: 0 ok, 1 usage, 2 parse error, 3 solver error, 4 validation
failure or oracle mismatch.  An infeasible trace is reported, not an error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections import Counter

from .alignments import BoundsError
from .conformance import AlignConfig, run_conformance
from .io_formats import FormatError, alignment_table, dumps, parse_ocel, parse_pnml, report_json
from .smt_encoding import EncodingError
from .solver import SolverError

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_SOLVER, EXIT_INVALID = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _extra(text: str) -> tuple[str, int]:
    typ, sep, count = text.partition("=")
    if not sep or not typ:
        raise argparse.ArgumentTypeError(f"expected TYPE=K, got {text!r}")
    try:
        k = int(count)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer count in {text!r}") from None
    if k < 0:
        raise argparse.ArgumentTypeError(f"negative count in {text!r}")
    return typ, k


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ocalign", description="Optimal alignments of object-centric logs against nets with identifiers.")
    p.add_argument("--net", required=True, help="extended PNML file")
    p.add_argument("--log", required=True, help="OCEL 1.0 JSON file")
    p.add_argument("--bound", type=int, help="run-length bound n (default: from the a-priori bounds)")
    p.add_argument("--extra-objects", type=_extra, nargs="+", default=[], metavar="TYPE=K",
                   help="spare objects per type (default: from the a-priori bounds)")
    p.add_argument("--list-cap", type=int, help="maximum list-variable size (default: widest event)")
    p.add_argument("--solver", help="solver binary (default: $SOLVER_PATH, then z3, then yices-smt2)")
    p.add_argument("--dialect", choices=["native", "iterative"])
    p.add_argument("--strategy", choices=["descent", "binary"], default="descent",
                   help="minimization strategy for the iterative dialect")
    p.add_argument("--mode", choices=["smt", "oracle", "both"], default="smt")
    p.add_argument("--timeout", type=float, help="seconds per trace graph")
    p.add_argument("--jobs", type=int, help="worker processes (default: CPU count)")
    p.add_argument("--json", metavar="OUT", help="write the JSON report here")
    p.add_argument("--auto-bound", action="store_true", help="start small and double n on infeasibility")
    p.add_argument("--oracle-states", type=int, default=2_000_000)
    p.add_argument("--dump-smt", metavar="DIR", help="write each problem as SMT-LIB 2 text")
    p.add_argument("--quiet", action="store_true", help="no move tables on stdout")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def summary(reports) -> dict:
    statuses = Counter(r.status for r in reports)
    return {
        "traces": len(reports),
        "statuses": dict(sorted(statuses.items())),
        "total_cost": sum(r.cost for r in reports if r.cost is not None),
        "valid": all(r.ok for r in reports),
        "per_trace": [
            {"component": list(r.component), "cost": r.cost, "events": r.events, "objects": r.objects,
             "wall": round(r.wall, 3), "status": r.status}
            for r in reports
        ],
    }


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.bound is not None and args.bound < 0:
        parser.error("--bound must be non-negative")
    if args.jobs is not None and args.jobs < 1:
        parser.error("--jobs must be positive")
    try:
        with open(args.net, encoding="utf-8") as fh:
            anet = parse_pnml(fh.read())
        with open(args.log, encoding="utf-8") as fh:
            log = parse_ocel(fh.read())
    except (OSError, FormatError) as exc:
        print(f"ocalign: {exc}", file=sys.stderr)
        return EXIT_PARSE
    cfg = AlignConfig(
        bound=args.bound,
        extra_objects=dict(args.extra_objects) or None,
        list_cap=args.list_cap,
        solver=args.solver,
        dialect=args.dialect,
        strategy=args.strategy,
        timeout=args.timeout,
        mode=args.mode,
        oracle_states=args.oracle_states,
        auto_bound=args.auto_bound,
        dump_dir=args.dump_smt,
    )
    try:
        reports = run_conformance(anet, log, cfg, jobs=args.jobs)
    except SolverError as exc:
        print(f"ocalign: solver: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (BoundsError, EncodingError) as exc:
        print(f"ocalign: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not args.quiet:
        for r in reports:
            print(alignment_table(r))
    data = {"reports": [report_json(r) for r in reports], "summary": summary(reports)}
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(dumps(data))
    s = data["summary"]
    print(f"{s['traces']} trace graphs, total cost {s['total_cost']}, statuses {s['statuses']}")
    if not s["valid"]:
        for r in reports:
            for p in r.problems:
                print(f"ocalign: {','.join(r.component)}: {p}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
