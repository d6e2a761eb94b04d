"""Batch command-line front end.

Exit codes: 0 = SAT / true, 1 = UNSAT / false, 2 = UNKNOWN (a resource guard
fired), 3 = input error, 4 = a --oracle-check cross-verification failed.
Output is deterministic: identical invocations produce identical bytes.
"""

from __future__ import annotations

import argparse
import sys

from .encodings import inclusions_to_introduction
from .semantics import (
    BUDGET_EXCEEDED, Interpretation, find_model_bounded, is_model,
    parse_interpretation, render_interpretation,
)
from .services import (
    UnknownIndividualError, Verdict, augment_for_concept_sat,
    augment_for_instance, augment_for_subsumption, instance_of, kb_satisfiable,
)
from .syntax import KnowledgeBase, ParseError, parse_concept, parse_kb, render_kb
from .tableau import Guards, Trace

ORACLE_BUDGET = 200_000

GUARD_WARNING = (
    "guard {guard!r} fired; completions can be exponentially large "
    "(O(2^(4n)) in the knowledge-base size) -- raise --max-vars, "
    "--max-constraints or --max-branches to search further"
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alcnr",
        description="Decision procedures for ALCNR knowledge bases.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("kb", help="KB file in the exchange format, or - for stdin")
    common.add_argument("--max-vars", type=int, default=1000, metavar="N")
    common.add_argument("--max-constraints", type=int, default=200_000, metavar="N")
    common.add_argument("--max-branches", type=int, default=100_000, metavar="N")
    common.add_argument(
        "--oracle-check", type=int, default=None, metavar="K",
        help="cross-verify the verdict by exhaustive model search up to domain size K",
    )
    common.add_argument("--trace-file", default=None, metavar="PATH")

    sub.add_parser("check-sat", parents=[common], help="is the KB satisfiable?")
    p = sub.add_parser("concept-sat", parents=[common],
                       help="is CONCEPT satisfiable w.r.t. the KB?")
    p.add_argument("concept")
    p = sub.add_parser("subsumes", parents=[common],
                       help="is C subsumed by D in every model of the KB?")
    p.add_argument("c")
    p.add_argument("d")
    p = sub.add_parser("instance", parents=[common],
                       help="is individual A an instance of CONCEPT in every model?")
    p.add_argument("a")
    p.add_argument("concept")
    p = sub.add_parser("instances", parents=[common],
                       help="all individuals provably in CONCEPT, one per line")
    p.add_argument("concept")
    sub.add_parser("transform", parents=[common],
                   help="rewrite the TBox into a single concept introduction")
    sub.add_parser("model", parents=[common],
                   help="emit the canonical model if the KB is satisfiable")
    sub.add_parser("trace", parents=[common], help="print the full derivation log")
    p = sub.add_parser("check-model", parents=[common])
    p.add_argument("model_file")
    return parser


def _read_text(path: str, stdin) -> str:
    if path == "-":
        return stdin.read()
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _guards(args) -> Guards:
    return Guards(
        max_variables=args.max_vars,
        max_constraints=args.max_constraints,
        max_branches=args.max_branches,
    )


def _cross_check(kb: KnowledgeBase, verdict: Verdict, bound: int, stderr) -> bool:
    """Sound one-directional consistency check against the brute-force oracle."""
    floor = max(1, len(kb.individuals()))
    if bound < floor:
        print(f"oracle check skipped: bound {bound} below the {floor} required elements",
              file=stderr)
        return True
    outcome = find_model_bounded(kb, bound, ORACLE_BUDGET)
    if outcome is BUDGET_EXCEEDED:
        print("oracle check inconclusive: search budget exceeded", file=stderr)
        return True
    if isinstance(outcome, Interpretation):
        if verdict.status == "unsat":
            print("oracle check FAILED: exhaustive search found a model but the "
                  "engine answered UNSAT", file=stderr)
            return False
        return True
    # NOT_FOUND is exhaustive up to the bound
    if verdict.status == "sat" and len(verdict.interpretation.domain) <= bound:
        print("oracle check FAILED: the engine produced a model within the bound "
              "but exhaustive search found none", file=stderr)
        return False
    return True


def _decide(kb: KnowledgeBase, args, stderr) -> tuple[Verdict, bool]:
    """Run the engine on kb; returns (verdict, oracle_ok)."""
    trace = Trace(limit=None) if args.trace_file or args.command == "trace" else None
    verdict = kb_satisfiable(kb, _guards(args), trace)
    if verdict.status == "unknown":
        print(GUARD_WARNING.format(guard=verdict.guard), file=stderr)
    if args.trace_file:
        with open(args.trace_file, "w", encoding="utf-8") as fh:
            fh.write("\n".join(verdict.trace.lines()) + "\n")
    ok = True
    if args.oracle_check is not None:
        ok = _cross_check(kb, verdict, args.oracle_check, stderr)
    return verdict, ok


_STATUS_EXIT = {"sat": 0, "unsat": 1, "unknown": 2}
_BOOL_TEXT = {True: "true", False: "false", None: "UNKNOWN"}


def run(argv, stdin=None, stdout=None, stderr=None) -> int:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as stop:
        return 0 if stop.code in (0, None) else 3

    try:
        kb = parse_kb(_read_text(args.kb, stdin))
        if args.command == "check-sat":
            verdict, ok = _decide(kb, args, stderr)
            print({"sat": "SAT", "unsat": "UNSAT", "unknown": "UNKNOWN"}[verdict.status],
                  file=stdout)
            return 4 if not ok else _STATUS_EXIT[verdict.status]

        if args.command == "concept-sat":
            goal = augment_for_concept_sat(kb, parse_concept(args.concept))
            verdict, ok = _decide(goal, args, stderr)
            print({"sat": "SAT", "unsat": "UNSAT", "unknown": "UNKNOWN"}[verdict.status],
                  file=stdout)
            return 4 if not ok else _STATUS_EXIT[verdict.status]

        if args.command == "subsumes":
            goal = augment_for_subsumption(kb, parse_concept(args.c), parse_concept(args.d))
            verdict, ok = _decide(goal, args, stderr)
            value = None if verdict.status == "unknown" else verdict.status == "unsat"
            print(_BOOL_TEXT[value], file=stdout)
            return 4 if not ok else (2 if value is None else (0 if value else 1))

        if args.command == "instance":
            goal = augment_for_instance(kb, args.a, parse_concept(args.concept))
            verdict, ok = _decide(goal, args, stderr)
            value = None if verdict.status == "unknown" else verdict.status == "unsat"
            print(_BOOL_TEXT[value], file=stdout)
            return 4 if not ok else (2 if value is None else (0 if value else 1))

        if args.command == "instances":
            concept = parse_concept(args.concept)
            unknowns = []
            for a in sorted(kb.individuals()):
                truth = instance_of(kb, a, concept, _guards(args))
                if truth.value is None:
                    unknowns.append(a)
                elif truth.value:
                    print(a, file=stdout)
            if unknowns:
                print("inconclusive for: " + " ".join(unknowns), file=stderr)
                return 2
            return 0

        if args.command == "transform":
            stdout.write(render_kb(inclusions_to_introduction(kb)))
            return 0

        if args.command == "model":
            verdict, ok = _decide(kb, args, stderr)
            if not ok:
                return 4
            if verdict.status == "sat":
                stdout.write(render_interpretation(verdict.interpretation))
                return 0
            print({"unsat": "UNSAT", "unknown": "UNKNOWN"}[verdict.status], file=stderr)
            return _STATUS_EXIT[verdict.status]

        if args.command == "trace":
            verdict, ok = _decide(kb, args, stderr)
            for line in verdict.trace.lines():
                print(line, file=stdout)
            print({"sat": "result: SAT", "unsat": "result: UNSAT",
                   "unknown": "result: UNKNOWN"}[verdict.status], file=stdout)
            return 4 if not ok else _STATUS_EXIT[verdict.status]

        if args.command == "check-model":
            interp = parse_interpretation(_read_text(args.model_file, stdin))
            good = is_model(interp, kb)
            print("ok" if good else "invalid", file=stdout)
            return 0 if good else 1

        raise AssertionError(f"unhandled command {args.command!r}")
    except ParseError as exc:
        print(f"parse error: {exc}", file=stderr)
        return 3
    except UnknownIndividualError as exc:
        print(f"error: {exc}", file=stderr)
        return 3
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return 3


def main(argv=None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    raise SystemExit(main())
