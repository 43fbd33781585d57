"""Command line interface.

Exit codes: 0 success, 1 violations found, 2 inconclusive or budget
exceeded, 3 unreadable or unparseable input.
"""

from __future__ import annotations

import argparse
import sys

from . import model as m
from . import checker, entailment, isar, oracle
from .diagnostics import errors
from .parser import parse_model
from .printer import print_model, print_predicate

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_INCONCLUSIVE = 2
EXIT_BAD_INPUT = 3


def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        raise SystemExit(EXIT_BAD_INPUT)


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        raise SystemExit(EXIT_BAD_INPUT)


def _load_model(path):
    model, diags = parse_model(_read(path), path)
    if errors(diags):
        for d in diags:
            print(str(d), file=sys.stderr)
        raise SystemExit(EXIT_BAD_INPUT)
    return model, diags


def _pick_contract(model, name):
    if name is None:
        if not model.contracts:
            print("error: model declares no architecture contracts",
                  file=sys.stderr)
            raise SystemExit(EXIT_BAD_INPUT)
        return model.contracts[0]
    for c in model.contracts:
        if c.name == name:
            return c
    print("error: no architecture contract named '%s'" % name,
          file=sys.stderr)
    raise SystemExit(EXIT_BAD_INPUT)


def cmd_check(args):
    model, diags = _load_model(args.input)
    diags = list(diags) + m.validate_structure(model)
    verdicts = checker.check_model(model, budget=args.dnf_budget)
    _write(args.output, checker.report_text(verdicts, diags))
    status = checker.overall_status(verdicts, diags)
    return {checker.OK: EXIT_OK, checker.VIOLATED: EXIT_VIOLATED,
            checker.INCONCLUSIVE: EXIT_INCONCLUSIVE}[status]


def cmd_emit_isar(args):
    model, _ = _load_model(args.input)
    config = isar.EmitConfig(comments=not args.no_comments,
                             legacy_connection_names=args.legacy_connection_names,
                             strict_symbols=args.strict_symbols)
    try:
        text = isar.emit_theory(model, config)
    except isar.UnmappedSymbol as exc:
        print("error: UNMAPPED_SYMBOL: no Isabelle image for '%s'" % exc,
              file=sys.stderr)
        return EXIT_VIOLATED
    _write(args.output, text)
    return EXIT_OK


def cmd_search(args):
    model, _ = _load_model(args.input)
    contract = _pick_contract(model, args.contract)
    result = oracle.search_proof(model, contract, max_steps=args.max_steps,
                                 budget=args.dnf_budget)
    if result.status == oracle.FOUND:
        lines = []
        for s in result.proof:
            refs = ""
            if s.refs:
                from .printer import _ref_set
                refs = " from [ %s ]" % ", ".join(_ref_set(r)
                                                  for r in s.refs)
            lines.append("%s: at %d have %s%s using %s"
                         % (s.label, s.time, print_predicate(s.state),
                            refs, s.rationale))
        _write(args.output, "\n".join(lines) + "\n")
        return EXIT_OK
    print("%s after exploring %d fact(s)"
          % (result.status, result.steps_explored), file=sys.stderr)
    return (EXIT_INCONCLUSIVE if result.status == oracle.BUDGET_EXCEEDED
            else EXIT_VIOLATED)


def cmd_simulate(args):
    model, _ = _load_model(args.input)
    try:
        universe = oracle.parse_universe(_read(args.universe))
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_BAD_INPUT
    contract = _pick_contract(model, args.contract)
    try:
        holds, counter = oracle.verify_satisfaction(model, contract, universe,
                                                    horizon=args.horizon)
    except oracle.ExplosionError as exc:
        print("inconclusive: %s" % exc, file=sys.stderr)
        return EXIT_INCONCLUSIVE
    if holds:
        _write(args.output, "contract %s: holds\n" % contract.name)
        return EXIT_OK
    lines = ["contract %s: counterexample" % contract.name]
    for i, state in enumerate(counter):
        cells = " ".join("%s=%s" % (k, v) for k, v in sorted(state.items()))
        lines.append("  t=%d %s" % (i, cells))
    _write(args.output, "\n".join(lines) + "\n")
    return EXIT_VIOLATED


def cmd_fmt(args):
    model, diags = parse_model(_read(args.input), args.input)
    if errors(diags):
        for d in diags:
            print(str(d), file=sys.stderr)
        return EXIT_BAD_INPUT
    _write(args.output, print_model(model))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="apml",
        description="Check, translate and simulate timed architecture "
                    "contract models.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("input", help="model file")
        p.add_argument("-o", "--output", default=None,
                       help="output file (default: stdout)")

    p = sub.add_parser("check", help="validate a model and check its proofs")
    common(p)
    p.add_argument("--dnf-budget", type=int, default=entailment.DEFAULT_BUDGET)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("emit-isar", help="emit an Isabelle theory file")
    common(p)
    p.add_argument("--no-comments", action="store_true",
                   help="suppress traceability comments")
    p.add_argument("--legacy-connection-names", action="store_true",
                   help="also name connection assumptions output_input")
    p.add_argument("--strict-symbols", action="store_true",
                   help="fail on symbols without a built-in Isabelle image")
    p.set_defaults(func=cmd_emit_isar)

    p = sub.add_parser("search", help="search for an architecture proof")
    common(p)
    p.add_argument("--contract", default=None,
                   help="architecture contract name (default: first)")
    p.add_argument("--max-steps", type=int, default=32)
    p.add_argument("--dnf-budget", type=int, default=entailment.DEFAULT_BUDGET)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("simulate",
                       help="verify a contract over a finite universe")
    common(p)
    p.add_argument("--universe", required=True, help="universe file")
    p.add_argument("--contract", default=None)
    p.add_argument("--horizon", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fmt", help="print the canonical form of a model")
    common(p)
    p.set_defaults(func=cmd_fmt)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
