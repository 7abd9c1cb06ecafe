"""Command-line interface.

Subcommands: decide, decompose, mondec, approx, verify, bench. Results go
to stdout, diagnostics to stderr. Exit codes: 0 for decomposable / verified
certificates, 1 for non-decomposable / rejected certificates, 2 for usage or
input errors.
"""

from __future__ import annotations

import argparse
import sys
import time

from . import certificates, generators, sexpr
from .cover import CoverConfig
from .formula import Partition
from .vardec import approx, decide, mondec


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _config(args) -> CoverConfig:
    if getattr(args, "heuristics", "on") == "off":
        return CoverConfig.all_off()
    return CoverConfig()


def _load_problem(args) -> sexpr.ProblemFile:
    problem = sexpr.parse(_read_input(args.input))
    if getattr(args, "partition", None):
        override = sexpr.parse_partition(args.partition)
        problem = sexpr.ProblemFile(
            problem.variables, override, problem.formula, problem.proof
        )
        if not problem.formula.free_vars() <= set(override.universe):
            raise sexpr.ParseError("partition does not cover the formula's variables")
    return problem


def _attach_proof(problem, result):
    witness = result.witness
    proof = certificates.find_witness(
        problem.formula, witness.partition, witness.gamma, witness.failing_term
    )
    from dataclasses import replace

    return replace(result, witness=replace(witness, proof=proof))


def _run_decide(args, monadic: bool, print_decomposition: bool) -> int:
    problem = _load_problem(args)
    cfg = _config(args)
    if monadic:
        result = mondec(problem.formula, cfg)
    else:
        result = decide(problem.formula, problem.partition, cfg)
    if not result.decomposable and args.emit_proof:
        result = _attach_proof(problem, result)
    if print_decomposition and result.decomposable:
        print(sexpr.emit_formula(result.decomposition.formula()))
    else:
        print(sexpr.emit_decide_result(result))
    return 0 if result.decomposable else 1


def _run_approx(args) -> int:
    problem = _load_problem(args)
    out = approx(problem.formula, problem.partition, _config(args))
    print(sexpr.emit_formula(out))
    return 0


def _run_verify(args) -> int:
    problem = _load_problem(args)
    if problem.proof is None:
        print("input file carries no (lambda-proof ...)", file=sys.stderr)
        return 2
    result = certificates.verify(problem.formula, problem.partition, problem.proof)
    if result.accepted:
        print("(accept)")
        return 0
    print(f"(reject {result.reason})")
    return 1


def _run_bench(args) -> int:
    params = {}
    for kv in args.param or []:
        key, _, value = kv.partition("=")
        if not _ or not value.lstrip("-").isdigit():
            print(f"bad --param {kv!r}; expected name=int", file=sys.stderr)
            return 2
        params[key] = int(value)
    text = generators.gen(args.family, params, args.seed)
    if args.emit_problem:
        print(text, end="")
        return 0
    problem = sexpr.parse(text)
    start = time.perf_counter()
    result = decide(problem.formula, problem.partition, _config(args))
    elapsed = time.perf_counter() - start
    verdict = "decomposable" if result.decomposable else "nondecomposable"
    size = (
        _ast_size(result.decomposition.formula()) if result.decomposable else 0
    )
    print(f"(bench {args.family} {verdict} (seconds {elapsed:.3f}) (size {size}))")
    return 0 if result.decomposable else 1


def _ast_size(formula) -> int:
    """Number of non-leaf nodes of the syntax tree (the reporting metric)."""
    from .formula import And, Not, Or

    if isinstance(formula, (And, Or)):
        return 1 + sum(_ast_size(a) for a in formula.args)
    if isinstance(formula, Not):
        return 1 + _ast_size(formula.arg)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vardec",
        description="Variable decomposability of quantifier-free linear real arithmetic",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("--input", required=True, help="problem file, or - for stdin")
        p.add_argument("--partition", help="override partition, e.g. '((x) (y z))'")
        p.add_argument("--heuristics", choices=("on", "off"), default="on")
        p.add_argument("--format", choices=("sexpr",), default="sexpr")

    p = sub.add_parser("decide", help="decide decomposability, print the result")
    common(p)
    p.add_argument("--emit-proof", action="store_true")
    p = sub.add_parser("decompose", help="print a decomposition when one exists")
    common(p)
    p.add_argument("--emit-proof", action="store_true")
    p = sub.add_parser("mondec", help="decide monadic decomposability")
    common(p)
    p.add_argument("--emit-proof", action="store_true")
    p = sub.add_parser("approx", help="print the best respecting over-approximation")
    common(p)
    p = sub.add_parser("verify", help="verify a non-decomposability certificate")
    common(p)
    p = sub.add_parser("bench", help="generate a benchmark instance and decide it")
    p.add_argument("--family", required=True, choices=generators.FAMILIES)
    p.add_argument("--param", action="append", metavar="NAME=INT")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--heuristics", choices=("on", "off"), default="on")
    p.add_argument("--format", choices=("sexpr",), default="sexpr")
    p.add_argument("--emit-problem", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        if args.command == "decide":
            return _run_decide(args, monadic=False, print_decomposition=False)
        if args.command == "decompose":
            return _run_decide(args, monadic=False, print_decomposition=True)
        if args.command == "mondec":
            return _run_decide(args, monadic=True, print_decomposition=False)
        if args.command == "approx":
            return _run_approx(args)
        if args.command == "verify":
            return _run_verify(args)
        if args.command == "bench":
            return _run_bench(args)
    except (sexpr.ParseError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
