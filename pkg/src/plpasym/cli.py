"""Command-line entry point: ``plpasym <command> program.plp [options]``.

Exit codes: 0 success, 1 parse error, 2 unstratifiable program, 3 constants
where they are not supported, 4 desk-scale guard, 5 any other error.  Errors
print one line ``ERROR <code>: <message>`` on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .asymptotics import asymptotic_query_prob, asymptotic_transform
from .errors import (ConstantsNotSupported, PLPError, PLPSyntaxError, ScaleLimitExceeded,
                     UnstratifiableError)
from .program import ProbProgram, check_acyclic, check_determinate
from .semantics import (DEFAULT_MAX_ATOMS, CheckReport, Family, check_CIP, check_exchangeable,
                        check_IP, check_projective, ground_formula_atoms, program_tv_distance,
                        query_prob)
from .syntax import format_clause, parse_program, parse_query

EXIT_CODES = {PLPSyntaxError: 1, UnstratifiableError: 2, ConstantsNotSupported: 3, ScaleLimitExceeded: 4}


@dataclass
class RunConfig:
    command: str
    input: Path
    n: int | None = None
    max_n: int = 4
    query: str | None = None
    format: str = "text"
    output: Path | None = None
    max_atoms: int = DEFAULT_MAX_ATOMS
    constants: dict[str, int] = field(default_factory=dict)
    checks: list[str] = field(default_factory=list)
    reduct: list[str] | None = None


def _fraction(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def _load(config: RunConfig) -> ProbProgram:
    try:
        text = config.input.read_text()
    except OSError as e:
        raise PLPError(f"cannot read {config.input}: {e.strerror}") from e
    return parse_program(text)


def _emit(config: RunConfig, text: str):
    if config.output is not None:
        config.output.write_text(text)
    else:
        sys.stdout.write(text)


def _dump(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _require_query(config: RunConfig) -> str:
    if config.query is None:
        raise PLPError(f"{config.command} needs --query")
    return config.query


def cmd_transform(config: RunConfig) -> int:
    program = _load(config)
    result = asymptotic_transform(program)
    if config.format == "json":
        payload = {"program": result.to_text(),
                   "rules_sha256": result.rules_hash,
                   "branches": [{"config": {k: v for k, v in cfg}, "weight": _fraction(w)}
                                for cfg, w in result.branches]}
        _emit(config, _dump(payload))
    else:
        _emit(config, result.to_text())
    return 0


def cmd_infer(config: RunConfig) -> int:
    program = _load(config)
    if config.n is None:
        raise PLPError("infer needs --n")
    query = _require_query(config)
    p = query_prob(program, config.n, parse_query(query), config.max_atoms, config.constants)
    if config.format == "json":
        _emit(config, _dump({"n": config.n, "query": query, "probability": _fraction(p),
                             "decimal": float(p)}))
    else:
        _emit(config, f"{_fraction(p)} ({float(p):.6g})\n")
    return 0


def cmd_limit(config: RunConfig) -> int:
    program = _load(config)
    query = _require_query(config)
    p = asymptotic_query_prob(program, parse_query(query))
    if config.format == "json":
        _emit(config, _dump({"query": query, "limit": _fraction(p), "decimal": float(p)}))
    else:
        _emit(config, f"{_fraction(p)} ({float(p):.6g})\n")
    return 0


def _determinate_report(program: ProbProgram) -> CheckReport:
    ok, offenders = check_determinate(program)
    report = CheckReport("determinate", ok, 0)
    if offenders:
        report.witness = {"clauses": [format_clause(c) for c in offenders]}
    report.notes.append(f"acyclic: {'yes' if check_acyclic(program) else 'no'}")
    return report


def cmd_check(config: RunConfig) -> int:
    program = _load(config)
    if not config.checks:
        raise PLPError("check needs at least one of --projective --exchangeable --ip --cip --determinate")
    if config.reduct is not None:
        unknown = sorted(set(config.reduct) - set(program.arities))
        if unknown:
            raise PLPError(f"--reduct names unknown relations {unknown}")
    family = Family.from_program(program, config.max_atoms, config.reduct)
    runners = {"projective": lambda: check_projective(family, config.max_n),
               "exchangeable": lambda: check_exchangeable(family, config.max_n),
               "ip": lambda: check_IP(family, config.max_n),
               "cip": lambda: check_CIP(family, config.max_n),
               "determinate": lambda: _determinate_report(program)}
    reports = [runners[name]() for name in config.checks]
    if config.format == "json":
        _emit(config, _dump([r.to_json() for r in reports]))
    else:
        _emit(config, "".join(r.summary() + "\n" for r in reports))
    return 0


def cmd_converge(config: RunConfig) -> int:
    program = _load(config)
    query = _require_query(config)
    formula = parse_query(query)
    transformed = asymptotic_transform(program)
    start = max([1] + [v for _, args in ground_formula_atoms(formula, config.max_n) for v in args])
    rows = []
    for n in range(start, config.max_n + 1):
        p = query_prob(program, n, formula, config.max_atoms)
        tv = program_tv_distance(program, transformed.program, n, max_atoms=config.max_atoms)
        rows.append({"n": n, "probability": _fraction(p), "tv": _fraction(tv)})
    if config.format == "json":
        _emit(config, _dump(rows))
    else:
        width = max([len(r["probability"]) for r in rows] + [11])
        lines = [f"{'n':>3}  {'probability':<{width}}  tv_to_transform"]
        lines += [f"{r['n']:>3}  {r['probability']:<{width}}  {r['tv']}" for r in rows]
        _emit(config, "\n".join(lines) + "\n")
    return 0


COMMANDS = {"transform": cmd_transform, "infer": cmd_infer, "limit": cmd_limit,
            "check": cmd_check, "converge": cmd_converge}


def _constant(text: str) -> tuple[str, int]:
    name, sep, value = text.partition("=")
    if not sep or not value.isdigit():
        raise argparse.ArgumentTypeError(f"expected name=element, got {text!r}")
    return name, int(value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plpasym",
                                     description="Exact and asymptotic inference for probabilistic logic programs.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser):
        p.add_argument("input", type=Path, help="program file in .plp syntax")
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--output", type=Path, help="write the result here instead of stdout")
        p.add_argument("--max-atoms", type=int, default=DEFAULT_MAX_ATOMS,
                       help="refuse to enumerate more free fact atoms than this")

    p = sub.add_parser("transform", help="emit the asymptotically equivalent determinate program")
    common(p)
    p = sub.add_parser("infer", help="exact query probability on a domain of size n")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--const", type=_constant, action="append", default=[], metavar="NAME=ELEM",
                   help="interpret a program constant as a domain element")
    p = sub.add_parser("limit", help="limit probability of a query over distinct fresh elements")
    common(p)
    p.add_argument("--query", required=True)
    p = sub.add_parser("check", help="test projectivity, exchangeability, IP, CIP or determinacy")
    common(p)
    p.add_argument("--max-n", type=int, default=4)
    for name in ("projective", "exchangeable", "ip", "cip", "determinate"):
        p.add_argument(f"--{name}", dest="checks", action="append_const", const=name)
    p.add_argument("--reduct", help="comma-separated relation names to restrict the family to")
    p = sub.add_parser("converge", help="exact query probabilities and TV to the transform for n up to max-n")
    common(p)
    p.add_argument("--query", required=True)
    p.add_argument("--max-n", type=int, default=7)
    return parser


def parse_config(argv: Sequence[str] | None = None) -> RunConfig:
    args = build_parser().parse_args(argv)
    return RunConfig(
        command=args.command, input=args.input, n=getattr(args, "n", None),
        max_n=getattr(args, "max_n", 4), query=getattr(args, "query", None), format=args.format,
        output=args.output, max_atoms=args.max_atoms, constants=dict(getattr(args, "const", [])),
        checks=getattr(args, "checks", None) or [],
        reduct=[s.strip() for s in args.reduct.split(",")] if getattr(args, "reduct", None) else None)


def exit_code(error: Exception) -> int:
    for cls, code in EXIT_CODES.items():
        if isinstance(error, cls):
            return code
    return 5


def main(argv: Sequence[str] | None = None) -> int:
    config = parse_config(argv)
    try:
        return COMMANDS[config.command](config)
    except (PLPError, OSError) as e:
        code = getattr(e, "code", "io-error")
        message = " ".join(str(e).split())
        print(f"ERROR {code}: {message}", file=sys.stderr)
        return exit_code(e)


if __name__ == "__main__":
    sys.exit(main())
