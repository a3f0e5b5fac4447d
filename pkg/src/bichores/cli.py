"""Command-line interface.

Exit codes: 0 success, 1 bad input, 2 a solver failed its own verification,
3 a requested property does not hold, 4 a trace does not replay.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Optional, Sequence

from .ef1_solver import round_robin_allocation, solve_ef1_fpo
from .ef_divisible import solve_ef_fpo
from .errors import (
    BichoresError,
    DegenerateAllZero,
    InstanceError,
    InternalBoundViolation,
    InvariantViolation,
    ReplayDivergence,
)
from .instance import RawInstance, format_rational, generate_random, normalize, parse_instance, \
    serialize_instance, to_fraction
from .market import FractionalAllocation, IntegralAllocation
from .trace import load_trace, replay
from .verify import DEFAULT_PO_CAP, PROPERTIES, audit, check_ef1, check_ef_fractional, \
    check_fpo_certificate, check_pef

EXIT_OK, EXIT_INPUT, EXIT_SELF_CHECK, EXIT_PROPERTY, EXIT_REPLAY = 0, 1, 2, 3, 4


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors (exit 1); exit 2 is reserved for self-check failures."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _read(path: Optional[str]) -> str:
    if path in (None, "-"):
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc


def _write(path: Optional[str], text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}") from exc


def _dump(obj) -> str:
    return json.dumps(obj, separators=(",", ":")) + "\n"


def _rationals(values: Sequence[Fraction]) -> list[str]:
    return [format_rational(v) for v in values]


def _load_instance(path: Optional[str]) -> RawInstance:
    return parse_instance(_read(path))


def _load_allocation(text: str, n: int, m: int):
    """Parse ``{"bundles": ...}`` or ``{"x": ...}``, with optional ``"prices"``."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid allocation JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError("allocation must be a JSON object")
    try:
        prices = None
        if "prices" in data:
            prices = [to_fraction(p) for p in data["prices"]]
            if len(prices) != m:
                raise InputError(f"{len(prices)} prices for {m} chores")
        if "bundles" in data:
            alloc = IntegralAllocation(tuple(frozenset(int(j) for j in b) for b in data["bundles"]))
            if alloc.n != n or not alloc.is_partition_of(m):
                raise InputError("bundles do not partition the chores among the agents")
        elif "x" in data:
            alloc = FractionalAllocation(tuple(tuple(to_fraction(v) for v in row) for row in data["x"]))
            if alloc.n != n or any(len(row) != m for row in alloc.x) or not alloc.is_complete():
                raise InputError("x must be an n-by-m matrix whose columns sum to 1")
        else:
            raise InputError('allocation needs a "bundles" or "x" key')
    except (TypeError, ValueError) as exc:
        raise InputError(f"malformed allocation: {exc}") from exc
    return alloc, prices


def _fail_self_check(what: str) -> int:
    print(f"error: solver output failed self-verification ({what})", file=sys.stderr)
    return EXIT_SELF_CHECK


def cmd_solve_indivisible(args) -> int:
    raw = _load_instance(args.input)
    try:
        sol = solve_ef1_fpo(normalize(raw))
        alloc, prices, trace = sol.allocation, sol.prices, sol.trace.dumps()
    except DegenerateAllZero:
        alloc = round_robin_allocation(raw.n, raw.m)
        prices, trace = [Fraction(0)] * raw.m, ""
    if not check_ef1(raw, alloc):
        return _fail_self_check("ef1")
    if not check_fpo_certificate(raw, alloc, prices):
        return _fail_self_check("fpo certificate")
    _write(args.output, _dump({"bundles": alloc.as_lists(), "prices": _rationals(prices)}))
    if args.trace:
        _write(args.trace, trace)
    return EXIT_OK


def cmd_solve_divisible(args) -> int:
    raw = _load_instance(args.input)
    try:
        sol = solve_ef_fpo(normalize(raw))
        alloc, prices = sol.allocation, sol.prices
    except DegenerateAllZero:
        share = Fraction(1, raw.n)
        alloc = FractionalAllocation(tuple((share,) * raw.m for _ in range(raw.n)))
        prices = [Fraction(0)] * raw.m
    for name, check in (("ef", check_ef_fractional), ("fpo certificate", check_fpo_certificate),
                        ("pef", check_pef)):
        verdict = check(raw, alloc) if name == "ef" else check(raw, alloc, prices)
        if not verdict:
            return _fail_self_check(name)
    rows = [_rationals(row) for row in alloc.x]
    _write(args.output, _dump({"x": rows, "prices": _rationals(prices)}))
    return EXIT_OK


def cmd_verify(args) -> int:
    raw = _load_instance(args.input)
    if not args.allocation:
        raise InputError("verify needs --allocation")
    alloc, prices = _load_allocation(_read(args.allocation), raw.n, raw.m)
    props = [p.strip() for p in args.properties.split(",") if p.strip()]
    unknown = [p for p in props if p not in PROPERTIES]
    if unknown:
        raise InputError(f"unknown properties {unknown}; choose from {list(PROPERTIES)}")
    if isinstance(alloc, FractionalAllocation):
        bad = [p for p in props if p in ("ef1", "po", "pef1")]
        if bad:
            raise InputError(f"{bad} apply to integral allocations only")
    if prices is None and any(p in ("fpo", "pef1", "pef") for p in props):
        raise InputError("the allocation file carries no prices")
    report = audit(raw, alloc, prices, props, args.po_cap)
    if report.results.get("po") == "skipped":
        print(f"note: po skipped, {raw.n}^{raw.m} allocations exceed --po-cap", file=sys.stderr)
    _write(args.output, _dump(report.to_dict()))
    return EXIT_OK if report.ok else EXIT_PROPERTY


def cmd_gen(args) -> int:
    try:
        raw = generate_random(args.agents, args.chores, args.k, args.density, args.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    _write(args.output, serialize_instance(raw) + "\n")
    return EXIT_OK


def cmd_replay(args) -> int:
    raw = _load_instance(args.input)
    if not args.trace or not args.allocation:
        raise InputError("replay needs --trace and --allocation")
    try:
        events = load_trace(_read(args.trace))
    except (ValueError, KeyError) as exc:
        raise InputError(f"malformed trace: {exc}") from exc
    expected, expected_prices = _load_allocation(_read(args.allocation), raw.n, raw.m)
    if not isinstance(expected, IntegralAllocation):
        raise InputError("replay compares against integral bundles")
    try:
        got, prices = replay(normalize(raw), events)
    except ReplayDivergence as exc:
        print(f"replay diverged: {exc}", file=sys.stderr)
        return EXIT_REPLAY
    if got.as_lists() != expected.as_lists():
        print("replay diverged: final bundles differ", file=sys.stderr)
        return EXIT_REPLAY
    if expected_prices is not None and prices != expected_prices:
        print("replay diverged: final prices differ", file=sys.stderr)
        return EXIT_REPLAY
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bichores",
                                     description="Fair and efficient division of bivalued chores.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def io(p, output=True):
        p.add_argument("-i", "--input", help="instance JSON (default: stdin)")
        if output:
            p.add_argument("-o", "--output", help="output file (default: stdout)")

    p = sub.add_parser("solve-indivisible", help="EF1 + fPO integral allocation")
    io(p)
    p.add_argument("--trace", help="write the solver's event log here (JSON Lines)")
    p.set_defaults(func=cmd_solve_indivisible)

    p = sub.add_parser("solve-divisible", help="EF + fPO fractional allocation")
    io(p)
    p.set_defaults(func=cmd_solve_divisible)

    p = sub.add_parser("verify", help="audit an allocation")
    io(p)
    p.add_argument("--allocation", help="allocation JSON (bundles or x, optional prices)")
    p.add_argument("--properties", default="ef1,po,fpo,pef1",
                   help=f"comma-separated subset of {','.join(PROPERTIES)}")
    p.add_argument("--po-cap", type=int, default=DEFAULT_PO_CAP,
                   help="largest n^m the Pareto-optimality search will enumerate")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="generate a random bivalued instance")
    p.add_argument("-o", "--output", help="output file (default: stdout)")
    p.add_argument("--agents", type=int, required=True)
    p.add_argument("--chores", type=int, required=True)
    p.add_argument("--k", required=True, help="high cost as an exact rational, e.g. 5 or 9/2")
    p.add_argument("--density", type=float, required=True, help="probability of a cost-1 entry")
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("replay", help="re-apply a trace and compare with an allocation")
    io(p, output=False)
    p.add_argument("--trace", help="trace written by solve-indivisible")
    p.add_argument("--allocation", help="allocation to compare against")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, InstanceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InvariantViolation, InternalBoundViolation) as exc:
        return _fail_self_check(f"{type(exc).__name__}: {exc}")
    except BichoresError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
