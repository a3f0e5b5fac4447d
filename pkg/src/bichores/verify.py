"""Independent checks of fairness and efficiency.

Everything here works from the raw cost matrix and a candidate allocation,
optionally with prices, and shares no code with the solvers. A failing
:class:`Verdict` carries a witness that :func:`witness_holds` can re-check.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Any, Iterable, Optional, Sequence, Union

import numpy as np

from .errors import TooLarge
from .market import FractionalAllocation, IntegralAllocation

ZERO = Fraction(0)
DEFAULT_PO_CAP = 10 ** 6

Allocation = Union[IntegralAllocation, FractionalAllocation]


@dataclass(frozen=True)
class Verdict:
    ok: bool
    witness: Optional[dict[str, Any]] = None

    def __bool__(self) -> bool:
        return self.ok


PASS = Verdict(True)


def _costs(inst) -> list[list[Fraction]]:
    return [[Fraction(c) for c in row] for row in inst.costs]


def _rows(alloc: Allocation, m: int) -> list[list[Fraction]]:
    if isinstance(alloc, IntegralAllocation):
        return [[Fraction(1) if j in b else ZERO for j in range(m)] for b in alloc.bundles]
    return [list(row) for row in alloc.x]


def _cost(row: Sequence[Fraction], share: Sequence[Fraction]) -> Fraction:
    return sum((c * s for c, s in zip(row, share) if s), ZERO)


def check_ef1(inst, alloc: IntegralAllocation) -> Verdict:
    """Envy-free up to one chore, judged on the given costs."""
    costs = _costs(inst)
    n = len(costs)
    for i in range(n):
        bundle = sorted(alloc.bundles[i])
        if not bundle:
            continue
        own = sum((costs[i][j] for j in bundle), ZERO)
        worst = max(bundle, key=lambda j: (costs[i][j], -j))
        best_case = own - costs[i][worst]
        for h in range(n):
            if h != i and best_case > sum((costs[i][j] for j in alloc.bundles[h]), ZERO):
                return Verdict(False, {"envier": i, "envied": h, "chore": worst})
    return PASS


def check_ef_fractional(inst, alloc: Allocation) -> Verdict:
    costs = _costs(inst)
    x = _rows(alloc, len(costs[0]))
    for i, row in enumerate(costs):
        own = _cost(row, x[i])
        for h in range(len(x)):
            if h != i and own > _cost(row, x[h]):
                return Verdict(False, {"envier": i, "envied": h})
    return PASS


def check_fpo_certificate(inst, alloc: Allocation, prices: Sequence[Fraction]) -> Verdict:
    """Sufficient condition for fractional Pareto optimality.

    Every agent must hold only chores minimizing cost per unit of price among
    the positively priced chores, and that minimum must be positive. A chore
    priced at zero may only be held by agents to whom it costs nothing.
    """
    costs = _costs(inst)
    prices = [Fraction(p) for p in prices]
    m = len(costs[0])
    if len(prices) != m:
        return Verdict(False, {"reason": "price vector has the wrong length"})
    for j, p in enumerate(prices):
        if p < 0:
            return Verdict(False, {"reason": "negative price", "chore": j})
    x = _rows(alloc, m)
    paid = [j for j in range(m) if prices[j] > 0]
    for i, row in enumerate(costs):
        held = [j for j in range(m) if x[i][j] > 0]
        for j in held:
            if prices[j] == 0 and row[j] != 0:
                return Verdict(False, {"agent": i, "chore": j, "reason": "costly chore at price 0"})
        if not paid:
            continue
        alpha = min(row[j] / prices[j] for j in paid)
        if alpha == 0:
            j = min(j for j in paid if row[j] == 0)
            return Verdict(False, {"agent": i, "chore": j, "reason": "free chore at positive price"})
        for j in held:
            if prices[j] > 0 and row[j] / prices[j] != alpha:
                return Verdict(False, {"agent": i, "chore": j, "reason": "not minimum bang-per-buck"})
    return PASS


def _integer_rows(costs: list[list[Fraction]]) -> np.ndarray:
    """Scale each row to integers; dominance only compares costs within a row."""
    rows = []
    for row in costs:
        scale = lcm(*(c.denominator for c in row))
        rows.append([int(c * scale) for c in row])
    top = max(max(r) for r in rows) * len(rows[0])
    return np.array(rows, dtype=np.int64 if top < 2 ** 62 else object)


def brute_force_po(inst, alloc: IntegralAllocation, cap: int = DEFAULT_PO_CAP,
                   chunk: int = 1 << 16) -> Verdict:
    """Search every integral allocation for one that Pareto-dominates ``alloc``.

    Allocations are visited in :func:`itertools.product` order (chore 0 is
    the slowest-moving digit), so the reported witness is deterministic.
    """
    costs = _costs(inst)
    n, m = len(costs), len(costs[0])
    total = n ** m
    if total > cap:
        raise TooLarge(f"{n}^{m} = {total} allocations exceeds the cap of {cap}")
    c = _integer_rows(costs)
    owner = alloc.owner(m)
    current = np.array([sum(c[i, j] for j in range(m) if owner[j] == i) for i in range(n)],
                       dtype=c.dtype)
    agents = np.arange(n).reshape(1, n, 1)
    assignments = itertools.product(range(n), repeat=m)
    while True:
        block = np.array(list(itertools.islice(assignments, chunk)), dtype=np.int64)
        if block.size == 0:
            return PASS
        mask = block[:, None, :] == agents  # (rows, n, m)
        spend = (mask * c[None, :, :]).sum(axis=2)
        better = np.all(spend <= current, axis=1) & np.any(spend < current, axis=1)
        hits = np.flatnonzero(better)
        if hits.size:
            y = [int(v) for v in block[hits[0]]]
            return Verdict(False, {"dominating": IntegralAllocation.from_owner(y, n).as_lists()})


def _spendings(alloc: Allocation, prices: Sequence[Fraction]) -> list[Fraction]:
    x = _rows(alloc, len(prices))
    return [sum((Fraction(p) * s for p, s in zip(prices, row) if s), ZERO) for row in x]


def check_pef1(inst, alloc: IntegralAllocation, prices: Sequence[Fraction]) -> Verdict:
    prices = [Fraction(p) for p in prices]
    spend = _spendings(alloc, prices)
    low = min(spend)
    least = spend.index(low)
    for i, bundle in enumerate(alloc.bundles):
        if bundle and spend[i] - max(prices[j] for j in bundle) > low:
            return Verdict(False, {"big_spender": i, "least_spender": least})
    return PASS


def check_pef(inst, alloc: Allocation, prices: Sequence[Fraction]) -> Verdict:
    spend = _spendings(alloc, [Fraction(p) for p in prices])
    hi, lo = max(spend), min(spend)
    if hi != lo:
        return Verdict(False, {"big_spender": spend.index(hi), "least_spender": spend.index(lo)})
    return PASS


def witness_holds(prop: str, inst, alloc: Allocation, witness: dict[str, Any],
                  prices: Optional[Sequence[Fraction]] = None) -> bool:
    """Recompute, from scratch, that ``witness`` exhibits a violation of ``prop``."""
    costs = _costs(inst)
    m = len(costs[0])
    x = _rows(alloc, m)
    if prop == "ef1":
        i, h, j = witness["envier"], witness["envied"], witness["chore"]
        own = [costs[i][t] for t in range(m) if x[i][t]]
        return bool(own) and all(
            _cost(costs[i], x[i]) - c > _cost(costs[i], x[h]) for c in own
        ) and x[i][j] == 1
    if prop == "ef":
        i, h = witness["envier"], witness["envied"]
        return _cost(costs[i], x[i]) > _cost(costs[i], x[h])
    if prop == "po":
        y = IntegralAllocation(tuple(frozenset(b) for b in witness["dominating"]))
        yx = _rows(y, m)
        before = [_cost(costs[i], x[i]) for i in range(len(costs))]
        after = [_cost(costs[i], yx[i]) for i in range(len(costs))]
        return all(a <= b for a, b in zip(after, before)) and after != before
    if prop == "fpo":
        if "agent" not in witness:
            return True
        i, j = witness["agent"], witness["chore"]
        p = [Fraction(v) for v in prices]
        if p[j] == 0:
            return x[i][j] > 0 and costs[i][j] != 0
        ratios = [costs[i][t] / p[t] for t in range(m) if p[t] > 0]
        return min(ratios) == 0 or (x[i][j] > 0 and costs[i][j] / p[j] > min(ratios))
    if prop in ("pef1", "pef"):
        spend = _spendings(alloc, [Fraction(v) for v in prices])
        b, l = witness["big_spender"], witness["least_spender"]
        if prop == "pef":
            return spend[b] > spend[l]
        top = max((Fraction(prices[t]) for t in range(m) if x[b][t]), default=ZERO)
        return spend[b] - top > spend[l]
    raise ValueError(f"unknown property {prop!r}")


PROPERTIES = ("ef1", "ef", "po", "fpo", "pef1", "pef")
_REPORT_KEY = {"fpo": "fpo_certificate"}


@dataclass
class AuditReport:
    results: dict[str, Union[bool, str]] = field(default_factory=dict)
    witnesses: dict[str, dict[str, Any]] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(v is not False for v in self.results.values())

    def to_dict(self) -> dict[str, Any]:
        return {**self.results, "witnesses": self.witnesses}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))


def audit(inst, alloc: Allocation, prices: Optional[Sequence[Fraction]] = None,
          properties: Iterable[str] = ("ef1", "po", "fpo", "pef1"),
          po_cap: int = DEFAULT_PO_CAP) -> AuditReport:
    """Run the requested checks. ``po`` is reported as ``"skipped"`` above the cap."""
    report = AuditReport()
    for prop in properties:
        key = _REPORT_KEY.get(prop, prop)
        if prop == "po":
            try:
                verdict = brute_force_po(inst, alloc, po_cap)
            except TooLarge:
                report.results[key] = "skipped"
                continue
        elif prop == "ef1":
            verdict = check_ef1(inst, alloc)
        elif prop == "ef":
            verdict = check_ef_fractional(inst, alloc)
        elif prop in ("fpo", "pef1", "pef"):
            if prices is None:
                raise ValueError(f"property {prop!r} needs prices")
            check = {"fpo": check_fpo_certificate, "pef1": check_pef1, "pef": check_pef}[prop]
            verdict = check(inst, alloc, prices)
        else:
            raise ValueError(f"unknown property {prop!r}")
        report.results[key] = verdict.ok
        if not verdict.ok:
            report.witnesses[key] = verdict.witness
    return report
