"""Append-only event log for the indivisible solver, JSON Lines I/O, and replay."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Optional

from .errors import ReplayDivergence
from .instance import NormalizedInstance, Regime
from .market import IntegralAllocation

KINDS = (
    "INIT_ASSIGN",
    "GROUP_FORMED",
    "INIT_TRANSFER",
    "PRICE_RISE",
    "DIRECT_TRANSFER",
    "PATH_TRANSFER",
    "TERMINATE",
)


@dataclass(frozen=True)
class TraceEvent:
    step: int
    kind: str
    payload: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({"step": self.step, "kind": self.kind, **self.payload},
                          separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "TraceEvent":
        data = json.loads(line)
        step, kind = data.pop("step"), data.pop("kind")
        if kind not in KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
        return cls(int(step), kind, data)


class Trace(list):
    """List of :class:`TraceEvent` with a helper that numbers steps."""

    def emit(self, kind: str, **payload: Any) -> TraceEvent:
        event = TraceEvent(len(self), kind, payload)
        self.append(event)
        return event

    def of_kind(self, *kinds: str) -> list[TraceEvent]:
        return [e for e in self if e.kind in kinds]

    def dumps(self) -> str:
        return "".join(e.to_json() + "\n" for e in self)


def load_trace(text: str) -> Trace:
    trace = Trace()
    for line in text.splitlines():
        if line.strip():
            trace.append(TraceEvent.from_json(line))
    return trace


def initial_prices(inst: NormalizedInstance) -> list[Fraction]:
    """Low-cost chores at 1, high-cost at k; binary instances price zero-cost chores at 0."""
    if inst.regime is Regime.BINARY:
        return [Fraction(0) if j in inst.low_chores else Fraction(1) for j in range(inst.m)]
    return [Fraction(1) if j in inst.low_chores else inst.k for j in range(inst.m)]


def replay(inst: NormalizedInstance, events: Iterable[TraceEvent]
           ) -> tuple[IntegralAllocation, list[Fraction]]:
    """Re-apply a trace from scratch and return the final allocation and prices."""
    owner: list[Optional[int]] = [None] * inst.m
    prices = initial_prices(inst)
    last = -1

    def take(j: int, src: int, dst: int) -> None:
        if not 0 <= j < inst.m or owner[j] != src:
            raise ReplayDivergence(f"chore {j} is not held by agent {src}")
        if not 0 <= dst < inst.n:
            raise ReplayDivergence(f"no agent {dst}")
        owner[j] = dst

    for e in events:
        if e.step <= last:
            raise ReplayDivergence(f"step {e.step} does not increase")
        last = e.step
        p = e.payload
        try:
            if e.kind == "INIT_ASSIGN":
                for j in p["chores"]:
                    if owner[j] is not None:
                        raise ReplayDivergence(f"chore {j} assigned twice")
                    owner[j] = p["agent"]
            elif e.kind in ("INIT_TRANSFER", "DIRECT_TRANSFER"):
                take(p["chore"], p["from"], p["to"])
            elif e.kind == "PATH_TRANSFER":
                take(p["chore_to_target"], p["via"], p["to"])
                take(p["chore_to_via"], p["from"], p["via"])
            elif e.kind == "PRICE_RISE":
                factor = Fraction(p["factor"])
                for j in p["chores"]:
                    prices[j] *= factor
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise ReplayDivergence(f"malformed {e.kind} event at step {e.step}: {exc}") from exc
    if None in owner:
        raise ReplayDivergence(f"chore {owner.index(None)} never assigned")
    return IntegralAllocation.from_owner(owner, inst.n), prices
