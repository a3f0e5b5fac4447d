"""Bivalued chore instances: validation, normalization, generation and JSON I/O.

Costs are held as :class:`fractions.Fraction` throughout. A raw instance may
use any two non-negative values ``b <= a``; normalization rescales it so that
every cost is ``1`` or ``k = a / b``.
"""
from __future__ import annotations

import enum
import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Union

from .errors import DegenerateAllZero, InstanceError, NotBivalued

Matrix = tuple[tuple[Fraction, ...], ...]


class Regime(str, enum.Enum):
    IDENTICAL = "IDENTICAL"
    BINARY = "BINARY"
    BIVALUED = "BIVALUED"


def to_fraction(value: Any) -> Fraction:
    """Exact conversion; floats are refused because they are rarely what was meant."""
    if isinstance(value, bool) or isinstance(value, float):
        raise InstanceError(f"cost {value!r} is not an exact rational")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InstanceError(f"cannot parse {value!r} as a rational") from exc
    raise InstanceError(f"unsupported cost type {type(value).__name__}")


def _freeze(costs: Iterable[Iterable[Any]]) -> Matrix:
    rows = tuple(tuple(to_fraction(c) for c in row) for row in costs)
    if not rows or not rows[0]:
        raise InstanceError("need at least one agent and one chore")
    m = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != m:
            raise InstanceError(f"row {i} has {len(row)} entries, expected {m}")
        for j, c in enumerate(row):
            if c < 0:
                raise InstanceError(f"negative cost {c} at ({i}, {j})")
    return rows


def _distinct(costs: Matrix) -> list[Fraction]:
    return sorted({c for row in costs for c in row})


@dataclass(frozen=True)
class RawInstance:
    """An ``n x m`` bivalued cost matrix as supplied by the user."""

    costs: Matrix

    def __post_init__(self) -> None:
        costs = _freeze(self.costs)
        values = _distinct(costs)
        if len(values) > 2:
            raise NotBivalued(f"found {len(values)} distinct costs: {values[:5]}")
        object.__setattr__(self, "costs", costs)

    @property
    def n(self) -> int:
        return len(self.costs)

    @property
    def m(self) -> int:
        return len(self.costs[0])


@dataclass(frozen=True)
class NormalizedInstance:
    """Costs rescaled to ``{1, k}`` (``{0, 1}`` in the binary regime).

    ``agent_scale[i]`` is the divisor applied to row ``i``; multiplying a
    normalized cost by it recovers the raw cost. In the binary regime ``k`` is
    stored as ``0`` so that entries still lie in ``{1, k}``.
    """

    costs: Matrix
    k: Fraction
    low_chores: frozenset[int]
    high_chores: frozenset[int]
    agent_scale: tuple[Fraction, ...]
    regime: Regime

    @property
    def n(self) -> int:
        return len(self.costs)

    @property
    def m(self) -> int:
        return len(self.costs[0])

    def min_cost(self, j: int) -> Fraction:
        return min(row[j] for row in self.costs)


AnyInstance = Union[RawInstance, NormalizedInstance]


def normalize(raw: AnyInstance) -> NormalizedInstance:
    """Rescale a bivalued instance to costs in ``{1, k}``.

    Rows whose every entry is ``k`` are divided by ``k`` so each agent has a
    cost-1 chore. Accepts an already normalized instance; the result is then
    identical to the input.
    """
    costs = raw.costs
    n, m = len(costs), len(costs[0])
    base = raw.agent_scale if isinstance(raw, NormalizedInstance) else (Fraction(1),) * n
    values = _distinct(costs)
    if len(values) > 2:
        raise NotBivalued(f"found {len(values)} distinct costs")

    if len(values) == 1:
        (v,) = values
        if v == 0:
            raise DegenerateAllZero("every cost is zero")
        return _build([[Fraction(1)] * m for _ in range(n)], Fraction(1),
                      [s * v for s in base], Regime.IDENTICAL)

    b, a = values
    if b == 0:
        scaled = [[c / a for c in row] for row in costs]
        return _build(scaled, Fraction(0), [s * a for s in base], Regime.BINARY)

    k = a / b
    scaled = []
    scale = []
    for i, row in enumerate(costs):
        divisor = b
        if all(c == a for c in row):
            divisor = a
        scaled.append([c / divisor for c in row])
        scale.append(base[i] * divisor)
    if not any(c == k for row in scaled for c in row):
        return _build(scaled, Fraction(1), scale, Regime.IDENTICAL)
    return _build(scaled, k, scale, Regime.BIVALUED)


def _build(costs, k, scale, regime) -> NormalizedInstance:
    frozen = tuple(tuple(row) for row in costs)
    cheap = Fraction(0) if regime is Regime.BINARY else Fraction(1)
    m = len(frozen[0])
    low = frozenset(j for j in range(m) if any(row[j] == cheap for row in frozen))
    high = frozenset(range(m)) - low
    return NormalizedInstance(frozen, k, low, high, tuple(scale), regime)


def generate_random(n: int, m: int, k: Any, low_density: float, seed: int) -> RawInstance:
    """Random instance with entries 1 (probability ``low_density``) or ``k``.

    Any row that came out all-``k`` gets one uniformly chosen entry set to 1.
    """
    k = to_fraction(k)
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    if k <= 1:
        raise ValueError("k must exceed 1")
    if not 0 < low_density <= 1:
        raise ValueError("low_density must lie in (0, 1]")
    rng = random.Random(seed)
    one = Fraction(1)
    rows = [[one if rng.random() < low_density else k for _ in range(m)] for _ in range(n)]
    for row in rows:
        if all(c == k for c in row):
            row[rng.randrange(m)] = one
    return RawInstance(rows)


def parse_instance(text: str) -> RawInstance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InstanceError("instance must be a JSON object")
    try:
        n, m, costs = data["agents"], data["chores"], data["costs"]
    except KeyError as exc:
        raise InstanceError(f"missing key {exc}") from exc
    if not isinstance(costs, list) or not all(isinstance(r, list) for r in costs):
        raise InstanceError("costs must be a list of lists")
    inst = RawInstance(costs)
    if (inst.n, inst.m) != (n, m):
        raise InstanceError(f"declared {n}x{m} but costs are {inst.n}x{inst.m}")
    return inst


def format_rational(value: Fraction) -> str:
    return str(Fraction(value))


def serialize_instance(inst: AnyInstance) -> str:
    payload = {
        "agents": inst.n,
        "chores": inst.m,
        "costs": [[format_rational(c) for c in row] for row in inst.costs],
    }
    return json.dumps(payload, separators=(",", ":"))
