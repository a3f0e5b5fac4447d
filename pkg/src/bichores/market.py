"""Fisher-market state for chore allocation.

A market state couples an allocation (integral or fractional) with a price
vector. Agents earn ``p_j`` per unit of chore ``j``; the *spending* of an agent
is the total price of what it holds. The minimum bang-per-buck (mBB) ratio of
agent ``i`` is ``min_j c_ij / p_j`` and its mBB set holds the chores attaining
it. All comparisons are exact.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import MalformedMarket
from .instance import NormalizedInstance

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class IntegralAllocation:
    bundles: tuple[frozenset[int], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "bundles", tuple(frozenset(b) for b in self.bundles))

    @classmethod
    def from_owner(cls, owner: Sequence[int], n: int) -> "IntegralAllocation":
        bundles: list[set[int]] = [set() for _ in range(n)]
        for j, i in enumerate(owner):
            bundles[i].add(j)
        return cls(tuple(bundles))

    @property
    def n(self) -> int:
        return len(self.bundles)

    def owner(self, m: int) -> list[int]:
        owner = [-1] * m
        for i, bundle in enumerate(self.bundles):
            for j in bundle:
                if not 0 <= j < m or owner[j] != -1:
                    raise ValueError(f"chore {j} is out of range or allocated twice")
                owner[j] = i
        if -1 in owner:
            raise ValueError(f"chore {owner.index(-1)} is unallocated")
        return owner

    def is_partition_of(self, m: int) -> bool:
        try:
            self.owner(m)
        except ValueError:
            return False
        return True

    def as_lists(self) -> list[list[int]]:
        return [sorted(b) for b in self.bundles]

    def share(self, i: int, j: int) -> Fraction:
        return ONE if j in self.bundles[i] else ZERO


@dataclass(frozen=True)
class FractionalAllocation:
    """``x[i][j]`` is the fraction of chore ``j`` held by agent ``i``."""

    x: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        x = tuple(tuple(Fraction(v) for v in row) for row in self.x)
        for row in x:
            for v in row:
                if not ZERO <= v <= ONE:
                    raise ValueError(f"share {v} outside [0, 1]")
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return len(self.x)

    def column_sums(self) -> list[Fraction]:
        return [sum(col, ZERO) for col in zip(*self.x)]

    def is_complete(self) -> bool:
        return all(s == ONE for s in self.column_sums())

    def share(self, i: int, j: int) -> Fraction:
        return self.x[i][j]

    @classmethod
    def from_integral(cls, alloc: IntegralAllocation, m: int) -> "FractionalAllocation":
        return cls(tuple(tuple(ONE if j in b else ZERO for j in range(m)) for b in alloc.bundles))


class _PricedMarket:
    """Price bookkeeping and cached mBB data shared by both allocation kinds."""

    def __init__(self, instance: NormalizedInstance, prices: Sequence[Fraction]):
        self.instance = instance
        self.n, self.m = instance.n, instance.m
        if len(prices) != self.m:
            raise MalformedMarket(f"{len(prices)} prices for {self.m} chores")
        self.prices = [Fraction(p) for p in prices]
        if any(p <= 0 for p in self.prices):
            raise MalformedMarket("prices must be positive")
        values = sorted({c for row in instance.costs for c in row})
        self._cost_values = values
        index = {c: t for t, c in enumerate(values)}
        self._cost_ids = [[index[c] for c in row] for row in instance.costs]
        self._invalidate()

    def _invalidate(self) -> None:
        self._alpha: list[Optional[Fraction]] = [None] * self.n
        self._mbb: list[Optional[frozenset[int]]] = [None] * self.n
        self._mbb_agents: Optional[list[list[int]]] = None
        self._rank_table: Optional[list[list[int]]] = None
        self._price_ids: list[int] = []

    def _ranks(self) -> tuple[list[list[int]], list[int]]:
        # ratios only take |costs| x |distinct prices| values; rank them once per price epoch
        if self._rank_table is None:
            levels = sorted(set(self.prices))
            pid = {p: t for t, p in enumerate(levels)}
            self._price_ids = [pid[p] for p in self.prices]
            ratios = sorted({c / p for c in self._cost_values for p in levels})
            rank = {r: t for t, r in enumerate(ratios)}
            self._rank_table = [[rank[c / p] for p in levels] for c in self._cost_values]
        return self._rank_table, self._price_ids

    def _compute_agent(self, i: int) -> None:
        table, pids = self._ranks()
        ranks = [table[c][p] for c, p in zip(self._cost_ids[i], pids)]
        best = min(ranks)
        members = frozenset(j for j, r in enumerate(ranks) if r == best)
        j0 = next(iter(members))
        self._alpha[i] = self.instance.costs[i][j0] / self.prices[j0]
        self._mbb[i] = members

    def alpha(self, i: int) -> Fraction:
        if self._alpha[i] is None:
            self._compute_agent(i)
        return self._alpha[i]

    def mbb_set(self, i: int) -> frozenset[int]:
        if self._mbb[i] is None:
            self._compute_agent(i)
        return self._mbb[i]

    def mbb_agents(self, j: int) -> list[int]:
        """Agents having chore ``j`` in their mBB set, ascending."""
        if self._mbb_agents is None:
            table: list[list[int]] = [[] for _ in range(self.m)]
            for i in range(self.n):
                for jj in sorted(self.mbb_set(i)):
                    table[jj].append(i)
            self._mbb_agents = table
        return self._mbb_agents[j]

    def holdings(self, i: int) -> list[int]:
        raise NotImplementedError

    def spending(self, i: int) -> Fraction:
        raise NotImplementedError

    def spendings(self) -> list[Fraction]:
        return [self.spending(i) for i in range(self.n)]

    def is_on_mbb(self, agents: Optional[Iterable[int]] = None) -> bool:
        agents = range(self.n) if agents is None else agents
        return all(set(self.holdings(i)) <= self.mbb_set(i) for i in agents)


class MarketState(_PricedMarket):
    """Integral allocation plus prices. Spending and top prices are kept incrementally."""

    def __init__(self, instance: NormalizedInstance, owner: Sequence[int], prices: Sequence[Fraction]):
        super().__init__(instance, prices)
        if len(owner) != self.m or any(not 0 <= i < self.n for i in owner):
            raise MalformedMarket("owner vector does not describe a full allocation")
        self.owner = list(owner)
        self.bundles: list[set[int]] = [set() for _ in range(self.n)]
        self._spending = [ZERO] * self.n
        self._price_count: list[Counter] = [Counter() for _ in range(self.n)]
        for j, i in enumerate(self.owner):
            self.bundles[i].add(j)
            self._spending[i] += self.prices[j]
            self._price_count[i][self.prices[j]] += 1

    @classmethod
    def from_allocation(cls, instance, alloc: IntegralAllocation, prices) -> "MarketState":
        return cls(instance, alloc.owner(instance.m), prices)

    def copy(self) -> "MarketState":
        return MarketState(self.instance, self.owner, self.prices)

    def holdings(self, i: int) -> list[int]:
        return sorted(self.bundles[i])

    def spending(self, i: int) -> Fraction:
        return self._spending[i]

    def top_price(self, i: int) -> Fraction:
        counts = self._price_count[i]
        return max(counts) if counts else ZERO

    def reduced_spending(self, i: int) -> Fraction:
        return self._spending[i] - self.top_price(i)

    def move(self, j: int, to: int) -> int:
        """Reassign chore ``j`` to agent ``to``; returns the previous owner."""
        src = self.owner[j]
        p = self.prices[j]
        self.bundles[src].discard(j)
        self.bundles[to].add(j)
        self.owner[j] = to
        self._spending[src] -= p
        self._spending[to] += p
        self._dec(src, p)
        self._price_count[to][p] += 1
        return src

    def _dec(self, i: int, p: Fraction) -> None:
        counts = self._price_count[i]
        counts[p] -= 1
        if not counts[p]:
            del counts[p]

    def raise_prices(self, chores: Iterable[int], factor: Fraction) -> None:
        for j in chores:
            i = self.owner[j]
            old = self.prices[j]
            new = old * factor
            self.prices[j] = new
            self._spending[i] += new - old
            self._dec(i, old)
            self._price_count[i][new] += 1
        self._invalidate()

    def allocation(self) -> IntegralAllocation:
        return IntegralAllocation(tuple(self.bundles))


class FractionalMarketState(_PricedMarket):
    """Fractional allocation stored sparsely: ``x[i]`` maps chore -> positive share."""

    def __init__(self, instance: NormalizedInstance, x: Sequence[dict[int, Fraction]], prices):
        super().__init__(instance, prices)
        if len(x) != self.n:
            raise MalformedMarket("allocation has the wrong number of agents")
        self.x = [{j: Fraction(s) for j, s in row.items() if s} for row in x]

    @classmethod
    def from_allocation(cls, instance, alloc: FractionalAllocation, prices) -> "FractionalMarketState":
        rows = [{j: v for j, v in enumerate(row) if v} for row in alloc.x]
        return cls(instance, rows, prices)

    def holdings(self, i: int) -> list[int]:
        return sorted(j for j, s in self.x[i].items() if s > 0)

    def spending(self, i: int) -> Fraction:
        return sum((self.prices[j] * s for j, s in self.x[i].items()), ZERO)

    def give(self, src: int, dst: int, j: int, amount: Fraction) -> None:
        left = self.x[src].get(j, ZERO) - amount
        if left < 0:
            raise MalformedMarket(f"agent {src} holds less than {amount} of chore {j}")
        if left:
            self.x[src][j] = left
        else:
            self.x[src].pop(j, None)
        self.x[dst][j] = self.x[dst].get(j, ZERO) + amount

    def raise_prices(self, chores: Iterable[int], factor: Fraction) -> None:
        for j in chores:
            self.prices[j] *= factor
        self._invalidate()

    def column_sums(self) -> list[Fraction]:
        sums = [ZERO] * self.m
        for row in self.x:
            for j, s in row.items():
                sums[j] += s
        return sums

    def allocation(self) -> FractionalAllocation:
        return FractionalAllocation(
            tuple(tuple(self.x[i].get(j, ZERO) for j in range(self.m)) for i in range(self.n)))


# -- functional interface ---------------------------------------------------

def mbb_data(state: _PricedMarket) -> tuple[list[Fraction], list[frozenset[int]]]:
    return [state.alpha(i) for i in range(state.n)], [state.mbb_set(i) for i in range(state.n)]


@dataclass
class ComponentSet:
    """Agents and chores reachable from ``root`` by alternating paths.

    ``via[h]`` is the chore through which agent ``h`` was first reached and
    ``holder[j]`` the agent whose allocation edge led to chore ``j``.
    """

    root: int
    agents: set[int] = field(default_factory=set)
    chores: set[int] = field(default_factory=set)
    levels: dict[int, int] = field(default_factory=dict)
    via: dict[int, int] = field(default_factory=dict)
    holder: dict[int, int] = field(default_factory=dict)

    def path_to(self, target: int) -> list[int]:
        """``[root, j1, h1, ..., jl, target]``, alternating agents and chores."""
        if target not in self.agents:
            raise KeyError(f"agent {target} is not in the component of {self.root}")
        path = [target]
        while path[-1] != self.root:
            j = self.via[path[-1]]
            path.extend((j, self.holder[j]))
        return path[::-1]


def explore(state: _PricedMarket, root: int, allowed: Optional[set[int]] = None,
            stop=None) -> tuple[ComponentSet, Optional[int]]:
    """Level-by-level BFS over alternating paths from ``root``.

    Agents outside ``allowed`` are never entered. After each complete level,
    ``stop(agents_of_level)`` may return an agent to halt at; the partially
    built component and that agent are then returned.
    """
    comp = ComponentSet(root, {root}, levels={root: 0})
    frontier = [root]
    depth = 0
    while frontier:
        if stop is not None:
            hit = stop(frontier)
            if hit is not None:
                return comp, hit
        nxt = []
        for a in frontier:
            for j in state.holdings(a):
                if j in comp.holder:
                    continue
                comp.holder[j] = a
                comp.chores.add(j)
                for h in state.mbb_agents(j):
                    if h in comp.levels or (allowed is not None and h not in allowed):
                        continue
                    comp.levels[h] = depth + 1
                    comp.via[h] = j
                    comp.agents.add(h)
                    nxt.append(h)
        frontier = nxt
        depth += 1
    return comp, None


def component(state: _PricedMarket, root: int, allowed: Optional[set[int]] = None) -> ComponentSet:
    comp, _ = explore(state, root, allowed)
    return comp


def level(state: _PricedMarket, root: int, target: int) -> int:
    comp = component(state, root)
    return comp.levels.get(target, state.n)


def spending(state: _PricedMarket, agent: int) -> Fraction:
    return state.spending(agent)


def reduced_spending(state: MarketState, agent: int) -> Fraction:
    return state.reduced_spending(agent)


def big_spender(state: MarketState, agents: Optional[Iterable[int]] = None) -> int:
    agents = range(state.n) if agents is None else sorted(agents)
    best, best_val = -1, None
    for i in agents:
        v = state.reduced_spending(i)
        if best_val is None or v > best_val:
            best, best_val = i, v
    return best


def least_spender(state: _PricedMarket, agents: Optional[Iterable[int]] = None) -> int:
    agents = range(state.n) if agents is None else sorted(agents)
    best, best_val = -1, None
    for i in agents:
        v = state.spending(i)
        if best_val is None or v < best_val:
            best, best_val = i, v
    return best


def pef1_envies(state: MarketState, i: int, h: int) -> bool:
    return bool(state.bundles[i]) and state.reduced_spending(i) > state.spending(h)


def is_pef1(state: MarketState) -> bool:
    return state.reduced_spending(big_spender(state)) <= state.spending(least_spender(state))


def is_pef(state: _PricedMarket) -> bool:
    values = state.spendings()
    return all(v == values[0] for v in values)
