"""Exact max-flow and the balanced-flow allocation.

The max-flow itself is networkx's shortest-augmenting-path (Edmonds-Karp)
routine, which only adds, subtracts and compares capacities and therefore
stays exact on :class:`fractions.Fraction` inputs.

A *balanced flow* is a full fractional allocation on mBB edges whose sorted
spending vector is lexicographically smallest. It is built by peeling off
bottleneck sub-markets: for the current agents and chores find the least
uniform spending cap ``t*`` that still lets every chore be paid for, fix the
agents that are stuck at ``t*`` together with the chores they hold, and recurse
on what is left.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Optional, Sequence

import networkx as nx
from networkx.algorithms.flow import edmonds_karp

from .errors import InvariantViolation, MalformedMarket
from .instance import NormalizedInstance
from .market import FractionalAllocation, _PricedMarket

ZERO = Fraction(0)
SOURCE, SINK = "s", "t"


@dataclass(frozen=True)
class Flow:
    value: Fraction
    flows: dict[tuple[Hashable, Hashable], Fraction]
    source_side: frozenset

    def on(self, u: Hashable, v: Hashable) -> Fraction:
        return self.flows.get((u, v), ZERO)


class FlowNetwork:
    """Directed network with exact capacities; ``None`` means unbounded."""

    def __init__(self, source: Hashable = SOURCE, sink: Hashable = SINK):
        self.source, self.sink = source, sink
        self.graph = nx.DiGraph()
        self.graph.add_nodes_from((source, sink))

    def add_arc(self, u: Hashable, v: Hashable, capacity: Optional[Fraction] = None) -> None:
        if capacity is None:
            self.graph.add_edge(u, v)
            return
        capacity = Fraction(capacity)
        if capacity < 0:
            raise ValueError(f"negative capacity on arc {u}->{v}")
        self.graph.add_edge(u, v, capacity=capacity)

    def arcs(self):
        return list(self.graph.edges)


def max_flow(net: FlowNetwork) -> Flow:
    residual = edmonds_karp(net.graph, net.source, net.sink)
    flows = {}
    for u, v in net.graph.edges:
        data = residual[u].get(v)  # zero-capacity arcs are left out of the residual graph
        f = data["flow"] if data else 0
        if f > 0:
            flows[(u, v)] = Fraction(f)
    # nodes reachable from the source in the residual graph form a minimum cut
    seen = {net.source}
    queue = deque([net.source])
    while queue:
        u = queue.popleft()
        for v, data in residual[u].items():
            if v not in seen and data["capacity"] - data["flow"] > 0:
                seen.add(v)
                queue.append(v)
    return Flow(Fraction(residual.graph["flow_value"]), flows, frozenset(seen))


# -- balanced flow -----------------------------------------------------------

def _chore(j: int) -> tuple[str, int]:
    return ("c", j)


def _agent(i: int) -> tuple[str, int]:
    return ("a", i)


class _Bipartite:
    """mBB edges of a priced market restricted to a set of agents and chores."""

    def __init__(self, prices: Sequence[Fraction], adjacency: list[list[int]]):
        self.prices = prices
        self.adjacency = adjacency

    def network(self, agents: set[int], chores: set[int], cap: Optional[Fraction]) -> FlowNetwork:
        net = FlowNetwork()
        for j in sorted(chores):
            net.add_arc(SOURCE, _chore(j), self.prices[j])
            for i in self.adjacency[j]:
                if i in agents:
                    net.add_arc(_chore(j), _agent(i))
        for i in sorted(agents):
            net.add_arc(_agent(i), SINK, cap)
        return net

    def neighbours(self, chores, agents: set[int]) -> set[int]:
        return {i for j in chores for i in self.adjacency[j] if i in agents}


def mbb_adjacency(inst: NormalizedInstance, prices: Sequence[Fraction]) -> list[list[int]]:
    """For each chore, the ascending list of agents having it in their mBB set."""
    market = _PricedMarket(inst, prices)
    return [list(market.mbb_agents(j)) for j in range(inst.m)]


def feasible(graph: _Bipartite, agents: set[int], chores: set[int], t: Fraction) -> bool:
    """Can every chore be paid for when no agent may earn more than ``t``?"""
    need = sum((graph.prices[j] for j in chores), ZERO)
    return max_flow(graph.network(agents, chores, t)).value == need


def bottleneck(graph: _Bipartite, agents: set[int], chores: set[int]) -> tuple[Fraction, Flow]:
    """Least feasible uniform cap and a max-flow attaining it.

    The answer is ``max p(S) / |N(S)|`` over chore sets ``S``. Starting from
    the whole set, each infeasible cap exposes (through its minimum cut) a set
    whose ratio is strictly larger, so the iteration climbs to the maximum.
    """
    need = sum((graph.prices[j] for j in chores), ZERO)
    t = need / len(graph.neighbours(chores, agents))
    while True:
        flow = max_flow(graph.network(agents, chores, t))
        if flow.value == need:
            return t, flow
        stuck = [j for j in chores if _chore(j) in flow.source_side]
        nxt = sum((graph.prices[j] for j in stuck), ZERO) / len(graph.neighbours(stuck, agents))
        if nxt <= t:
            raise InvariantViolation(f"bottleneck search stalled at {t}")
        t = nxt


def _tight_agents(graph: _Bipartite, agents: set[int], flow: Flow, t: Fraction) -> set[int]:
    """Agents at spending ``t`` that cannot pass any of it on to an agent with slack.

    Spending moves from agent ``a`` to agent ``h`` when ``a`` is paid for some
    chore that is also on ``h``'s mBB set; search backwards from the slack agents.
    """
    holders: dict[int, list[int]] = {}
    for (u, v) in flow.flows:
        if u != SOURCE and v != SINK:
            holders.setdefault(u[1], []).append(v[1])
    wanted: dict[int, list[int]] = {i: [] for i in agents}
    for j in holders:
        for h in graph.adjacency[j]:
            if h in wanted:
                wanted[h].append(j)
    slack = {i for i in agents if flow.on(_agent(i), SINK) < t}
    reach = set(slack)
    queue = deque(slack)
    while queue:
        h = queue.popleft()
        for j in wanted[h]:
            for a in holders[j]:
                if a not in reach:
                    reach.add(a)
                    queue.append(a)
    return agents - reach


def balanced_flow(inst: NormalizedInstance, prices: Sequence[Fraction]) -> FractionalAllocation:
    """Full mBB-supported allocation with lexicographically least sorted spendings."""
    prices = [Fraction(p) for p in prices]
    adjacency = mbb_adjacency(inst, prices)
    for j, agents_j in enumerate(adjacency):
        if not agents_j:
            raise MalformedMarket(f"chore {j} is on nobody's mBB set")
    graph = _Bipartite(prices, adjacency)
    x = [[ZERO] * inst.m for _ in range(inst.n)]
    agents, chores = set(range(inst.n)), set(range(inst.m))
    while chores:
        t, flow = bottleneck(graph, agents, chores)
        tight = _tight_agents(graph, agents, flow, t)
        if not tight:
            raise InvariantViolation(f"no bottleneck agents at cap {t}")
        fixed = set()
        for (u, v), f in flow.flows.items():
            if u == SOURCE or v == SINK or v[1] not in tight:
                continue
            j, i = u[1], v[1]
            x[i][j] = f / prices[j]
            fixed.add(j)
        agents -= tight
        chores -= fixed
        if chores and not agents:
            raise InvariantViolation("chores left over with no agents")
    return FractionalAllocation(tuple(tuple(row) for row in x))
