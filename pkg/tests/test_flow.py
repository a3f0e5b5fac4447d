import itertools
from fractions import Fraction

import pytest

from bichores.errors import MalformedMarket
from bichores.flow import (
    FlowNetwork,
    _Bipartite,
    balanced_flow,
    bottleneck,
    feasible,
    max_flow,
    mbb_adjacency,
)
from bichores.instance import generate_random, normalize
from bichores.trace import initial_prices
from conftest import inst_of
from oracles import higher_reaches_lower, spendings

F = Fraction


def bipartite(prices, adjacency, cap):
    net = FlowNetwork()
    for j, p in enumerate(prices):
        net.add_arc("s", ("c", j), p)
        for i in adjacency[j]:
            net.add_arc(("c", j), ("a", i))
    for i in {i for adj in adjacency for i in adj}:
        net.add_arc(("a", i), "t", cap)
    return net


def test_single_chore_unbounded_agent():
    assert max_flow(bipartite([F(1)], [[0]], None)).value == 1


def test_agent_cap_binds():
    assert max_flow(bipartite([F(1), F(1)], [[0], [0]], F(1))).value == 1


def test_two_by_two_complete():
    flow = max_flow(bipartite([F(1), F(3)], [[0, 1], [0, 1]], F(2)))
    assert flow.value == 4
    for i in range(2):
        assert flow.on(("a", i), "t") == 2


def test_conservation_and_capacities():
    net = bipartite([F(2), F(1, 3), F(5)], [[0], [0, 1], [1, 2]], F(3, 2))
    flow = max_flow(net)
    nodes = {u for u, _ in net.arcs()} | {v for _, v in net.arcs()}
    for node in nodes - {"s", "t"}:
        inflow = sum((f for (u, v), f in flow.flows.items() if v == node), F(0))
        outflow = sum((f for (u, v), f in flow.flows.items() if u == node), F(0))
        assert inflow == outflow
    for u, v in net.arcs():
        cap = net.graph[u][v].get("capacity")
        assert flow.on(u, v) >= 0 and (cap is None or flow.on(u, v) <= cap)
    out_of_source = sum((f for (u, _), f in flow.flows.items() if u == "s"), F(0))
    assert out_of_source == flow.value


def test_negative_capacity_rejected():
    with pytest.raises(ValueError):
        FlowNetwork().add_arc("s", "t", F(-1))


def shares(alloc):
    return [[str(v) for v in row] for row in alloc.x]


def test_crossed_costs_give_identity():
    inst = inst_of([[1, 5], [5, 1]])
    x = balanced_flow(inst, [F(1), F(1)])
    assert shares(x) == [["1", "0"], ["0", "1"]]


def test_identical_costs_split_evenly():
    inst = inst_of([[1] * 5] * 3)
    x = balanced_flow(inst, [F(1)] * 5)
    assert spendings(x.x, [1] * 5) == [F(5, 3)] * 3
    assert x.is_complete()


def test_shared_cheap_chore_equalizes():
    inst = inst_of([[1, 1], [5, 1]])
    x = balanced_flow(inst, [F(1), F(1)])
    assert shares(x) == [["1", "0"], ["0", "1"]]


def test_chore_without_mbb_agent():
    inst = inst_of([[1, 5], [1, 5]])
    with pytest.raises(MalformedMarket):
        balanced_flow(inst, [F(1), F(1)])


def test_bottleneck_is_densest_chore_set():
    for seed in range(40):
        inst = normalize(generate_random(4, 5, 3, 0.4, seed))
        prices = initial_prices(inst)
        adjacency = mbb_adjacency(inst, prices)
        graph = _Bipartite(prices, adjacency)
        agents, chores = set(range(inst.n)), set(range(inst.m))
        t, _ = bottleneck(graph, agents, chores)
        best = max(
            sum(prices[j] for j in S) / len({i for j in S for i in adjacency[j]})
            for r in range(1, inst.m + 1) for S in itertools.combinations(range(inst.m), r)
        )
        assert t == best


def test_feasibility_is_monotone():
    inst = normalize(generate_random(4, 6, 5, 0.3, 3))
    prices = initial_prices(inst)
    graph = _Bipartite(prices, mbb_adjacency(inst, prices))
    agents, chores = set(range(4)), set(range(6))
    grid = sorted({F(a + 5 * b, g) for a in range(7) for b in range(7) for g in range(1, 5)})
    answers = [feasible(graph, agents, chores, t) for t in grid]
    assert answers == sorted(answers)
    t, _ = bottleneck(graph, agents, chores)
    assert answers.index(True) == grid.index(t)


def test_six_agent_example_has_no_splits(six_agents):
    inst = normalize(six_agents)
    prices = initial_prices(inst)
    x = balanced_flow(inst, prices)
    assert spendings(x.x, prices) == [5, 4, 1, 1, 1, 1]
    assert all(v in (0, 1) for row in x.x for v in row)
    assert higher_reaches_lower(x.x, inst.costs, prices) is None
