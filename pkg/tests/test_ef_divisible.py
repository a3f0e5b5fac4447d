from fractions import Fraction

import pytest

from bichores.ef_divisible import make_init_groups_div, solve_ef_fpo, take_fractional_subset
from bichores.errors import InsufficientSpend
from bichores.instance import normalize
from bichores.verify import check_ef_fractional, check_fpo_certificate, check_pef
from conftest import inst_of
from oracles import spendings

F = Fraction


def test_subset_of_zero_is_empty():
    assert take_fractional_subset({0: F(1)}, [F(1)], F(0)) == {}


def test_subset_greedy_by_index():
    assert take_fractional_subset({1: F(1), 0: F(1)}, [F(1), F(1)], F(3, 2)) == {0: F(1), 1: F(1, 2)}


def test_subset_single_split():
    assert take_fractional_subset({0: F(1)}, [F(5)], F(2)) == {0: F(2, 5)}


def test_subset_of_partial_shares():
    assert take_fractional_subset({0: F(1, 2), 3: F(1)}, [F(4), 0, 0, F(2)], F(3)) == {0: F(1, 2), 3: F(1, 2)}


def test_subset_too_large():
    with pytest.raises(InsufficientSpend):
        take_fractional_subset({0: F(1, 2)}, [F(2)], F(2))


def test_groups_of_crossed_costs():
    state, part = make_init_groups_div(inst_of([[1, 5], [5, 1]]))
    assert part.groups == [(0,), (1,)]
    assert state.spendings() == [1, 1]


def test_single_group_for_identical_costs():
    state, part = make_init_groups_div(inst_of([[1] * 4] * 3))
    assert part.groups == [(0, 1, 2)]
    assert state.spendings() == [F(4, 3)] * 3


def test_groups_of_six_agent_example(six_agents):
    state, part = make_init_groups_div(normalize(six_agents))
    assert part.groups == [(0,), (1,), (2,), (3,), (4,), (5,)]
    assert state.spendings() == [5, 4, 1, 1, 1, 1]


def test_identical_costs_are_pef_from_the_start():
    sol = solve_ef_fpo(inst_of([[1] * 5] * 2))
    assert sol.r_star is None
    assert spendings(sol.allocation.x, sol.prices) == [F(5, 2)] * 2


def test_crossed_costs_keep_identity():
    sol = solve_ef_fpo(inst_of([[1, 5], [5, 1]]))
    assert sol.allocation.x == ((1, 0), (0, 1))
    assert sol.r_star is None


def test_one_raise_and_a_drain():
    inst = inst_of([[1, 1, 1], [5, 1, 5]])
    sol = solve_ef_fpo(inst)
    assert sol.r_star == 1
    assert sol.prices == [5, 1, 5]
    assert sol.allocation.x == ((F(1, 10), 0, 1), (F(9, 10), 1, 0))
    assert spendings(sol.allocation.x, sol.prices) == [F(11, 2), F(11, 2)]
    assert check_ef_fractional(inst, sol.allocation)
    assert check_fpo_certificate(inst, sol.allocation, sol.prices)


def test_binary_shortcut():
    inst = inst_of([[0, 1, 1], [1, 1, 0]])
    sol = solve_ef_fpo(inst)
    assert sol.allocation.x == ((1, F(1, 2), 0), (0, F(1, 2), 1))
    assert sol.prices == [0, 1, 0]
    assert check_ef_fractional(inst, sol.allocation)
    assert check_fpo_certificate(inst, sol.allocation, sol.prices)
    assert check_pef(inst, sol.allocation, sol.prices)


@pytest.mark.parametrize("name", ["six_agents", "seven_agents"])
def test_worked_examples_as_divisible(request, name):
    raw = request.getfixturevalue(name)
    sol = solve_ef_fpo(normalize(raw))
    assert sol.r_star is not None and 1 <= sol.r_star < sol.partition.R
    assert check_pef(raw, sol.allocation, sol.prices)
    assert check_ef_fractional(raw, sol.allocation)
    assert check_fpo_certificate(raw, sol.allocation, sol.prices)


@pytest.mark.parametrize("args, r_star", [
    ((6, 3, 3, 0.1, 920), 2),
    ((9, 4, 3, 0.1, 1251), 3),
])
def test_later_raise_counts_are_reached(args, r_star):
    from bichores.instance import generate_random
    raw = generate_random(*args[:4], seed=args[4])
    sol = solve_ef_fpo(normalize(raw))
    assert sol.r_star == r_star
    assert sol.tried == list(range(1, r_star + 1))
    assert check_pef(raw, sol.allocation, sol.prices)
    assert check_ef_fractional(raw, sol.allocation)
