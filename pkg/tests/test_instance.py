from fractions import Fraction

import pytest

from bichores.errors import DegenerateAllZero, InstanceError, NotBivalued
from bichores.instance import (
    RawInstance,
    Regime,
    generate_random,
    normalize,
    parse_instance,
    serialize_instance,
    to_fraction,
)

F = Fraction


def rows(inst):
    return [[F(c) for c in r] for r in inst.costs]


def test_normalize_divides_by_the_low_value():
    inst = normalize(RawInstance([[2, 10], [10, 2]]))
    assert inst.k == 5
    assert rows(inst) == [[1, 5], [5, 1]]
    assert inst.regime is Regime.BIVALUED
    assert inst.agent_scale == (2, 2)
    assert inst.low_chores == {0, 1} and not inst.high_chores


def test_single_value_is_identical_regime():
    inst = normalize(RawInstance([[7, 7], [7, 7]]))
    assert inst.regime is Regime.IDENTICAL
    assert inst.k == 1
    assert rows(inst) == [[1, 1], [1, 1]]
    assert inst.agent_scale == (7, 7)


def test_all_high_row_is_rescaled():
    inst = normalize(RawInstance([[5, 5], [1, 5]]))
    assert rows(inst) == [[1, 1], [1, 5]]
    assert inst.k == 5
    assert inst.low_chores == {0, 1}
    assert inst.agent_scale == (5, 1)
    assert all(min(r) == 1 for r in inst.costs)


def test_rescaling_can_leave_only_ones():
    inst = normalize(RawInstance([[1, 1], [3, 3]]))
    assert inst.regime is Regime.IDENTICAL
    assert inst.k == 1
    assert rows(inst) == [[1, 1], [1, 1]]
    assert inst.agent_scale == (1, 3)


def test_zero_low_value_gives_binary_regime():
    inst = normalize(RawInstance([[0, 3], [3, 3]]))
    assert inst.regime is Regime.BINARY
    assert inst.k == 0
    assert rows(inst) == [[0, 1], [1, 1]]
    assert inst.low_chores == {0}
    assert inst.high_chores == {1}


def test_all_zero_is_degenerate():
    with pytest.raises(DegenerateAllZero):
        normalize(RawInstance([[0, 0], [0, 0]]))


@pytest.mark.parametrize("costs", [
    [[1, 2, 3]],
    [[1, 2], [4, 1]],
])
def test_three_values_rejected(costs):
    with pytest.raises(NotBivalued):
        RawInstance(costs)


@pytest.mark.parametrize("costs", [
    [[1, -1]],
    [[1, 2], [1]],
    [],
    [[]],
    [[1.5, 1]],
    [[True, 1]],
    [["x", 1]],
])
def test_malformed_costs_rejected(costs):
    with pytest.raises(InstanceError):
        RawInstance(costs)


def test_normalize_is_idempotent():
    once = normalize(RawInstance([[5, 5, 5], [1, 5, 1], [5, 1, 5]]))
    assert normalize(once) == once


def test_rational_strings_compare_equal():
    assert to_fraction("10/2") == to_fraction("5") == 5
    a = parse_instance('{"agents":1,"chores":2,"costs":[["10/2","1"]]}')
    b = parse_instance('{"agents":1,"chores":2,"costs":[["5","1"]]}')
    assert a == b


def test_parse_gives_k_candidate():
    raw = parse_instance('{"agents":2,"chores":2,"costs":[["1","5"],["5","1"]]}')
    assert raw.n == 2 and raw.m == 2
    assert normalize(raw).k == 5


def test_serialize_round_trip():
    text = '{"agents":2,"chores":3,"costs":[["1","9/2","1"],["9/2","9/2","1"]]}'
    assert serialize_instance(parse_instance(text)) == text


@pytest.mark.parametrize("text", [
    "{",
    "[]",
    '{"agents":2,"chores":2}',
    '{"agents":3,"chores":2,"costs":[["1","5"],["5","1"]]}',
    '{"agents":1,"chores":2,"costs":"nope"}',
])
def test_parse_errors(text):
    with pytest.raises(InstanceError):
        parse_instance(text)


def test_generator_full_density_is_all_ones():
    raw = generate_random(2, 3, 5, 1.0, seed=4)
    assert rows(raw) == [[1, 1, 1], [1, 1, 1]]


def test_generator_single_cell_is_reproducible():
    a = generate_random(1, 1, 2, 0.5, seed=11)
    assert a == generate_random(1, 1, 2, 0.5, seed=11)
    assert rows(a) in ([[1]], [[2]])


def test_generator_snapshot():
    raw = generate_random(4, 8, 3, 0.4, seed=17)
    assert rows(raw) == [
        [3, 3, 3, 1, 3, 3, 3, 1],
        [1, 1, 3, 1, 3, 1, 3, 3],
        [3, 3, 1, 3, 3, 1, 3, 3],
        [3, 1, 3, 3, 3, 1, 1, 3],
    ]


def test_generator_gives_every_agent_a_cheap_chore():
    for seed in range(50):
        raw = generate_random(5, 4, F(9, 2), 0.05, seed)
        assert all(min(r) == 1 for r in raw.costs)


@pytest.mark.parametrize("args", [(0, 3, 5, 0.5), (2, 3, 1, 0.5), (2, 3, 5, 0.0), (2, 3, 5, 1.5)])
def test_generator_argument_checks(args):
    with pytest.raises(ValueError):
        generate_random(*args, seed=0)
