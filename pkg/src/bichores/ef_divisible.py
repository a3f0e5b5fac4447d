"""EF + fPO allocation of divisible bivalued chores.

Start from a balanced flow at prices 1 / k, split agents into groups of equal
spending, then guess how many leading groups ``r`` must have their prices
raised by ``k``. For a guess, two pools drain toward each other: ``B`` (the
raised biggest spenders) hands uniform slices of its bundles to ``L`` (the
least spenders) until both meet an adjacent group's spending level, at which
point that group joins the pool. The first guess that reaches equal spending
for everybody wins.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

from .ef1_solver import GroupPartition
from .errors import InsufficientSpend, InvariantViolation
from .flow import balanced_flow
from .instance import NormalizedInstance, Regime
from .market import FractionalAllocation, FractionalMarketState, explore, is_pef
from .trace import initial_prices

ZERO = Fraction(0)
ONE = Fraction(1)

Bundle = dict[int, Fraction]


@dataclass
class PoolState:
    B: set[int]
    L: set[int]
    beta: int
    lambda_pool: int
    r: int
    s_B: Fraction = ZERO
    s_L: Fraction = ZERO


@dataclass
class DivisibleSolution:
    allocation: FractionalAllocation
    prices: list[Fraction]
    partition: Optional[GroupPartition] = None
    initial_allocation: Optional[FractionalAllocation] = None
    r_star: Optional[int] = None  # None when the initial allocation was already pEF
    rounds: int = 0
    tried: list[int] = field(default_factory=list)


def take_fractional_subset(bundle: Mapping[int, Fraction], prices, target: Fraction) -> Bundle:
    """Sub-bundle worth exactly ``target``, filled greedily by ascending chore index."""
    target = Fraction(target)
    if target < 0:
        raise ValueError("target must be non-negative")
    out: Bundle = {}
    left = target
    for j in sorted(bundle):
        if left == 0:
            break
        worth = prices[j] * bundle[j]
        if worth <= left:
            out[j] = bundle[j]
            left -= worth
        else:
            out[j] = left / prices[j]
            left = ZERO
    if left:
        raise InsufficientSpend(f"bundle is worth {target - left}, asked for {target}")
    return out


def make_init_groups_div(inst: NormalizedInstance, check: bool = True
                         ) -> tuple[FractionalMarketState, GroupPartition]:
    if inst.regime is Regime.BINARY:
        raise ValueError("binary instances take the direct shortcut, not grouping")
    prices = initial_prices(inst)
    state = FractionalMarketState.from_allocation(inst, balanced_flow(inst, prices), prices)
    remaining = set(range(inst.n))
    groups, comps, roots = [], [], []
    group_of = [-1] * inst.n
    while remaining:
        top = max(state.spending(i) for i in remaining)
        root = min(i for i in remaining if state.spending(i) == top)
        comp, _ = explore(state, root, remaining)
        members = tuple(sorted(comp.agents))
        r = len(groups)
        groups.append(members)
        comps.append((frozenset(members), frozenset(comp.chores)))
        roots.append(root)
        for a in members:
            group_of[a] = r
        remaining -= comp.agents
    part = GroupPartition(groups, comps, roots, group_of, set(range(len(groups))))
    if check:
        prev = None
        for r, members in enumerate(groups):
            s = {state.spending(a) for a in members}
            if len(s) != 1:
                raise InvariantViolation(f"group {r} has unequal spendings {sorted(s)}")
            (s,) = s
            if prev is not None and s > prev:
                raise InvariantViolation(f"group {r} outspends group {r - 1}")
            prev = s
    return state, part


def _group_spending(state: FractionalMarketState, members) -> Fraction:
    return state.spending(members[0])


def _check_pools(state: FractionalMarketState, pools: PoolState, total: Fraction) -> None:
    for name, pool in (("B", pools.B), ("L", pools.L)):
        values = {state.spending(a) for a in pool}
        if len(values) != 1:
            raise InvariantViolation(f"pool {name} has unequal spendings {sorted(values)}")
    if sum(state.spendings(), ZERO) != total:
        raise InvariantViolation("total spending is not conserved")
    if any(s != ONE for s in state.column_sums()):
        raise InvariantViolation("a chore is no longer fully allocated")
    if not state.is_on_mbb():
        raise InvariantViolation("allocation left the mBB graph")


def _attempt(inst: NormalizedInstance, r: int, monitor: bool
             ) -> tuple[Optional[FractionalMarketState], GroupPartition, int]:
    state, part = make_init_groups_div(inst, check=monitor)
    groups = part.groups
    R = part.R
    raised = sorted({j for g in range(r) for a in groups[g] for j in state.x[a]})
    state.raise_prices(raised, inst.k)
    part.unraised = set(range(r, R))
    total = sum(state.prices, ZERO)

    pools = PoolState(set(groups[0]), set(groups[R - 1]), 0, R - 1, r)
    rounds = 0
    while pools.beta <= r - 1 and pools.lambda_pool >= r:
        B, L = sorted(pools.B), sorted(pools.L)
        pools.s_B = state.spending(B[0])
        pools.s_L = state.spending(L[0])
        d_B = len(B) * (pools.s_B - _group_spending(state, groups[pools.beta + 1]))
        d_L = len(L) * (_group_spending(state, groups[pools.lambda_pool - 1]) - pools.s_L)
        if pools.beta == r - 1 and pools.lambda_pool == r:
            q = (len(B) * pools.s_B + len(L) * pools.s_L) / (len(B) + len(L))
            amount = pools.s_B - q
        else:
            amount = min(d_B, d_L) / len(B)
        share = ONE / len(L)
        for b in B:
            for j, piece in take_fractional_subset(state.x[b], state.prices, amount).items():
                for l in L:
                    state.give(b, l, j, piece * share)
        rounds += 1
        if monitor:
            _check_pools(state, pools, total)
        if is_pef(state):
            return state, part, rounds
        if d_B >= d_L:
            pools.lambda_pool -= 1
            pools.L |= set(groups[pools.lambda_pool])
        else:
            pools.beta += 1
            pools.B |= set(groups[pools.beta])
    return None, part, rounds


def _solve_binary(inst: NormalizedInstance) -> DivisibleSolution:
    """Zero-cost chores to the first agent who does not mind them; others split evenly."""
    n, m = inst.n, inst.m
    x = [[ZERO] * m for _ in range(n)]
    for j in range(m):
        zero = [i for i in range(n) if inst.costs[i][j] == 0]
        if zero:
            x[zero[0]][j] = ONE
        else:
            for i in range(n):
                x[i][j] = Fraction(1, n)
    alloc = FractionalAllocation(tuple(tuple(row) for row in x))
    return DivisibleSolution(alloc, initial_prices(inst), initial_allocation=alloc)


def solve_ef_fpo(inst: NormalizedInstance, monitor: bool = True) -> DivisibleSolution:
    """Compute an EF + fPO fractional allocation and equilibrium prices (all spendings equal)."""
    if inst.regime is Regime.BINARY:
        return _solve_binary(inst)
    state, part = make_init_groups_div(inst, check=monitor)
    initial = state.allocation()
    if is_pef(state):
        return DivisibleSolution(initial, list(state.prices), part, initial)
    tried, rounds = [], 0
    for r in range(1, part.R):
        tried.append(r)
        final, attempt_part, used = _attempt(inst, r, monitor)
        rounds += used
        if final is not None:
            return DivisibleSolution(final.allocation(), list(final.prices), attempt_part,
                                     initial, r, rounds, tried)
    raise InvariantViolation(f"no raise count in 1..{part.R - 1} reached equal spending")
