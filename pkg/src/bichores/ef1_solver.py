"""EF1 + fPO allocation of indivisible bivalued chores.

The solver keeps an integral market outcome on mBB throughout and drives it
to price-envy-freeness up to one chore (pEF1), which implies EF1 and fPO.

1. :func:`make_init_groups` starts from a cost-minimizing allocation (low-cost
   chores priced 1, high-cost chores priced k) and splits the agents into
   ordered groups, each internally pEF1.
2. :func:`solve_ef1_fpo` then repeatedly looks at the big spender ``b``
   (largest spending after dropping its priciest chore) and the least spender
   ``l``. Before the least spender first lands in a raised group, it either
   raises ``b``'s group by a factor ``k`` or moves one chore from ``b`` to ``l``.
   After that moment it moves chores directly, or along a three-agent path
   that hands ``l`` back one of its original chores.

Ties are always broken towards the lowest agent or chore index.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import InternalBoundViolation, InvariantViolation
from .instance import NormalizedInstance, Regime
from .market import (
    IntegralAllocation,
    MarketState,
    big_spender,
    component,
    explore,
    is_pef1,
    least_spender,
)
from .trace import Trace, initial_prices


class Phase(str, enum.Enum):
    PRE_T = "PRE_T"
    POST_T = "POST_T"


@dataclass
class GroupPartition:
    groups: list[tuple[int, ...]]
    components: list[tuple[frozenset[int], frozenset[int]]]
    roots: list[int]
    group_of: list[int]
    unraised: set[int] = field(default_factory=set)

    @property
    def R(self) -> int:
        return len(self.groups)


@dataclass
class EF1Solution:
    allocation: IntegralAllocation
    prices: list[Fraction]
    trace: Trace
    partition: Optional[GroupPartition] = None
    initial_allocation: Optional[IntegralAllocation] = None
    phase: Phase = Phase.PRE_T
    r_star: int = 0  # number of raised groups; they are exactly the first r_star
    counts: dict[str, int] = field(default_factory=dict)

    @property
    def steps(self) -> int:
        return sum(self.counts.get(k, 0) for k in
                   ("INIT_TRANSFER", "PRICE_RISE", "DIRECT_TRANSFER", "PATH_TRANSFER"))


def _init_budget(n: int, m: int) -> int:
    # O(m^3 n^2) transfers per group, at most n groups
    return 4 * n * (m + 1) ** 3 * (n + 1) ** 2


def _main_budget(n: int, m: int) -> int:
    return 4 * (n + 1) * (m + 1) + 16


def cost_minimizing_owner(inst: NormalizedInstance) -> list[int]:
    owner = []
    for j in range(inst.m):
        col = [row[j] for row in inst.costs]
        owner.append(col.index(min(col)))
    return owner


def make_init_groups(inst: NormalizedInstance, trace: Optional[Trace] = None,
                     check: bool = True) -> tuple[MarketState, GroupPartition, Trace]:
    if inst.regime is Regime.BINARY:
        raise ValueError("binary instances take the direct shortcut, not grouping")
    trace = Trace() if trace is None else trace
    state = MarketState(inst, cost_minimizing_owner(inst), initial_prices(inst))
    for i in range(inst.n):
        if state.bundles[i]:
            trace.emit("INIT_ASSIGN", agent=i, chores=state.holdings(i))

    remaining = set(range(inst.n))
    groups, comps, roots = [], [], []
    group_of = [-1] * inst.n
    budget = _init_budget(inst.n, inst.m)
    transfers = 0
    while remaining:
        while True:
            b = big_spender(state, remaining)
            top = state.reduced_spending(b)

            def envied(frontier, top=top):
                hits = [a for a in frontier if state.spending(a) < top]
                return min(hits) if hits else None

            comp, target = explore(state, b, remaining, envied if state.bundles[b] else None)
            if target is None:
                break
            path = comp.path_to(target)
            j, giver = path[-2], path[-3]
            state.move(j, target)
            trace.emit("INIT_TRANSFER", chore=j, **{"from": giver, "to": target})
            transfers += 1
            if transfers > budget:
                raise InternalBoundViolation(f"initial grouping exceeded {budget} transfers")
        members = tuple(sorted(comp.agents))
        chores = frozenset(j for a in members for j in state.bundles[a])
        r = len(groups)
        groups.append(members)
        comps.append((frozenset(members), chores))
        roots.append(b)
        for a in members:
            group_of[a] = r
        remaining -= set(members)
        trace.emit("GROUP_FORMED", group=r, root=b, agents=list(members), chores=sorted(chores))

    part = GroupPartition(groups, comps, roots, group_of, set(range(len(groups))))
    if check:
        check_init_properties(state, part)
    return state, part, trace


def check_init_properties(state: MarketState, part: GroupPartition) -> None:
    """Assert the structural guarantees of the initial grouping."""
    inst = state.instance
    k = inst.k
    for j in range(inst.m):
        want = 1 if j in inst.low_chores else k
        if state.prices[j] != want:
            raise InvariantViolation(f"chore {j} priced {state.prices[j]}, expected {want}")
    for i in range(inst.n):
        if state.alpha(i) != 1:
            raise InvariantViolation(f"agent {i} has mBB ratio {state.alpha(i)}")
    earlier: set[int] = set()
    prev_f = None
    for r, members in enumerate(part.groups):
        agents, chores = part.components[r]
        pool = set(range(inst.n)) - earlier
        closure = component(state, part.roots[r], pool)
        if closure.agents != set(agents) or closure.chores != set(chores):
            raise InvariantViolation(f"group {r} is not the partial component of its root")
        if set().union(*(state.bundles[a] for a in agents)) != set(chores):
            raise InvariantViolation(f"group {r} no longer holds its formation-time chores")
        f = max(state.reduced_spending(a) for a in agents)
        if prev_f is not None and f > prev_f:
            raise InvariantViolation(f"group {r} big spender outspends group {r - 1}")
        prev_f = f
        _check_group_pef1(state, agents, r)
        for r2 in range(r):
            for j in part.components[r2][1]:
                for a in agents:
                    if inst.costs[a][j] != k:
                        raise InvariantViolation(f"agent {a} finds earlier chore {j} cheap")
        earlier |= set(agents)
    last_chores = part.components[-1][1]
    if not inst.high_chores <= last_chores:
        raise InvariantViolation("a high-cost chore lies outside the last group")


def _check_group_pef1(state: MarketState, agents, r: int) -> None:
    top = max(state.reduced_spending(a) for a in agents)
    low = min(state.spending(a) for a in agents)
    if top > low:
        raise InvariantViolation(f"group {r} is not internally pEF1")


class _Monitor:
    """Per-step checks of the invariants the correctness argument relies on."""

    def __init__(self, state: MarketState, part: GroupPartition, enabled: bool):
        self.state, self.part, self.enabled = state, part, enabled
        self.ls_spending = state.spending(least_spender(state))
        self.gap: Optional[Fraction] = None

    def step(self, touched=()) -> None:
        if not self.enabled:
            return
        st = self.state
        ls = st.spending(least_spender(st))
        if ls < self.ls_spending:
            raise InvariantViolation(f"least spender spending fell {self.ls_spending} -> {ls}")
        self.ls_spending = ls
        for r, members in enumerate(self.part.groups):
            _check_group_pef1(st, members, r)
        if not st.is_on_mbb(touched):
            raise InvariantViolation("allocation left the mBB graph")

    def post_t_gap(self, b: int, l: int) -> None:
        if not self.enabled:
            return
        gap = self.state.reduced_spending(b) - self.state.spending(l)
        if self.gap is not None and gap > self.gap:
            raise InvariantViolation(f"spending gap grew {self.gap} -> {gap}")
        self.gap = gap


def _solve_binary(inst: NormalizedInstance) -> EF1Solution:
    """Zero-cost chores to the first agent who does not mind them, the rest round-robin."""
    trace = Trace()
    owner = []
    turn = 0
    for j in range(inst.m):
        zero = [i for i in range(inst.n) if inst.costs[i][j] == 0]
        if zero:
            owner.append(zero[0])
        else:
            owner.append(turn % inst.n)
            turn += 1
    alloc = IntegralAllocation.from_owner(owner, inst.n)
    for i, bundle in enumerate(alloc.bundles):
        if bundle:
            trace.emit("INIT_ASSIGN", agent=i, chores=sorted(bundle))
    trace.emit("TERMINATE", phase=Phase.PRE_T.value, r_star=0)
    return EF1Solution(alloc, initial_prices(inst), trace,
                       counts={"INIT_ASSIGN": len(trace) - 1})


def round_robin_allocation(n: int, m: int) -> IntegralAllocation:
    return IntegralAllocation.from_owner([j % n for j in range(m)], n)


def solve_ef1_fpo(inst: NormalizedInstance, monitor: bool = True) -> EF1Solution:
    """Compute an EF1 + fPO allocation together with certifying prices."""
    if inst.regime is Regime.BINARY:
        return _solve_binary(inst)

    state, part, trace = make_init_groups(inst, check=monitor)
    x0 = [frozenset(b) for b in state.bundles]
    initial = state.allocation()
    unraised = part.unraised
    group_of = part.group_of
    k = inst.k
    mon = _Monitor(state, part, monitor)
    budget = _main_budget(inst.n, inst.m)
    phase = Phase.PRE_T
    steps = 0

    def tick() -> None:
        nonlocal steps
        steps += 1
        if steps > budget:
            raise InternalBoundViolation(f"{phase.value} loop exceeded {budget} steps")

    def direct(b: int, l: int) -> None:
        options = state.bundles[b] & state.mbb_set(l)
        if not options:
            raise InvariantViolation(f"no mBB edge from agent {l} into the bundle of {b}")
        j = min(options)
        state.move(j, l)
        trace.emit("DIRECT_TRANSFER", chore=j, **{"from": b, "to": l})
        mon.step((l,))

    while not is_pef1(state):
        l = least_spender(state)
        if group_of[l] not in unraised:
            phase = Phase.POST_T
            break
        b = big_spender(state)
        r = group_of[b]
        if r in unraised:
            if monitor:
                if r != min(unraised):
                    raise InvariantViolation(f"group {r} raised out of order")
                if any(state.bundles[a] != x0[a] for a in part.groups[r]):
                    raise InvariantViolation(f"group {r} was disturbed before its price rise")
            chores = sorted(j for a in part.groups[r] for j in state.bundles[a])
            state.raise_prices(chores, k)
            unraised.discard(r)
            trace.emit("PRICE_RISE", group=r, chores=chores, factor=str(k))
            mon.step(range(inst.n))
        else:
            direct(b, l)
        tick()

    r_star = part.R - len(unraised)
    if phase is Phase.POST_T:
        steps = 0
        while not is_pef1(state):
            b = big_spender(state)
            l = least_spender(state)
            mon.post_t_gap(b, l)
            r, s = group_of[b], group_of[l]
            if s > r:
                direct(b, l)
            elif s < r:
                _path_transfer(state, part, x0, b, l, trace, mon)
            else:
                raise InvariantViolation("big and least spender share a group")
            tick()

    trace.emit("TERMINATE", phase=phase.value, r_star=r_star)
    counts: dict[str, int] = {}
    for e in trace:
        counts[e.kind] = counts.get(e.kind, 0) + 1
    return EF1Solution(state.allocation(), list(state.prices), trace, part, initial,
                       phase, r_star, counts)


def _path_transfer(state: MarketState, part: GroupPartition, x0, b: int, l: int,
                   trace: Trace, mon: _Monitor) -> None:
    """Return to ``l`` one of its original chores, refilling the holder from ``b``."""
    mbb_l = state.mbb_set(l)
    for j in sorted(x0[l]):
        i = state.owner[j]
        if i == l or part.group_of[i] not in part.unraised or j not in mbb_l:
            continue
        options = state.bundles[b] & state.mbb_set(i)
        if not options:
            continue
        j2 = min(options)
        before = state.spending(i)
        state.move(j, l)
        state.move(j2, i)
        if mon.enabled and state.spending(i) != before:
            raise InvariantViolation(f"middle agent {i} changed spending on a path transfer")
        trace.emit("PATH_TRANSFER", chore_to_target=j, chore_to_via=j2,
                   **{"from": b, "via": i, "to": l})
        mon.step((i, l))
        return
    raise InvariantViolation(f"no alternating path from {b} back to {l} while not pEF1")
