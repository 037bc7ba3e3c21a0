"""Initial equilibrium construction and the agent-group partition.

The entry state gives every chore payment 1, except chores that cost k to
every agent, which get payment k.  Each payment-1 chore goes to the
smallest-index agent costing 1 on it; payment-k chores are dealt greedily to
the currently poorest agent.  That state has every agent at pain-per-buck
ratio exactly 1.

Earnings are then balanced by firing transfer chains: a chain ships one
chore out of an over-earner, one chore into an under-earner, and passes
through intermediaries so that every single move hands a chore to an agent
for which it is ratio-minimal (so the equilibrium survives each move).
Finally agents are partitioned into groups headed by successive big earners;
the groups are ordered so that all later processing can treat "raised before
unraised" as "smaller index before larger index".
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .errors import (GroupPropertyViolation, InternalInvariant,
                     IterationCapExceeded, MPBViolation)
from .model import (Allocation, Instance, MarketState, PaymentVector,
                    build_market_state, hat_earning_units)


@dataclass(frozen=True)
class ItemPartition:
    """Chores costing k to everyone vs the rest (everything someone costs 1)."""
    consistently_large: frozenset[int]
    remainder: frozenset[int]


def split_items(instance: Instance) -> ItemPartition:
    large = frozenset(
        e for e in range(instance.m)
        if all(instance.high[i][e] for i in range(instance.n))
    )
    return ItemPartition(large, frozenset(range(instance.m)) - large)


@dataclass(frozen=True)
class MPBGraph:
    """Directed adjacency: edge i -> j iff X_j intersects MPB_i (i != j)."""
    successors: tuple[frozenset[int], ...]


def build_mpb_graph(state: MarketState) -> MPBGraph:
    n = state.instance.n
    bundles = [set(state.allocation.bundle(i)) for i in range(n)]
    succ = []
    for i in range(n):
        mpb = state.mpb[i]
        succ.append(frozenset(
            j for j in range(n) if j != i and bundles[j] & mpb))
    return MPBGraph(tuple(succ))


def build_initial_state(instance: Instance) -> MarketState:
    """Entry equilibrium with all ratios exactly 1; see module docstring."""
    n, m = instance.n, instance.m
    parts = split_items(instance)
    pay_high = [e in parts.consistently_large for e in range(m)]
    owner = [-1] * m
    q, p = instance.unit, instance.high_units
    earn = [0] * n
    for e in sorted(parts.remainder):
        i = next(a for a in range(n) if not instance.high[a][e])
        owner[e] = i
        earn[i] += q
    for e in sorted(parts.consistently_large):
        i = min(range(n), key=lambda a: (earn[a], a))
        owner[e] = i
        earn[i] += p
    state = build_market_state(
        instance, Allocation(tuple(owner)),
        PaymentVector.from_high_flags(instance.k, pay_high))
    if any(a != 1 for a in state.alpha):
        raise InternalInvariant(f"entry ratios not all 1: {state.alpha}")
    for i in range(n):
        if any(e not in state.mpb[i] for e in state.allocation.bundle(i)):
            raise InternalInvariant("entry allocation is not an equilibrium")
    return state


class _ChainView:
    """Mutable working view used while firing chains; payments stay fixed."""

    def __init__(self, state: MarketState):
        self.state = state
        self.n = state.instance.n
        self.owner = list(state.allocation.owner)
        self.bundles = [set() for _ in range(self.n)]
        for e, o in enumerate(self.owner):
            self.bundles[o].add(e)
        self.pay = state.pay_units
        self.earn = list(state.earn_units)
        self.mpb = state.mpb  # depends only on payments, constant here

    def hat(self, i: int) -> int:
        if not self.bundles[i]:
            return 0
        return self.earn[i] - max(self.pay[e] for e in self.bundles[i])

    def givable(self, u: int, v: int) -> set[int]:
        return self.bundles[u] & self.mpb[v]

    def move(self, e: int, u: int, v: int) -> None:
        if e not in self.mpb[v]:
            raise MPBViolation(f"chore {e} is not ratio-minimal for agent {v}")
        self.bundles[u].remove(e)
        self.bundles[v].add(e)
        self.owner[e] = v
        self.earn[u] -= self.pay[e]
        self.earn[v] += self.pay[e]


def _shortest_chain_from(view: _ChainView, i: int) -> list[int] | None:
    """BFS over 'can give to' edges from i; nearest endpoint j with
    hat(i) > earning(j), smallest index within the winning layer."""
    hat_i = view.hat(i)
    parent = {i: None}
    layer = [i]
    while layer:
        nxt = []
        hits = []
        for u in sorted(layer):
            for v in range(view.n):
                if v in parent or v == u:
                    continue
                if view.givable(u, v):
                    parent[v] = u
                    nxt.append(v)
                    if hat_i > view.earn[v]:
                        hits.append(v)
        if hits:
            j = min(hits)
            path = [j]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            return path[::-1]
        layer = nxt
    return None


def _best_chain(view: _ChainView) -> list[int] | None:
    best: list[int] | None = None
    floor = min(view.earn)
    for i in range(view.n):
        if view.hat(i) <= floor:
            continue  # no endpoint anywhere could satisfy the condition
        chain = _shortest_chain_from(view, i)
        if chain and (best is None or (len(chain), chain) < (len(best), best)):
            best = chain
    return best


def find_violating_chain(state: MarketState) -> list[int] | None:
    """Shortest chain i = u_0, ..., u_t = j (each u_s holds a chore that is
    ratio-minimal for u_{s+1}) with hat_earning(i) > earning(j); ties broken
    toward the lexicographically least chain.  None at the fixed point."""
    return _best_chain(_ChainView(state))


def _fire(view: _ChainView, chain: list[int]) -> None:
    """Execute moves from the receiving end backward so every giver still
    holds its original bundle at giving time."""
    for s in range(len(chain) - 2, -1, -1):
        u, v = chain[s], chain[s + 1]
        options = view.givable(u, v)
        if not options:
            raise MPBViolation(f"chain edge {u}->{v} lost its witness chore")
        e = min(options, key=lambda x: (view.pay[x], x))  # prefer payment-1
        view.move(e, u, v)


def resolve_overpaid_paths(state: MarketState) -> MarketState:
    """Fire violating chains until none remains.

    Per chain: the head's earning strictly drops, the tail gains exactly one
    chore's payment, and no allocation ever repeats (the chosen termination
    certificate; a repeat or cap hit raises IterationCapExceeded).
    """
    n, m = state.instance.n, state.instance.m
    view = _ChainView(state)
    cap = 4 * n * m * (n + m)
    seen = {tuple(view.owner)}
    fires = 0
    while True:
        best = _best_chain(view)
        if best is None:
            break
        head, tail = best[0], best[-1]
        before_head, before_tail = view.earn[head], view.earn[tail]
        _fire(view, best)
        if not (view.earn[head] < before_head):
            raise InternalInvariant("chain did not reduce the head's earning")
        gain = view.earn[tail] - before_tail
        if gain not in (state.unit, state.instance.high_units):
            raise InternalInvariant("chain tail gained other than one chore's payment")
        key = tuple(view.owner)
        if key in seen:
            raise IterationCapExceeded("chain resolution revisited an allocation")
        seen.add(key)
        fires += 1
        if fires > cap:
            raise IterationCapExceeded(f"more than {cap} chains fired")
    out = build_market_state(state.instance, Allocation(tuple(view.owner)),
                             state.payments)
    for i in range(n):
        if any(e not in out.mpb[i] for e in out.allocation.bundle(i)):
            raise MPBViolation("chain resolution broke the equilibrium")
    return out


@dataclass(frozen=True)
class AgentGroups:
    """Ordered groups headed by successive big earners.

    new_to_old[r] lists agents in reindexed order (group by group, ascending
    original index inside a group); old_to_new is its inverse.  Group
    membership is decided once, on the resolved entry state, and never
    changes afterwards.
    """
    groups: tuple[frozenset[int], ...]
    representatives: tuple[int, ...]
    new_to_old: tuple[int, ...]
    old_to_new: tuple[int, ...]


def partition_agent_groups(state: MarketState) -> AgentGroups:
    """Repeatedly take the big earner b among ungrouped agents and group it
    with every ungrouped agent having a directed path to b in the MPB graph
    restricted to ungrouped vertices.

    Asserts the three structural facts later stages rely on: agents of later
    groups cost k on every chore held by earlier groups, all consistently
    large chores sit in the last group, and pEF1 holds inside each group.
    """
    n = state.instance.n
    bundles = [set(state.allocation.bundle(i)) for i in range(n)]
    hats = [hat_earning_units(state, i) for i in range(n)]

    ungrouped = set(range(n))
    groups: list[frozenset[int]] = []
    reps: list[int] = []
    while ungrouped:
        b = min(ungrouped, key=lambda a: (-hats[a], a))
        # reverse reachability to b: predecessors of y are agents whose MPB
        # set meets y's bundle, all vertices restricted to ungrouped
        members = {b}
        queue = deque([b])
        while queue:
            y = queue.popleft()
            for x in sorted(ungrouped - members):
                if bundles[y] & state.mpb[x]:
                    members.add(x)
                    queue.append(x)
        groups.append(frozenset(members))
        reps.append(b)
        ungrouped -= members

    new_to_old = tuple(a for g in groups for a in sorted(g))
    old_to_new = [0] * n
    for new, old in enumerate(new_to_old):
        old_to_new[old] = new

    _assert_group_properties(state, groups, bundles)
    return AgentGroups(tuple(groups), tuple(reps), new_to_old, tuple(old_to_new))


def _assert_group_properties(state, groups, bundles) -> None:
    n = state.instance.n
    cu = state.instance.cost_units
    hi = state.instance.high_units
    earn = state.earn_units
    hats = [hat_earning_units(state, i) for i in range(n)]
    for r, g in enumerate(groups):
        for g2 in groups[r + 1:]:
            for i in g:
                for j in g2:
                    for e in bundles[i]:
                        if cu[j][e] != hi:
                            raise GroupPropertyViolation(
                                f"agent {j} (later group) costs 1 on chore {e} "
                                f"held by agent {i} (earlier group)")
        for i in g:
            for j in g:
                if i != j and hats[i] > earn[j]:
                    raise GroupPropertyViolation(
                        f"pEF1 fails inside a group: hat({i})={hats[i]} > "
                        f"earning({j})={earn[j]} (units)")
    large = split_items(state.instance).consistently_large
    last = groups[-1]
    for e in large:
        if state.allocation.owner[e] not in last:
            raise GroupPropertyViolation(
                f"consistently large chore {e} held outside the last group")
