"""Payment-raising solver: reaches a pEF1 equilibrium for any bi-valued instance.

Each round compares the big earner b (largest earning after dropping one
chore) against the least earner l.  If b still out-earns l after the drop,
either one chore moves from b to l directly (raising the payments of b's
whole group first, the one time that group crosses from unraised to raised),
or, when l is already raised, a three-agent rotation routes a chore through
an unraised intermediary that still holds part of l's entry bundle.

Agents are relabeled once, before the loop, so that the group order produced
by the partition coincides with index order; all tie-breaks favor smaller
indices, which makes raised agents win ties against unraised ones.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import (AllEmpty, IterationCapExceeded, LemmaViolation,
                     MissingIntermediary, MPBViolation, RaiseOverflow)
from .market_init import (AgentGroups, build_initial_state,
                          partition_agent_groups, resolve_overpaid_paths)
from .model import (Allocation, Instance, MarketState, PaymentVector,
                    build_market_state, earning, hat_earning,
                    hat_earning_units)
from .trace import TraceEvent


@dataclass(frozen=True)
class SolverState:
    """Loop state: current market, which agents are still unraised, the fixed
    group structure, and the entry bundles (consulted by the rotation branch).
    """
    market: MarketState
    unraised: frozenset[int]
    groups: AgentGroups
    initial_bundles: tuple[frozenset[int], ...]
    round_count: int
    trace: tuple[TraceEvent, ...] = ()

    @staticmethod
    def from_market(market: MarketState,
                    unraised: frozenset[int] | None = None) -> "SolverState":
        """Wrap an existing equilibrium, e.g. for driving later stages directly."""
        n = market.instance.n
        ident = tuple(range(n))
        groups = AgentGroups((frozenset(ident),), (0,), ident, ident)
        bundles = tuple(frozenset(market.allocation.bundle(i)) for i in range(n))
        if unraised is None:
            unraised = frozenset(ident)
        return SolverState(market, unraised, groups, bundles, 0)


def select_big_earner(market: MarketState) -> int:
    """Agent maximizing earning-after-dropping-one-chore, ties to smaller index."""
    n = market.instance.n
    if all(market.earn_units[i] == 0 for i in range(n)):
        raise AllEmpty("all bundles are empty")
    return min(range(n), key=lambda i: (-hat_earning_units(market, i), i))


def select_least_earner(market: MarketState) -> int:
    return min(range(market.instance.n), key=lambda i: (market.earn_units[i], i))


def _group_index(groups: AgentGroups, agent: int) -> int:
    for r, g in enumerate(groups.groups):
        if agent in g:
            return r
    raise LemmaViolation(f"agent {agent} belongs to no group")


def pef1_round(state: SolverState) -> SolverState | None:
    """Execute one round; None signals the terminal pEF1 condition."""
    market = state.market
    inst = market.instance
    b = select_big_earner(market)
    l = select_least_earner(market)
    if hat_earning_units(market, b) <= market.earn_units[l]:
        return None

    owner = list(market.allocation.owner)
    pay_high = [market.pay_is_high(e) for e in range(inst.m)]
    unraised = state.unraised
    events: list[TraceEvent] = []
    rnd = state.round_count + 1
    least_before = earning(market, l)
    bundle_b = sorted(market.allocation.bundle(b))
    touched = {b, l}

    if l in unraised:
        if b in unraised:
            r = _group_index(state.groups, b)
            group = state.groups.groups[r]
            if l in group:
                raise LemmaViolation(
                    "least earner shares the big earner's group; the terminal "
                    "check should have fired (pEF1 holds inside groups)")
            raised_items = sorted(
                e for e in range(inst.m) if owner[e] in group)
            for e in raised_items:
                if pay_high[e]:
                    raise RaiseOverflow(
                        f"chore {e} already pays {inst.k}; raising would leave "
                        "the two-value payment range")
                pay_high[e] = True
            unraised = unraised - group
            touched |= group
            events.append(TraceEvent(
                stage="pef1", round=rnd, kind="raise", agents=(b,),
                items=tuple(raised_items),
                earn_before=(earning(market, b),),
                earn_after=(earning(market, b) * inst.k,),
                least_earning=least_before))
        e = bundle_b[0]
        owner[e] = l
        events.append(TraceEvent(
            stage="pef1", round=rnd, kind="transfer", agents=(b, l),
            items=(e,),
            earn_before=(earning(market, b), earning(market, l)),
            earn_after=(), least_earning=least_before))
        moved = {e: l}
    else:
        if b in unraised:
            raise LemmaViolation(
                "least earner is raised while the big earner is not")
        candidates = [i for i in sorted(unraised)
                      if set(market.allocation.bundle(i)) & state.initial_bundles[l]]
        if not candidates:
            raise MissingIntermediary(
                f"no unraised agent holds part of agent {l}'s entry bundle")
        i = candidates[0]
        e1_opts = sorted(set(bundle_b) & market.mpb[i])
        if not e1_opts:
            raise MPBViolation(
                f"no chore of big earner {b} is ratio-minimal for intermediary {i}")
        e1 = e1_opts[0]
        e2 = min(set(market.allocation.bundle(i)) & state.initial_bundles[l])
        owner[e1] = i
        owner[e2] = l
        touched.add(i)
        events.append(TraceEvent(
            stage="pef1", round=rnd, kind="rotate", agents=(b, i, l),
            items=(e1, e2),
            earn_before=(earning(market, b), earning(market, i), earning(market, l)),
            earn_after=(), least_earning=least_before))
        moved = {e1: i, e2: l}

    new_market = build_market_state(
        inst, Allocation(tuple(owner)),
        PaymentVector.from_high_flags(inst.k, pay_high))
    _assert_round(state, new_market, unraised, moved, touched)

    # fill in post-round earnings on the last event
    last = events[-1]
    events[-1] = replace(
        last, earn_after=tuple(earning(new_market, a) for a in last.agents))
    return SolverState(new_market, unraised, state.groups,
                       state.initial_bundles, rnd,
                       state.trace + tuple(events))


def _assert_round(state: SolverState, market: MarketState,
                  unraised: frozenset[int], moved: dict[int, int],
                  touched: set[int]) -> None:
    inst = market.instance
    n = inst.n
    for e, dst in moved.items():
        if e not in market.mpb[dst]:
            raise MPBViolation(
                f"moved chore {e} is not ratio-minimal for receiver {dst}")
    for i in range(n):
        if any(e not in market.mpb[i] for e in market.allocation.bundle(i)):
            raise MPBViolation(f"round broke the equilibrium at agent {i}")
        want = 1 if i in unraised else inst.k ** -1
        if market.alpha[i] != want:
            raise LemmaViolation(
                f"agent {i} has ratio {market.alpha[i]}, expected {want}")
    # raised groups must form a prefix of the group order, never all of them
    seen_unraised = False
    for g in state.groups.groups:
        g_unraised = g <= unraised
        if not g_unraised and (g & unraised):
            raise LemmaViolation("a group is only partially raised")
        if seen_unraised and not g_unraised:
            raise LemmaViolation("raised groups do not form a prefix")
        seen_unraised = seen_unraised or g_unraised
    if not (state.groups.groups[-1] <= unraised):
        raise LemmaViolation("the last group must stay unraised")
    for g in state.groups.groups:
        hats = {i: hat_earning_units(market, i) for i in g}
        for i in g:
            for j in g:
                if i != j and hats[i] > market.earn_units[j]:
                    raise LemmaViolation(
                        f"pEF1 broke inside a group: {i} vs {j}")
    for i in range(n):
        if i not in touched and market.earn_units[i] != state.market.earn_units[i]:
            raise LemmaViolation(
                f"earning of uninvolved agent {i} changed during the round")


def _reindex(resolved: MarketState, groups: AgentGroups
             ) -> tuple[MarketState, AgentGroups]:
    """Relabel agents so groups occupy contiguous ascending index ranges."""
    inst = resolved.instance
    perm = groups.new_to_old
    inv = groups.old_to_new
    new_inst = Instance(inst.n, inst.m, inst.k,
                        tuple(inst.high[old] for old in perm))
    new_owner = tuple(inv[o] for o in resolved.allocation.owner)
    new_market = build_market_state(new_inst, Allocation(new_owner),
                                    resolved.payments)
    start = 0
    new_groups = []
    new_reps = []
    for r, g in enumerate(groups.groups):
        new_groups.append(frozenset(range(start, start + len(g))))
        new_reps.append(inv[groups.representatives[r]])
        start += len(g)
    relabeled = AgentGroups(tuple(new_groups), tuple(new_reps),
                            groups.new_to_old, groups.old_to_new)
    return new_market, relabeled


def run_pef1(instance: Instance, *, state_sink: list | None = None) -> SolverState:
    """Entry equilibrium, chain resolution, partition, then rounds until pEF1.

    The result lives in the reindexed agent frame; groups.new_to_old maps
    back to the caller's labels.  The least earner's earning at selection
    time never decreases across rounds (asserted).
    """
    entry = build_initial_state(instance)
    resolved = resolve_overpaid_paths(entry)
    groups = partition_agent_groups(resolved)
    market, groups = _reindex(resolved, groups)

    state = SolverState(
        market=market,
        unraised=frozenset(range(instance.n)),
        groups=groups,
        initial_bundles=tuple(frozenset(market.allocation.bundle(i))
                              for i in range(instance.n)),
        round_count=0)
    if state_sink is not None:
        state_sink.append(state.market)
    cap = 4 * instance.n ** 2 * instance.m ** 2
    prev_least = None
    while True:
        nxt = pef1_round(state)
        if nxt is None:
            return state
        least = nxt.trace[-1].least_earning
        if prev_least is not None and least < prev_least:
            raise LemmaViolation(
                f"least earner earning dropped from {prev_least} to {least}")
        prev_least = least
        state = nxt
        if state_sink is not None:
            state_sink.append(state.market)
        if state.round_count > cap:
            raise IterationCapExceeded(
                f"solver exceeded {cap} rounds on n={instance.n} m={instance.m}")
