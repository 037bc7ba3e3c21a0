"""High-to-low bundle exchange stage: from a pEF1 equilibrium to (2 - 1/k)-EFX.

Payments never change here.  While some agent i strongly envies another
(fails the (2 - 1/k)-EFX test in costs), i hands its single high-payment
chore to the least-earning agent j it strongly envies and absorbs all of
j's chores.  Every reallocated chore stays ratio-minimal for its receiver,
so the market remains an equilibrium and the result is Pareto optimal.

The count of high-payment holders that also hold a low-payment chore drops
by exactly one per round, which bounds the loop by n.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import (IterationCapExceeded, LemmaViolation, MPBViolation,
                     PreconditionViolated)
from .model import Instance, MarketState, earning, replace_allocation
from .pef1 import SolverState, run_pef1
from .trace import TraceEvent


@dataclass(frozen=True)
class ApproxResult:
    market: MarketState
    rounds: int
    trace: tuple[TraceEvent, ...]
    pef1: SolverState | None = None


def _bundle_cost_units(market: MarketState, i: int, items) -> int:
    cu = market.instance.cost_units[i]
    return sum(cu[e] for e in items)


def strong_envy_target(market: MarketState) -> tuple[int, int] | None:
    """Smallest agent i failing the (2 - 1/k)-EFX test, paired with the
    least-earning agent it fails against.  None when the test passes.
    """
    inst = market.instance
    p, q = inst.high_units, inst.unit
    for i in range(inst.n):
        bundle = market.allocation.bundle(i)
        if len(bundle) <= 1:
            continue
        cu = inst.cost_units[i]
        residual = sum(cu[e] for e in bundle) - min(cu[e] for e in bundle)
        targets = [
            j for j in range(inst.n) if j != i
            and p * residual > (2 * p - q) * _bundle_cost_units(
                market, i, market.allocation.bundle(j))
        ]
        if targets:
            return i, min(targets, key=lambda j: (market.earn_units[j], j))
    return None


def _high_holders(market: MarketState) -> frozenset[int]:
    inst = market.instance
    return frozenset(
        i for i in range(inst.n)
        if any(market.pay_is_high(e) for e in market.allocation.bundle(i)))


def _mixed_holder_count(market: MarketState) -> int:
    return sum(
        1 for i in _high_holders(market)
        if any(not market.pay_is_high(e) for e in market.allocation.bundle(i)))


def entry_tier_units(market: MarketState) -> int:
    """Smallest earning among agents without a high-payment chore, validated
    against the band structure every strongly-envied entry state must have.
    """
    inst = market.instance
    p, q = inst.high_units, inst.unit
    high = _high_holders(market)
    lows = [i for i in range(inst.n) if i not in high]
    if not lows:
        raise LemmaViolation(
            "strong envy requires an agent without high-payment chores")
    z = min(market.earn_units[i] for i in lows)
    if z >= p:
        raise LemmaViolation(f"low-group base earning {z} is not below {p}")
    for i in lows:
        if market.earn_units[i] not in (z, z + q):
            raise LemmaViolation(
                f"agent {i} earns {market.earn_units[i]} outside {{z, z+1}}")
    for i in high:
        if not p <= market.earn_units[i] <= p + z:
            raise LemmaViolation(
                f"agent {i} earns {market.earn_units[i]} outside [k, k+z]")
    return z


def approx_round(market: MarketState, z_units: int,
                 round_no: int) -> tuple[MarketState, TraceEvent] | None:
    """One exchange; None when the allocation is already (2 - 1/k)-EFX."""
    found = strong_envy_target(market)
    if found is None:
        return None
    i, j = found
    high = _high_holders(market)
    if i not in high or j in high:
        raise LemmaViolation(
            f"strong envy must run from a high-payment holder to a "
            f"non-holder, got {i} -> {j}")
    if market.alpha[i] != 1:
        raise LemmaViolation(f"violator {i} has ratio {market.alpha[i]}, not 1")
    bundle_i = sorted(market.allocation.bundle(i))
    bundle_j = sorted(market.allocation.bundle(j))
    if any(e not in market.mpb[i] for e in bundle_j):
        raise MPBViolation(
            f"the strongly envied bundle of {j} is not ratio-minimal for {i}")
    highs_i = [e for e in bundle_i if market.pay_is_high(e)]
    if len(highs_i) != 1:
        raise LemmaViolation(
            f"violator {i} holds {len(highs_i)} high-payment chores, expected 1")
    e = highs_i[0]
    if e not in market.mpb[j]:
        raise MPBViolation(
            f"high-payment chore {e} is not ratio-minimal for receiver {j}")

    mixed_before = _mixed_holder_count(market)
    owner = list(market.allocation.owner)
    for x in bundle_j:
        owner[x] = i
    owner[e] = j
    new_market = replace_allocation(market, owner)
    _assert_round(market, new_market, z_units, i, j, mixed_before)
    event = TraceEvent(
        stage="approx_efx", round=round_no, kind="bundle_swap",
        agents=(i, j), items=(e, *bundle_j),
        earn_before=(earning(market, i), earning(market, j)),
        earn_after=(earning(new_market, i), earning(new_market, j)))
    return new_market, event


def _assert_round(old: MarketState, market: MarketState, z_units: int,
                  i: int, j: int, mixed_before: int) -> None:
    inst = market.instance
    p, q = inst.high_units, inst.unit
    for a in range(inst.n):
        if any(e not in market.mpb[a] for e in market.allocation.bundle(a)):
            raise MPBViolation(f"exchange broke the equilibrium at agent {a}")
        if a not in (i, j) and market.earn_units[a] != old.earn_units[a]:
            raise LemmaViolation(
                f"earning of uninvolved agent {a} changed during the exchange")
    high = _high_holders(market)
    for a in range(inst.n):
        lo, hi = (p, p + z_units) if a in high else (z_units, p + z_units)
        if not lo <= market.earn_units[a] <= hi:
            raise LemmaViolation(
                f"agent {a} earns {market.earn_units[a]} outside [{lo}, {hi}]")
    lows = sorted(set(range(inst.n)) - high)
    for a in lows:
        cu = inst.cost_units[a]
        bundle = market.allocation.bundle(a)
        if len(bundle) <= 1:
            continue
        residual = sum(cu[e] for e in bundle) - min(cu[e] for e in bundle)
        for b in lows:
            if b != a and p * residual > (2 * p - q) * _bundle_cost_units(
                    market, a, market.allocation.bundle(b)):
                raise LemmaViolation(
                    f"agents {a} and {b} left the low group's envy bound")
    mixed_after = _mixed_holder_count(market)
    if mixed_after != mixed_before - 1:
        raise LemmaViolation(
            f"mixed-holder count went {mixed_before} -> {mixed_after}, "
            "expected a drop of exactly one")


def approx_from_equilibrium(market: MarketState,
                            pef1: SolverState | None = None) -> ApproxResult:
    if strong_envy_target(market) is None:
        return ApproxResult(market, 0, (), pef1)
    z = entry_tier_units(market)
    trace: list[TraceEvent] = []
    rounds = 0
    cap = market.instance.n + 1
    while True:
        step = approx_round(market, z, rounds + 1)
        if step is None:
            return ApproxResult(market, rounds, tuple(trace), pef1)
        market, event = step
        trace.append(event)
        rounds += 1
        if rounds > cap:
            raise IterationCapExceeded(
                f"exchange stage exceeded {cap} rounds")


def run_approx_efx(instance: Instance) -> ApproxResult:
    """Full pipeline: pEF1 equilibrium, then exchanges until (2 - 1/k)-EFX.

    The result is stated in the reindexed agent frame of the pEF1 stage;
    result.pef1.groups.new_to_old maps back to the caller's labels.
    """
    if instance.k <= 1:
        raise PreconditionViolated(f"need k > 1, got {instance.k}")
    state = run_pef1(instance)
    return approx_from_equilibrium(state.market, state)
