"""Core domain types: instances, allocations, payments, and market state.

All arithmetic is exact.  Public values are `fractions.Fraction`; internally
every quantity is also mirrored as an integer count of 1/q units, where
k = p/q in lowest terms.  Costs and payments only ever take the values 1 and
k, so the unit view makes every comparison an integer comparison.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from .errors import AlreadyUniform, InvalidPayment, NotBiValued, ZeroCost

# Exact rational scalar used throughout.  Fraction already guarantees the
# canonical form (reduced, positive denominator) and exact field operations.
ExactRational = Fraction

ONE = Fraction(1)


def as_rational(value) -> Fraction:
    """Coerce ints / strings like '3/2' / Fractions to an exact rational."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not exact; pass a Fraction, int or 'p/q' string")
    return Fraction(value)


@dataclass(frozen=True)
class RawInstance:
    """A cost matrix as supplied by the user, prior to normalization.

    costs[i][e] is agent i's cost for chore e.  Shape must match (n, m);
    positivity and the bi-valued property are checked by normalize_instance.
    """
    n: int
    m: int
    costs: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError(f"need n >= 1 and m >= 1, got n={self.n} m={self.m}")
        if len(self.costs) != self.n or any(len(r) != self.m for r in self.costs):
            raise ValueError("cost matrix shape does not match (n, m)")


def raw_instance(costs: Sequence[Sequence]) -> RawInstance:
    """Build a RawInstance from nested lists of ints/Fractions/'p/q' strings."""
    rows = tuple(tuple(as_rational(c) for c in row) for row in costs)
    return RawInstance(n=len(rows), m=len(rows[0]) if rows else 0, costs=rows)


@dataclass(frozen=True)
class Instance:
    """Normalized bi-valued instance: every cost is 1 or k, with k > 1.

    high[i][e] is True iff agent i's cost for chore e is k.  Every row
    contains at least one False entry (each agent has some cost-1 chore).
    """
    n: int
    m: int
    k: Fraction
    high: tuple[tuple[bool, ...], ...]

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError(f"need n >= 1 and m >= 1, got n={self.n} m={self.m}")
        if self.k <= 1:
            raise ValueError(f"k must exceed 1, got {self.k}")
        if len(self.high) != self.n or any(len(r) != self.m for r in self.high):
            raise ValueError("high matrix shape does not match (n, m)")
        for i, row in enumerate(self.high):
            if all(row):
                raise ValueError(f"agent {i} has no cost-1 chore; instances require one per row")

    def cost(self, agent: int, item: int) -> Fraction:
        return self.k if self.high[agent][item] else ONE

    # unit view: one unit is 1/q where k = p/q, so cost 1 <-> q units, k <-> p units
    @property
    def unit(self) -> int:
        return self.k.denominator

    @property
    def high_units(self) -> int:
        return self.k.numerator

    @cached_property
    def cost_units(self) -> tuple[tuple[int, ...], ...]:
        p, q = self.k.numerator, self.k.denominator
        return tuple(tuple(p if h else q for h in row) for row in self.high)


def normalize_instance(raw: RawInstance) -> Instance:
    """Rescale each agent's row by its own minimum and classify entries.

    Raises ZeroCost for nonpositive entries, NotBiValued if more than two
    distinct values occur, AlreadyUniform if only one does (k would be 1).
    Row scaling keeps the result invariant under per-agent rescaling of the
    input, and normalizing an already normalized matrix is the identity.
    """
    ratio = None
    high = []
    for i, row in enumerate(raw.costs):
        for c in row:
            if c <= 0:
                raise ZeroCost(f"cost {c} is not strictly positive")
        low = min(row)
        scaled = sorted({c / low for c in row})
        if len(scaled) > 2:
            raise NotBiValued(
                f"agent {i} has {len(scaled)} distinct scaled costs: {scaled}")
        if len(scaled) == 2:
            if ratio is None:
                ratio = scaled[1]
            elif scaled[1] != ratio:
                raise NotBiValued(
                    f"rows disagree on the cost ratio: {ratio} vs {scaled[1]}")
        high.append(tuple(c != low for c in row))
    if ratio is None:
        raise AlreadyUniform("every row is uniform; ratio k would be 1")
    return Instance(n=raw.n, m=raw.m, k=ratio, high=tuple(high))


def instance_to_raw(instance: Instance) -> RawInstance:
    """Expand a normalized instance back into an explicit cost matrix."""
    costs = tuple(
        tuple(instance.k if h else ONE for h in row) for row in instance.high
    )
    return RawInstance(n=instance.n, m=instance.m, costs=costs)


@dataclass(frozen=True)
class Allocation:
    """Total assignment of chores to agents: owner[e] is the agent holding e."""
    owner: tuple[int, ...]

    def bundle(self, agent: int) -> tuple[int, ...]:
        return tuple(e for e, o in enumerate(self.owner) if o == agent)

    def bundles(self, n: int) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(n)]
        for e, o in enumerate(self.owner):
            out[o].append(e)
        return tuple(tuple(b) for b in out)


@dataclass(frozen=True)
class PaymentVector:
    """Per-chore payments; each entry must be exactly 1 or k."""
    payments: tuple[Fraction, ...]

    @staticmethod
    def from_high_flags(k: Fraction, flags: Sequence[bool]) -> "PaymentVector":
        return PaymentVector(tuple(k if f else ONE for f in flags))


@dataclass(frozen=True)
class MarketState:
    """An allocation with payments plus everything derived from them.

    alpha[i] is agent i's best pain-per-buck ratio min_e c_i(e)/p(e) and
    mpb[i] the set of chores attaining it.  low_items/high_items split chores
    by payment (1 vs k); low_agents hold only payment-1 chores, high_agents
    hold at least one payment-k chore.  The two agent sets partition N and
    the two item sets partition M.
    """
    instance: Instance
    allocation: Allocation
    payments: PaymentVector
    alpha: tuple[Fraction, ...]
    mpb: tuple[frozenset[int], ...]
    low_items: frozenset[int]
    high_items: frozenset[int]
    low_agents: frozenset[int]
    high_agents: frozenset[int]
    # integer mirrors (multiples of 1/unit)
    unit: int
    pay_units: tuple[int, ...]
    earn_units: tuple[int, ...]

    def bundle(self, agent: int) -> tuple[int, ...]:
        return self.allocation.bundle(agent)

    def pay_is_high(self, item: int) -> bool:
        return self.pay_units[item] != self.unit


def build_market_state(instance: Instance, allocation: Allocation,
                       payments: PaymentVector) -> MarketState:
    """Validate payments and owners, then derive ratios, MPB sets and groups."""
    n, m, k = instance.n, instance.m, instance.k
    if len(allocation.owner) != m:
        raise ValueError("allocation length does not match m")
    if any(not (0 <= o < n) for o in allocation.owner):
        raise ValueError("allocation owner out of range")
    if len(payments.payments) != m:
        raise ValueError("payment vector length does not match m")
    p_hi, q = k.numerator, k.denominator
    pay_units = []
    for e, p in enumerate(payments.payments):
        if p == 1:
            pay_units.append(q)
        elif p == k:
            pay_units.append(p_hi)
        else:
            raise InvalidPayment(f"payment of chore {e} is {p}, expected 1 or {k}")
    pay_units = tuple(pay_units)
    cost_units = instance.cost_units

    alpha: list[Fraction] = []
    mpb: list[frozenset[int]] = []
    for i in range(n):
        row = cost_units[i]
        # candidate ratios are 1/k (cost 1, payment k), 1, and k; the row
        # constraint guarantees a cost-1 chore so the minimum is 1/k or 1
        has_low_high = any(row[e] == q and pay_units[e] == p_hi for e in range(m))
        if has_low_high:
            alpha.append(1 / k)
            mpb.append(frozenset(e for e in range(m)
                                 if row[e] == q and pay_units[e] == p_hi))
        else:
            alpha.append(ONE)
            mpb.append(frozenset(e for e in range(m) if row[e] == pay_units[e]))

    low_items = frozenset(e for e in range(m) if pay_units[e] == q)
    high_items = frozenset(range(m)) - low_items
    earn_units = [0] * n
    holds_high = [False] * n
    for e, o in enumerate(allocation.owner):
        earn_units[o] += pay_units[e]
        if e in high_items:
            holds_high[o] = True
    high_agents = frozenset(i for i in range(n) if holds_high[i])
    low_agents = frozenset(range(n)) - high_agents

    return MarketState(
        instance=instance, allocation=allocation, payments=payments,
        alpha=tuple(alpha), mpb=tuple(mpb),
        low_items=low_items, high_items=high_items,
        low_agents=low_agents, high_agents=high_agents,
        unit=q, pay_units=pay_units, earn_units=tuple(earn_units),
    )


def replace_allocation(state: MarketState, owner: Sequence[int]) -> MarketState:
    """New state with the same payments but a different allocation."""
    return build_market_state(state.instance, Allocation(tuple(owner)), state.payments)


def earning(state: MarketState, agent: int) -> Fraction:
    """Total payment of the agent's bundle."""
    return Fraction(state.earn_units[agent], state.unit)


def earning_units(state: MarketState, agent: int) -> int:
    return state.earn_units[agent]


def hat_earning_units(state: MarketState, agent: int) -> int:
    best = 0
    for e, o in enumerate(state.allocation.owner):
        if o == agent and state.pay_units[e] > best:
            best = state.pay_units[e]
    return state.earn_units[agent] - best


def hat_earning(state: MarketState, agent: int) -> Fraction:
    """Earning minus the single largest payment in the bundle; 0 if empty.

    Equivalently the best earning achievable after dropping one chore, which
    is what the payment-based fairness conditions compare against.
    """
    return Fraction(hat_earning_units(state, agent), state.unit)
