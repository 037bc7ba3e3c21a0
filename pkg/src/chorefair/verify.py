"""Fairness verifiers: equilibrium, EF1, pEF1, and the minimal EFX factors.

Each check returns either a verdict with a reproducible witness (the first
violating tuple in lexicographic order) or an exact minimal factor.  Pareto
optimality is deliberately not decided here; see oracle.py for the
enumeration-based check.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .model import Allocation, Instance, MarketState


class Unbounded:
    """Distinct result for ratios with empty comparison bundles; not a number."""
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Unbounded"


UNBOUNDED = Unbounded()


def beta_le(a, b) -> bool:
    """Compare two factor values, treating Unbounded as +infinity."""
    if isinstance(b, Unbounded):
        return True
    if isinstance(a, Unbounded):
        return False
    return a <= b


@dataclass(frozen=True)
class Witness:
    """The tuple that reproduces a violated inequality: lhs > rhs."""
    agent: int
    other: int | None
    item: int | None
    lhs: Fraction
    rhs: Fraction


@dataclass(frozen=True)
class FairnessVerdict:
    holds: bool
    witness: Witness | None

    def __post_init__(self):
        assert self.holds == (self.witness is None)


@dataclass(frozen=True)
class BetaResult:
    """Minimal factor for which the corresponding beta-notion holds."""
    value: Fraction | Unbounded
    binding_pair: tuple[int, int] | None


_OK = FairnessVerdict(holds=True, witness=None)


def check_equilibrium(state: MarketState) -> FairnessVerdict:
    """Every agent's bundle must sit inside its minimal pain-per-buck set."""
    for i in range(state.instance.n):
        mpb = state.mpb[i]
        for e in state.allocation.bundle(i):
            if e not in mpb:
                lhs = Fraction(state.instance.cost_units[i][e], state.pay_units[e])
                return FairnessVerdict(False, Witness(i, None, e, lhs, state.alpha[i]))
    return _OK


def _max_pay_item(state: MarketState, agent: int) -> int | None:
    best_e, best_p = None, -1
    for e, o in enumerate(state.allocation.owner):
        if o == agent and state.pay_units[e] > best_p:
            best_e, best_p = e, state.pay_units[e]
    return best_e


def check_pEF1(state: MarketState) -> FairnessVerdict:
    """Payment envy-freeness up to one chore.

    Holds iff for every pair i != j with X_i nonempty, dropping i's largest
    payment leaves earning at most p(X_j).
    """
    n = state.instance.n
    earn = state.earn_units
    hats = []
    for i in range(n):
        e = _max_pay_item(state, i)
        hats.append(earn[i] - (state.pay_units[e] if e is not None else 0))
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if hats[i] > earn[j]:
                return FairnessVerdict(False, Witness(
                    i, j, _max_pay_item(state, i),
                    Fraction(hats[i], state.unit), Fraction(earn[j], state.unit)))
    return _OK


def min_beta_pEFX(state: MarketState) -> BetaResult:
    """Smallest beta with p(X_i - e) <= beta * p(X_j) for all pairs and all e.

    The binding removal is always the cheapest chore in X_i.  Unbounded iff
    some agent keeps positive payment after the removal while the compared
    bundle pays nothing.
    """
    n = state.instance.n
    return _min_beta(
        n,
        residual=lambda i: _pay_residual(state, i),
        against=lambda i, j: state.earn_units[j],
    )


def check_EF1(instance: Instance, allocation: Allocation) -> FairnessVerdict:
    """Cost envy-freeness up to one chore (drop the costliest own chore)."""
    n = instance.n
    cu = instance.cost_units
    bundles = allocation.bundles(n)
    for i in range(n):
        mine = bundles[i]
        if not mine:
            continue
        total = sum(cu[i][e] for e in mine)
        lhs_units = total - max(cu[i][e] for e in mine)
        for j in range(n):
            if i == j:
                continue
            rhs_units = sum(cu[i][e] for e in bundles[j])
            if lhs_units > rhs_units:
                drop = max(mine, key=lambda e: (cu[i][e], -e))
                return FairnessVerdict(False, Witness(
                    i, j, drop,
                    Fraction(lhs_units, instance.unit), Fraction(rhs_units, instance.unit)))
    return _OK


def min_beta_EFX(instance: Instance, allocation: Allocation) -> BetaResult:
    """Smallest beta with c_i(X_i - e) <= beta * c_i(X_j) for all pairs, all e."""
    n = instance.n
    cu = instance.cost_units
    bundles = allocation.bundles(n)

    def residual(i: int) -> int:
        mine = bundles[i]
        if not mine:
            return 0
        total = sum(cu[i][e] for e in mine)
        return total - min(cu[i][e] for e in mine)

    def against(i: int, j: int) -> int:
        return sum(cu[i][e] for e in bundles[j])

    return _min_beta(n, residual, against)


def _min_beta(n: int, residual, against) -> BetaResult:
    """Shared scan: maximize residual(i)/against(i, j) over ordered pairs."""
    best: Fraction | None = None
    best_pair: tuple[int, int] | None = None
    for i in range(n):
        num = residual(i)
        if num == 0:
            continue  # removing the cheapest chore clears the bundle's excess
        for j in range(n):
            if i == j:
                continue
            den = against(i, j)
            if den == 0:
                return BetaResult(UNBOUNDED, (i, j))
            ratio = Fraction(num, den)
            if best is None or ratio > best:
                best, best_pair = ratio, (i, j)
    if best is None or best < 1:
        # beta is defined for beta >= 1; with no pair forcing more the notion
        # holds vacuously at 1 (single agent, no envy, or all singletons)
        return BetaResult(Fraction(1), None)
    return BetaResult(best, best_pair)


def _pay_residual(state: MarketState, i: int) -> int:
    mine = [e for e, o in enumerate(state.allocation.owner) if o == i]
    if not mine:
        return 0
    total = sum(state.pay_units[e] for e in mine)
    return total - min(state.pay_units[e] for e in mine)
