"""Exhaustive ground truth on small instances.

Everything here is definitional: allocations are enumerated in lexicographic
owner order, Pareto optimality means no enumerated allocation dominates, and
the EFX searches scan the full space.  The only liberties taken are ones
that cannot change answers: the dominator scan walks items depth-first and
abandons a branch as soon as some agent is already worse off, and an opt-in
filter keeps one representative per relabeling orbit of agents with
identical cost rows (relabeling such agents preserves both dominance and
envy structure).

All entry points raise BudgetExceeded when n^m reaches the allocation
budget, before any work is done.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import product
from typing import Iterator

from .errors import BudgetExceeded
from .model import Allocation, ExactRational, Instance
from .verify import UNBOUNDED, Unbounded

DEFAULT_BUDGET = 1 << 24


def _check_budget(instance: Instance, budget: int) -> None:
    total = instance.n ** instance.m
    if total >= budget:
        raise BudgetExceeded(
            f"{instance.n}^{instance.m} = {total} allocations reach the "
            f"budget of {budget}")


def _agent_classes(instance: Instance) -> tuple[tuple[int, ...], ...]:
    """Agents grouped by identical cost rows, each group in index order."""
    by_row: dict[tuple, list[int]] = {}
    for i in range(instance.n):
        by_row.setdefault(instance.high[i], []).append(i)
    return tuple(tuple(g) for g in by_row.values() if len(g) > 1)


def _canonical(owner: tuple[int, ...],
               classes: tuple[tuple[int, ...], ...]) -> bool:
    """True when, inside every class of identical agents, agents appear in
    the owner vector in index order (unused ones trailing).
    """
    for group in classes:
        rank = {a: r for r, a in enumerate(group)}
        seen = -1
        for o in owner:
            r = rank.get(o)
            if r is None:
                continue
            if r > seen + 1:
                return False
            seen = max(seen, r)
    return True


def cost_profile(instance: Instance,
                 allocation: Allocation) -> tuple[ExactRational, ...]:
    totals = [0] * instance.n
    for e, o in enumerate(allocation.owner):
        totals[o] += instance.cost_units[o][e]
    return tuple(Fraction(t, instance.unit) for t in totals)


def enumerate_allocations(instance: Instance, *,
                          budget: int = DEFAULT_BUDGET,
                          prune_identical_agents: bool = False
                          ) -> Iterator[Allocation]:
    _check_budget(instance, budget)
    classes = _agent_classes(instance) if prune_identical_agents else ()
    for owner in product(range(instance.n), repeat=instance.m):
        if classes and not _canonical(owner, classes):
            continue
        yield Allocation(owner)


def dominates(instance: Instance, a: Allocation, b: Allocation) -> bool:
    """Whether a leaves every agent at most as badly off as b, one strictly."""
    pa = cost_profile(instance, a)
    pb = cost_profile(instance, b)
    return all(x <= y for x, y in zip(pa, pb)) and pa != pb


def _dominated(instance: Instance, owner: tuple[int, ...]) -> bool:
    """Depth-first dominator search; a branch dies once any agent exceeds
    the target total, since item costs only accumulate.
    """
    cu = instance.cost_units
    n, m = instance.n, instance.m
    target = [0] * n
    for e, o in enumerate(owner):
        target[o] += cu[o][e]

    partial = [0] * n

    def walk(e: int) -> bool:
        if e == m:
            return partial != target
        for o in range(n):
            c = cu[o][e]
            if partial[o] + c <= target[o]:
                partial[o] += c
                if walk(e + 1):
                    return True
                partial[o] -= c
        return False

    return walk(0)


def is_pareto_optimal(instance: Instance, allocation: Allocation, *,
                      budget: int = DEFAULT_BUDGET) -> bool:
    _check_budget(instance, budget)
    return not _dominated(instance, allocation.owner)


def _cost_matrix(instance: Instance,
                 owner: tuple[int, ...]) -> list[list[int]]:
    """matrix[i][j] = cost, in base units, that agent i sees in j's bundle."""
    n = instance.n
    matrix = [[0] * n for _ in range(n)]
    for e, o in enumerate(owner):
        for i in range(n):
            matrix[i][o] += instance.cost_units[i][e]
    return matrix


def _exact_efx(instance: Instance, owner: tuple[int, ...]) -> bool:
    n = instance.n
    matrix = _cost_matrix(instance, owner)
    own_min = [None] * n
    for e, o in enumerate(owner):
        c = instance.cost_units[o][e]
        if own_min[o] is None or c < own_min[o]:
            own_min[o] = c
    for i in range(n):
        if own_min[i] is None:
            continue
        residual = matrix[i][i] - own_min[i]
        if residual <= 0:
            continue
        for j in range(n):
            if j != i and residual > matrix[i][j]:
                return False
    return True


def exists_efx_po(instance: Instance, *,
                  budget: int = DEFAULT_BUDGET,
                  prune_identical_agents: bool = False) -> Allocation | None:
    """Lexicographically first allocation that is exactly EFX and Pareto
    optimal, or None when no allocation satisfies both.
    """
    _check_budget(instance, budget)
    for allocation in enumerate_allocations(
            instance, budget=budget,
            prune_identical_agents=prune_identical_agents):
        if _exact_efx(instance, allocation.owner) and \
                not _dominated(instance, allocation.owner):
            return allocation
    return None


def _beta_units(instance: Instance,
                owner: tuple[int, ...]) -> tuple[int, int] | Unbounded:
    """Smallest envy factor as an integer ratio (num, den), or Unbounded.

    Mirrors the public EFX verifier: the factor is clamped below at 1, and
    a positive residual against a zero-cost bundle makes it unbounded.
    """
    n = instance.n
    matrix = _cost_matrix(instance, owner)
    own_min = [None] * n
    for e, o in enumerate(owner):
        c = instance.cost_units[o][e]
        if own_min[o] is None or c < own_min[o]:
            own_min[o] = c
    num, den = 1, 1
    for i in range(n):
        if own_min[i] is None:
            continue
        residual = matrix[i][i] - own_min[i]
        if residual <= 0:
            continue
        for j in range(n):
            if j == i:
                continue
            against = matrix[i][j]
            if against == 0:
                return UNBOUNDED
            if residual * den > num * against:
                num, den = residual, against
    return num, den


def best_efx_beta_over_po(instance: Instance, *,
                          budget: int = DEFAULT_BUDGET,
                          prune_identical_agents: bool = False
                          ) -> tuple[ExactRational | Unbounded, Allocation]:
    """Minimum envy factor achievable by any Pareto-optimal allocation,
    with the lexicographically first witness attaining it.
    """
    _check_budget(instance, budget)
    best: tuple[int, int] | Unbounded | None = None
    witness: Allocation | None = None
    for allocation in enumerate_allocations(
            instance, budget=budget,
            prune_identical_agents=prune_identical_agents):
        beta = _beta_units(instance, allocation.owner)
        if best is not None and not _ratio_lt(beta, best):
            continue
        if _dominated(instance, allocation.owner):
            continue
        best = beta
        witness = allocation
        if best == (1, 1):
            break
    assert witness is not None and best is not None
    if isinstance(best, Unbounded):
        return UNBOUNDED, witness
    return Fraction(*best), witness


def _ratio_lt(a: tuple[int, int] | Unbounded,
              b: tuple[int, int] | Unbounded) -> bool:
    if isinstance(a, Unbounded):
        return False
    if isinstance(b, Unbounded):
        return True
    return a[0] * b[1] < b[0] * a[1]
