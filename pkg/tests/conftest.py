"""Shared builders: hand-checked fixture states and hypothesis strategies."""

from fractions import Fraction

import pytest
from hypothesis import HealthCheck, assume, settings, strategies as st

from chorefair import (
    Allocation,
    AlreadyUniform,
    GenParams,
    Instance,
    MarketState,
    PaymentVector,
    build_market_state,
    gen_instance,
    normalize_instance,
)

settings.register_profile(
    "suite",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


def owned_instance(k, owners, rows=None) -> Instance:
    """Instance where item e costs 1 only to owners[e], k to everyone else.

    rows overrides individual high-flag rows (dict agent -> bool sequence).
    """
    n = max(owners) + 1
    m = len(owners)
    high = [[owners[e] != i for e in range(m)] for i in range(n)]
    for i, row in (rows or {}).items():
        high[i] = list(row)
    return Instance(n, m, Fraction(k), tuple(tuple(r) for r in high))


def market_from_parts(instance, owners, high_pay) -> MarketState:
    flags = [e in high_pay for e in range(instance.m)]
    return build_market_state(
        instance, Allocation(tuple(owners)),
        PaymentVector.from_high_flags(instance.k, flags))


# Forces the three-agent rotation: raise a0, feed the two small agents,
# raise a1, then a0 drops below everyone while only a1 has slack.  The
# intermediary a2 holds entry items of a0 by then.
ROTATION_OWNERS = [0] * 8 + [1] * 7 + [2] + [3]


def rotation_instance() -> Instance:
    return owned_instance(2, ROTATION_OWNERS)


# One agent (a6) with an all-low row strongly envies the two-item agents;
# the cost-6 entries at items 0, 2, 4 keep a4 and a5 from envying anyone.
GOLDEN6_OWNERS = (0, 0, 1, 1, 2, 2, 2, 4, 5, 5, 6, 6, 3, 4, 5, 6)
GOLDEN6_HIGH_PAY = frozenset({12, 13, 14, 15})

_MIXED_ROW = (True, False, True, False, True, False, False, False,
              False, False, False, False, True, True, True, True)
_PLAIN_ROW = (False,) * 12 + (True,) * 4


def golden6_market() -> MarketState:
    high = tuple(_MIXED_ROW if i in (4, 5) else _PLAIN_ROW for i in range(7))
    inst = Instance(7, 16, Fraction(6), high)
    return market_from_parts(inst, GOLDEN6_OWNERS, GOLDEN6_HIGH_PAY)


def _natural_market(k, owners, high_pay, raised_agent):
    """Rows equal the payment flags except one all-low (raised) agent."""
    n = max(owners) + 1
    m = len(owners)
    flag_row = tuple(e in high_pay for e in range(m))
    high = tuple(
        (False,) * m if i == raised_agent else flag_row for i in range(n))
    inst = Instance(n, m, Fraction(k), high)
    return market_from_parts(inst, owners, high_pay)


# k=2 swap fixture: violator a4 (earning 6) trades its first payment-2 item
# for a0's first payment-1 item; both land on earning 5.
SWAP_OWNERS = (0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3, 4, 4, 4, 4, 5, 5, 5)
SWAP_HIGH_PAY = frozenset({0, 3, 4, 6, 7, 9, 10, 12, 13, 16, 17, 18})


def swap_market() -> MarketState:
    return _natural_market(2, SWAP_OWNERS, SWAP_HIGH_PAY, raised_agent=5)


# k=2 move fixture: a0 holds only payment-2 items, so the violator a4 hands
# one over instead of trading; a0 ends at 6 all-high, a4 at 4.
MOVE_OWNERS = (0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3, 4, 4, 4, 4, 5, 5, 5)
MOVE_HIGH_PAY = frozenset({0, 1, 2, 5, 8, 9, 11, 12, 15, 16, 17})


def move_market() -> MarketState:
    return _natural_market(2, MOVE_OWNERS, MOVE_HIGH_PAY, raised_agent=5)


K2_UNRAISED = frozenset(range(5))


# -- hypothesis strategies ---------------------------------------------------

K_VALUES = (Fraction(2), Fraction(3), Fraction(5, 2), Fraction(6))


@st.composite
def high_matrices(draw, n, m):
    rows = []
    for _ in range(n):
        row = draw(st.lists(st.booleans(), min_size=m, max_size=m))
        if all(row):
            row[draw(st.integers(0, m - 1))] = False
        rows.append(tuple(row))
    return tuple(rows)


@st.composite
def instances(draw, max_n=5, max_m=8, ks=K_VALUES):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(1, max_m))
    k = draw(st.sampled_from(ks))
    return Instance(n, m, k, draw(high_matrices(n, m)))


@st.composite
def generated_instances(draw, max_n=6, max_m=12, ks=K_VALUES):
    params = GenParams(
        n=draw(st.integers(2, max_n)),
        m=draw(st.integers(2, max_m)),
        k=draw(st.sampled_from(ks)),
        high_prob=draw(st.sampled_from(
            [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)])),
        seed=draw(st.integers(0, 2**32 - 1)),
    )
    try:
        return normalize_instance(gen_instance(params))
    except AlreadyUniform:
        assume(False)


@pytest.fixture
def rotation():
    return rotation_instance()
