"""Bundle-swap stage: strong-envy detection and the (2 - 1/k) bound."""

from fractions import Fraction
from itertools import product

from hypothesis import given, settings

from chorefair import (
    approx_from_equilibrium,
    check_equilibrium,
    earning_units,
    min_beta_EFX,
    run_approx_efx,
    run_pef1,
    strong_envy_target,
)

from conftest import generated_instances, golden6_market

K_NOT_TWO = (Fraction(3), Fraction(5, 2), Fraction(6))


def naive_strong_envy_pairs(market):
    """All (i, j) failing the (2 - 1/k) bound, via plain Fraction costs."""
    inst = market.instance
    bound = 2 - 1 / inst.k
    pairs = []
    for i, j in product(range(inst.n), repeat=2):
        if i == j:
            continue
        mine = [inst.cost(i, e) for e in market.allocation.bundle(i)]
        if len(mine) <= 1:
            continue
        worst = sum(mine) - min(mine)
        envied = sum(
            (inst.cost(i, e) for e in market.allocation.bundle(j)),
            Fraction(0))
        if worst > bound * envied:
            pairs.append((i, j))
    return pairs


def test_golden_market_has_exactly_one_strong_envier():
    market = golden6_market()
    assert [earning_units(market, i) for i in range(7)] == \
        [2, 2, 3, 6, 7, 8, 8]
    pairs = naive_strong_envy_pairs(market)
    assert {i for i, _ in pairs} == {6}
    assert {j for _, j in pairs} == {0, 1, 2}
    # selector picks the violator's least-earning target, ties to the left
    assert strong_envy_target(market) == (6, 0)


def test_golden_swap_resolves_in_one_round():
    market = golden6_market()
    result = approx_from_equilibrium(market)
    assert result.rounds == 1
    ev = result.trace[0]
    assert ev.kind == "bundle_swap"
    assert ev.agents == (6, 0)
    assert ev.items[0] == 15  # the violator's single high-payment chore
    assert earning_units(result.market, 6) == 4
    assert earning_units(result.market, 0) == 6
    # everyone else keeps their earning
    for i in (1, 2, 3, 4, 5):
        assert earning_units(result.market, i) == \
            earning_units(market, i)
    assert strong_envy_target(result.market) is None
    assert check_equilibrium(result.market).holds


def test_golden_swap_hands_over_the_whole_low_bundle():
    market = golden6_market()
    result = approx_from_equilibrium(market)
    assert result.market.allocation.bundle(0) == (15,)
    assert result.market.allocation.bundle(6) == (0, 1, 10, 11)


def test_golden_final_beta_meets_the_bound():
    market = golden6_market()
    result = approx_from_equilibrium(market)
    beta = min_beta_EFX(
        result.market.instance, result.market.allocation).value
    assert beta <= 2 - Fraction(1, 6)


def test_mixed_holder_count_drops_by_one():
    market = golden6_market()
    result = approx_from_equilibrium(market)

    def mixed(state):
        count = 0
        for i in range(state.instance.n):
            pays = {state.pay_units[e] for e in state.allocation.bundle(i)}
            count += len(pays) == 2
        return count

    assert mixed(market) == 3
    assert mixed(result.market) == 2


def test_no_violation_means_zero_rounds():
    market = golden6_market()
    once = approx_from_equilibrium(market).market
    again = approx_from_equilibrium(once)
    assert again.rounds == 0
    assert again.market.allocation == once.allocation


def test_k_two_is_accepted_with_the_weaker_bound():
    # the exchange stage covers every k > 1; k = 2 just has a sharper
    # dedicated stage elsewhere
    from conftest import swap_market
    inst = swap_market().instance
    result = run_approx_efx(inst)
    beta = min_beta_EFX(
        result.market.instance, result.market.allocation).value
    assert beta <= Fraction(3, 2)


@given(generated_instances(ks=K_NOT_TWO))
def test_full_run_meets_the_beta_bound(inst):
    result = run_approx_efx(inst)
    # the result lives in the reindexed frame; measure it there
    beta = min_beta_EFX(
        result.market.instance, result.market.allocation).value
    assert beta <= 2 - 1 / inst.k
    assert check_equilibrium(result.market).holds


@given(generated_instances(ks=K_NOT_TWO))
@settings(max_examples=60)
def test_round_count_is_at_most_n(inst):
    result = run_approx_efx(inst)
    assert result.rounds <= inst.n


@given(generated_instances(ks=K_NOT_TWO))
@settings(max_examples=60)
def test_selector_agrees_with_naive_scan(inst):
    market = run_pef1(inst).market
    got = strong_envy_target(market)
    pairs = naive_strong_envy_pairs(market)
    if got is None:
        assert pairs == []
    else:
        i, j = got
        assert i == min(v for v, _ in pairs)
        targets = [w for v, w in pairs if v == i]
        assert j in range(inst.n)
        # chosen target earns no more than any strongly envied one
        assert all(
            (earning_units(market, j), j) <= (earning_units(market, t), t)
            for t in targets)
