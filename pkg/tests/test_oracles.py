"""Centralized benchmarks: efficient search, fair level, pivot payments."""

import numpy as np
import pytest

import relayauction.oracles as oracles
from relayauction import (
    AuctionParams,
    EquilibriumResult,
    NetworkScenario,
    UserLink,
    calibrate_price,
    direct_snr,
    efficient_allocation,
    fair_allocation,
    rate_increase,
    relayed_snr,
    snr_marginal_rate,
    solve_ne,
    vcg_auction,
)
from relayauction.channel import breakeven_power

from conftest import BENCH_SYSTEM, make_random_scenario

BUDGET = 0.1


def _useless_scenario(n=2):
    users = tuple(UserLink(i, 0.01, 6.25e-10, 1e-12, 1e-12) for i in range(n))
    return NetworkScenario(users, BUDGET, BENCH_SYSTEM)


def brute_force_welfare(scenario, budget, n=241):
    """Full-simplex grid over every feasible split, interior included."""
    sys = scenario.system
    if scenario.n_users == 1:
        xs = np.linspace(0.0, budget, 4 * n)
        return float(np.max(rate_increase(scenario.users[0], xs, sys)))
    if scenario.n_users == 2:
        best = 0.0
        for x0 in np.linspace(0.0, budget, n):
            xs = np.linspace(0.0, budget - x0, n)
            w = float(rate_increase(scenario.users[0], x0, sys)) + np.asarray(
                rate_increase(scenario.users[1], xs, sys)
            )
            best = max(best, float(w.max()))
        return best
    raise NotImplementedError


# ---------------------------------------------------------------------------
# efficient allocation


def test_efficient_useless_relay_zero():
    alloc = efficient_allocation(_useless_scenario(), delta=0.01)
    assert np.all(alloc.powers == 0.0)
    assert alloc.total_rate_increase_bps == 0.0


def test_efficient_single_user_gets_everything():
    link = UserLink(0, 0.01, 200.0**-4, 80.0**-4, 120.0**-4)
    sc = NetworkScenario((link,), BUDGET, BENCH_SYSTEM)
    alloc = efficient_allocation(sc, delta=0.01)
    assert alloc.powers[0] == pytest.approx(BUDGET * 0.99, rel=1e-9)
    assert alloc.total_rate_increase_bps > 0.0


def test_efficient_single_user_zero_when_hopeless():
    sc = _useless_scenario(n=1)
    alloc = efficient_allocation(sc, delta=0.01)
    assert alloc.powers[0] == 0.0


def test_efficient_two_resolution_consistency(scenario_y25):
    coarse = efficient_allocation(scenario_y25, delta=0.0, grid_n=64)
    fine = efficient_allocation(scenario_y25, delta=0.0, grid_n=4096)
    assert coarse.total_rate_increase_bps == pytest.approx(
        fine.total_rate_increase_bps, rel=1e-3
    )


def test_efficient_matches_brute_force_grid(scenario_y25, scenario_y0):
    for sc in (scenario_y25, scenario_y0):
        alloc = efficient_allocation(sc, delta=0.0)
        brute = brute_force_welfare(sc, BUDGET)
        assert alloc.total_rate_increase_bps >= brute * (1 - 1e-6)


def test_efficient_beats_auction_totals(scenario_y25, scenario_y0):
    for sc in (scenario_y25, scenario_y0):
        eff = efficient_allocation(sc, delta=0.0)
        for kind in ("snr", "power"):
            pr = calibrate_price(sc, kind, 0.99)
            eq = solve_ne(sc, AuctionParams(kind, pr.price))
            assert isinstance(eq, EquilibriumResult)
            assert eff.total_rate_increase_bps >= eq.total_rate_increase_bps * (1 - 1e-9)


def test_efficient_respects_budget_and_nonnegativity():
    rng = np.random.default_rng(17)
    for _ in range(10):
        sc = make_random_scenario(rng, int(rng.integers(1, 6)))
        alloc = efficient_allocation(sc, delta=0.01, grid_n=256)
        assert np.all(alloc.powers >= 0.0)
        assert alloc.powers.sum() <= BUDGET * 0.99 * (1 + 1e-12)


def test_efficient_multiuser_path_beats_seeds():
    rng = np.random.default_rng(23)
    sc = make_random_scenario(rng, 6)
    budget = BUDGET * 0.99
    alloc = efficient_allocation(sc, delta=0.01, grid_n=256)
    # no single-user concentration does better than the returned split
    for i in range(sc.n_users):
        one = np.zeros(sc.n_users)
        one[i] = budget
        assert alloc.total_rate_increase_bps >= oracles._welfare(sc, one) * (1 - 1e-9)


def test_efficient_validates_arguments(scenario_y0):
    with pytest.raises(ValueError):
        efficient_allocation(scenario_y0, delta=1.0)
    with pytest.raises(ValueError):
        efficient_allocation(scenario_y0, grid_n=4)


# ---------------------------------------------------------------------------
# fair allocation


def test_fair_equal_direct_snr_gives_equal_snr_increase(scenario_y0):
    alloc = fair_allocation(scenario_y0, delta=0.01)
    snrs = [
        float(relayed_snr(u, float(p), BENCH_SYSTEM))
        for u, p in zip(scenario_y0.users, alloc.powers)
    ]
    assert snrs[0] > 0.0
    assert snrs[0] == pytest.approx(snrs[1], rel=1e-6)
    assert alloc.per_user_rate_increase_bps[0] == pytest.approx(
        alloc.per_user_rate_increase_bps[1], rel=1e-9
    )


def test_fair_marginals_equal(scenario_y0, scenario_ym25):
    for sc in (scenario_y0, scenario_ym25):
        alloc = fair_allocation(sc, delta=0.01)
        participants = alloc.per_user_rate_increase_bps > 0.0
        marg = alloc.marginal_utility[participants]
        assert marg.size >= 1
        assert np.max(marg) - np.min(marg) <= 1e-8 * np.max(marg)
        # every participant has a strictly positive SNR gain
        for i in np.flatnonzero(participants):
            assert float(relayed_snr(sc.users[i], float(alloc.powers[i]), BENCH_SYSTEM)) > 0.0


def test_fair_marginal_value_is_consistent(scenario_y0):
    alloc = fair_allocation(scenario_y0, delta=0.01)
    for i, u in enumerate(scenario_y0.users):
        if alloc.per_user_rate_increase_bps[i] <= 0:
            continue
        snr = float(relayed_snr(u, float(alloc.powers[i]), BENCH_SYSTEM))
        assert alloc.marginal_utility[i] == pytest.approx(
            snr_marginal_rate(u, snr, BENCH_SYSTEM), rel=1e-12
        )


def test_fair_no_participants_when_hopeless():
    alloc = fair_allocation(_useless_scenario(), delta=0.01)
    assert np.all(alloc.powers == 0.0)
    assert alloc.total_rate_increase_bps == 0.0


def test_fair_budget_binding(scenario_y0):
    alloc = fair_allocation(scenario_y0, delta=0.01)
    assert alloc.powers.sum() == pytest.approx(BUDGET * 0.99, rel=1e-9)
    assert alloc.powers.sum() <= BUDGET * 0.99 * (1 + 1e-12)


def test_fair_drops_user_whose_gain_would_vanish():
    # second user's relay path is too weak to break even: must end at zero
    strong = UserLink(0, 0.01, 200.0**-4, 80.0**-4, 120.0**-4)
    weak = UserLink(1, 0.01, 6.25e-10, 1e-12, 1e-12)
    sc = NetworkScenario((strong, weak), BUDGET, BENCH_SYSTEM)
    alloc = fair_allocation(sc, delta=0.01)
    assert alloc.powers[1] == 0.0
    assert alloc.per_user_rate_increase_bps[0] > 0.0


def test_fair_participation_matches_subset_search(scenario_y0, scenario_y25):
    # exhaustive subset check: no participant set beats the iterative-drop level
    for sc in (scenario_y0, scenario_y25):
        alloc = fair_allocation(sc, delta=0.01)
        chosen = tuple(np.flatnonzero(alloc.powers > 0.0))
        budget = BUDGET * 0.99

        def subset_level(members):
            lo_level, hi_level = 1.0, None
            hi_level = min(
                1.0 + direct_snr(sc.users[i], BENCH_SYSTEM)
                + 0.01 * 0 + (sc.users[i].source_power_w * sc.users[i].gain_sr / BENCH_SYSTEM.noise_w)
                for i in members
            ) * (1 - 1e-12)

            def total(level):
                s = 0.0
                for i in members:
                    u = sc.users[i]
                    t = level - 1.0 - direct_snr(u, BENCH_SYSTEM)
                    if t <= 0:
                        continue
                    limit = u.source_power_w * u.gain_sr / BENCH_SYSTEM.noise_w
                    if t >= limit:
                        return float("inf")
                    a = t * (limit + 1) / (limit - t)
                    s += a * BENCH_SYSTEM.noise_w / u.gain_rd
                return s

            for _ in range(200):
                mid = 0.5 * (lo_level + hi_level)
                if total(mid) <= budget:
                    lo_level = mid
                else:
                    hi_level = mid
            return lo_level

        if chosen:
            level_chosen = subset_level(chosen)
            # all-user subsets either match or force some member below breakeven
            for bits in range(1, 2 ** sc.n_users):
                members = tuple(i for i in range(sc.n_users) if bits & (1 << i))
                if not all(
                    breakeven_power(sc.users[i], BENCH_SYSTEM) is not None
                    and breakeven_power(sc.users[i], BENCH_SYSTEM) < budget
                    for i in members
                ):
                    continue
                lvl = subset_level(members)
                ok = all(lvl > (1 + direct_snr(sc.users[i], BENCH_SYSTEM)) ** 2 for i in members)
                if ok and set(members) == set(chosen):
                    assert lvl == pytest.approx(level_chosen, rel=1e-9)


# ---------------------------------------------------------------------------
# pivot payments


def test_vcg_single_user_pays_nothing():
    link = UserLink(0, 0.01, 200.0**-4, 80.0**-4, 120.0**-4)
    sc = NetworkScenario((link,), BUDGET, BENCH_SYSTEM)
    res = vcg_auction(sc, delta=0.01)
    assert res.payments[0] == 0.0


def test_vcg_zero_allocation_user_pays_nothing(scenario_y25):
    # add a hopeless third user: it gets nothing and pays nothing
    users = scenario_y25.users + (UserLink(2, 0.01, 6.25e-10, 1e-12, 1e-12),)
    sc = NetworkScenario(users, BUDGET, BENCH_SYSTEM)
    res = vcg_auction(sc, delta=0.0, grid_n=1024)
    assert res.allocation.powers[2] == 0.0
    assert res.payments[2] == pytest.approx(0.0, abs=1e-6)


def test_vcg_allocation_is_efficient(scenario_y25):
    res = vcg_auction(scenario_y25, delta=0.0)
    eff = efficient_allocation(scenario_y25, delta=0.0)
    assert res.allocation.total_rate_increase_bps == pytest.approx(
        eff.total_rate_increase_bps, rel=1e-12
    )


def test_vcg_payments_nonnegative_and_individually_rational():
    rng = np.random.default_rng(8)
    for _ in range(50):
        sc = make_random_scenario(rng, int(rng.integers(1, 4)))
        res = vcg_auction(sc, delta=0.01, grid_n=256)
        assert np.all(res.payments >= 0.0)
        slack = 1e-7 * max(res.allocation.total_rate_increase_bps, 1.0)
        assert np.all(res.payments <= res.allocation.per_user_rate_increase_bps + slack)


def test_vcg_runs_one_welfare_solve_per_user_plus_one(monkeypatch, scenario_y0):
    calls = {"n": 0}
    real = oracles.efficient_allocation

    def counting(*args, **kwargs):
        calls["n"] += 1
        return real(*args, **kwargs)

    monkeypatch.setattr(oracles, "efficient_allocation", counting)
    oracles.vcg_auction(scenario_y0, delta=0.0, grid_n=256)
    assert calls["n"] == scenario_y0.n_users + 1
