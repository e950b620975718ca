"""Centralized benchmarks: efficient, fair, and pivot-payment allocations.

The total rate increase is non-smooth and non-concave in the power split, so
the efficient allocation is found by honest search: an exhaustive grid for up
to three users (restricted to the full-budget face, since every user's rate
increase is non-decreasing in own power) followed by local refinement, and
multistart pairwise-transfer descent beyond that.  The fair allocation
equalizes the marginal rate gain per unit of relayed SNR across participants,
which pins a common SNR level; the largest feasible level is found by
bisection on the budget constraint.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .channel import (
    NetworkScenario,
    breakeven_power,
    direct_snr,
    power_for_relayed_snr,
    rate_increase,
    relayed_snr,
    relayed_snr_limit,
    snr_marginal_rate,
)
from .numutil import bisect_transition, golden_max


@dataclass(frozen=True)
class OracleAllocation:
    """A centrally computed power split and the welfare it yields."""

    powers: np.ndarray
    total_rate_increase_bps: float
    per_user_rate_increase_bps: np.ndarray
    marginal_utility: np.ndarray  # d(rate)/d(SNR) for participants, 0 otherwise


@dataclass(frozen=True)
class VcgResult:
    """Efficient allocation plus the externality payment charged to each user."""

    allocation: OracleAllocation
    payments: np.ndarray


def _welfare(scenario: NetworkScenario, powers: np.ndarray) -> float:
    return float(
        sum(float(rate_increase(u, float(p), scenario.system)) for u, p in zip(scenario.users, powers))
    )


def _finish(scenario: NetworkScenario, powers: np.ndarray) -> OracleAllocation:
    """Zero out users whose power buys no rate increase, then package."""
    sys = scenario.system
    powers = powers.copy()
    gains = np.zeros_like(powers)
    marginals = np.zeros_like(powers)
    for i, u in enumerate(scenario.users):
        gain = float(rate_increase(u, float(powers[i]), sys))
        if gain <= 0.0:
            powers[i] = 0.0
            continue
        gains[i] = gain
        marginals[i] = snr_marginal_rate(u, float(relayed_snr(u, float(powers[i]), sys)), sys)
    return OracleAllocation(
        powers=powers,
        total_rate_increase_bps=float(gains.sum()),
        per_user_rate_increase_bps=gains,
        marginal_utility=marginals,
    )


def _line_search_pair(
    scenario: NetworkScenario, i: int, j: int, pool: float, grid_n: int
) -> tuple[float, float]:
    """Best split of a power pool between users i and j: (power_i, welfare gain)."""
    sys = scenario.system
    ui, uj = scenario.users[i], scenario.users[j]
    t = np.linspace(0.0, pool, grid_n)
    w = rate_increase(ui, t, sys) + rate_increase(uj, np.maximum(pool - t, 0.0), sys)
    k = int(np.argmax(w))
    cell = pool / (grid_n - 1) if grid_n > 1 else pool
    lo = max(0.0, t[k] - cell)
    hi = min(pool, t[k] + cell)
    x, v = golden_max(
        lambda s: float(rate_increase(ui, s, sys) + rate_increase(uj, max(pool - s, 0.0), sys)),
        lo,
        hi,
        rtol=1e-12,
    )
    if w[k] > v:
        x, v = float(t[k]), float(w[k])
    return x, v


def _transfer_sweeps(
    scenario: NetworkScenario,
    budget: float,
    x0: np.ndarray,
    grid_n: int = 65,
    max_sweeps: int = 60,
) -> np.ndarray:
    """Refine a feasible split by repeated optimal two-user power transfers."""
    sys = scenario.system
    n = scenario.n_users
    x = np.clip(np.asarray(x0, dtype=float).copy(), 0.0, None)
    total = float(x.sum())
    if total > budget:
        x *= budget / total
    slack = max(budget - float(x.sum()), 0.0)
    if slack > 0.0:
        # hand the whole slack to whichever user gains most from it
        gains = [
            float(rate_increase(u, float(x[i]) + slack, sys)) - float(rate_increase(u, float(x[i]), sys))
            for i, u in enumerate(scenario.users)
        ]
        x[int(np.argmax(gains))] += slack
    if n == 1:
        return x
    tol = 1e-12 * max(scenario.system.bandwidth_hz, 1.0)
    for _ in range(max_sweeps):
        improved = False
        for i in range(n):
            for j in range(i + 1, n):
                pool = float(x[i] + x[j])
                if pool <= 0.0:
                    continue
                before = float(rate_increase(scenario.users[i], float(x[i]), sys)) + float(
                    rate_increase(scenario.users[j], float(x[j]), sys)
                )
                xi, after = _line_search_pair(scenario, i, j, pool, grid_n)
                if after > before + tol:
                    x[i], x[j] = xi, pool - xi
                    improved = True
        if not improved:
            break
    return x


def _grid_best_two(scenario: NetworkScenario, budget: float, grid_n: int) -> np.ndarray:
    xi, _ = _line_search_pair(scenario, 0, 1, budget, grid_n)
    return np.array([xi, budget - xi])


def _grid_best_three(scenario: NetworkScenario, budget: float, grid_n: int) -> np.ndarray:
    sys = scenario.system
    u0, u1, u2 = scenario.users
    t = np.linspace(0.0, budget, grid_n)
    g0 = np.asarray(rate_increase(u0, t, sys))
    best_w = -1.0
    best = np.zeros(3)
    for k, x0 in enumerate(t):
        rest = budget - x0
        t1 = t[t <= rest + 1e-18]
        if t1.size == 0:
            continue
        w = g0[k] + np.asarray(rate_increase(u1, t1, sys)) + np.asarray(
            rate_increase(u2, np.maximum(rest - t1, 0.0), sys)
        )
        m = int(np.argmax(w))
        if w[m] > best_w:
            best_w = float(w[m])
            best = np.array([x0, float(t1[m]), rest - float(t1[m])])
    return best


def efficient_allocation(
    scenario: NetworkScenario,
    delta: float = 0.01,
    grid_n: int = 4096,
    seeds: Iterable[Sequence[float]] = (),
) -> OracleAllocation:
    """Power split maximizing the total rate increase on budget P*(1-delta).

    Search is exhaustive-grid for up to three users and multistart
    pairwise-transfer descent beyond; extra starting points can be supplied
    through seeds.  Power that buys no rate increase is released, so the
    budget may go partly unused.
    """
    if not 0.0 <= delta < 1.0:
        raise ValueError("delta must lie in [0, 1)")
    if grid_n < 16:
        raise ValueError("grid_n must be at least 16")
    budget = scenario.relay_budget_w * (1.0 - delta)
    n = scenario.n_users
    sys = scenario.system

    candidates: list[np.ndarray] = []
    if n == 1:
        candidates.append(np.array([budget]))
    elif n == 2:
        candidates.append(_grid_best_two(scenario, budget, grid_n))
    elif n == 3:
        candidates.append(_grid_best_three(scenario, budget, min(grid_n, 1024)))
    else:
        rng = np.random.default_rng(371)
        for i in range(min(n, 8)):
            one = np.zeros(n)
            one[i] = budget
            candidates.append(one)
        candidates.append(np.full(n, budget / n))
        for _ in range(20):
            w = rng.dirichlet(np.ones(n))
            candidates.append(w * budget)
    for seed in seeds:
        candidates.append(np.asarray(seed, dtype=float))

    best: Optional[np.ndarray] = None
    best_w = -1.0
    for cand in candidates:
        refined = _transfer_sweeps(scenario, budget, cand)
        w = _welfare(scenario, refined)
        if w > best_w:
            best_w = w
            best = refined
    assert best is not None
    return _finish(scenario, best)


def fair_allocation(scenario: NetworkScenario, delta: float = 0.01) -> OracleAllocation:
    """Equal-marginal power split on budget P*(1-delta).

    Every participant ends at the same combined SNR level (direct plus
    relayed), which equalizes the marginal rate gain per unit of SNR; the
    level is pushed as high as the budget allows.  Users whose rate increase
    would not be positive at the resulting level are dropped and the level
    recomputed, until the participant set is stable.
    """
    if not 0.0 <= delta < 1.0:
        raise ValueError("delta must lie in [0, 1)")
    budget = scenario.relay_budget_w * (1.0 - delta)
    sys = scenario.system
    n = scenario.n_users

    active = []
    for i, u in enumerate(scenario.users):
        x0 = breakeven_power(u, sys)
        if x0 is not None and x0 < budget:
            active.append(i)

    def power_needed(i: int, level: float) -> float:
        u = scenario.users[i]
        target = level - 1.0 - direct_snr(u, sys)
        if target <= 0.0:
            return 0.0
        limit = relayed_snr_limit(u, sys)
        if target >= limit:
            return float("inf")
        return power_for_relayed_snr(u, target, sys)

    def total_power(level: float, members: Sequence[int]) -> float:
        return sum(power_needed(i, level) for i in members)

    level = 1.0
    while active:
        lo = 1.0  # zero demand everywhere
        hi = min(
            1.0 + direct_snr(scenario.users[i], sys) + relayed_snr_limit(scenario.users[i], sys)
            for i in active
        ) * (1.0 - 1e-12)
        if total_power(hi, active) <= budget:
            level = hi
        else:
            _, level = bisect_transition(
                lambda k: total_power(k, active) <= budget, hi, lo, rtol=1e-13
            )
        drops = [
            i
            for i in active
            if level <= (1.0 + direct_snr(scenario.users[i], sys)) ** 2
        ]
        if not drops:
            break
        active = [i for i in active if i not in drops]

    powers = np.zeros(n)
    for i in active:
        powers[i] = power_needed(i, level)
    return _finish(scenario, powers)


def vcg_auction(scenario: NetworkScenario, delta: float = 0.01, grid_n: int = 4096) -> VcgResult:
    """Efficient allocation with pivot payments.

    Each user pays the welfare the others lose from its presence: the best
    total the others could reach alone, minus what they actually get.  One
    welfare maximization runs for the full population and one per user.
    """
    base = efficient_allocation(scenario, delta, grid_n)
    n = scenario.n_users
    payments = np.zeros(n)
    for i in range(n):
        others_gain = float(base.total_rate_increase_bps - base.per_user_rate_increase_bps[i])
        if n == 1:
            payments[i] = 0.0
            continue
        reduced = scenario.without_user(i)
        seed = np.delete(base.powers, i)
        alone = efficient_allocation(reduced, delta, grid_n, seeds=(seed,))
        payments[i] = max(alone.total_rate_increase_bps - others_gain, 0.0)
    return VcgResult(allocation=base, payments=payments)
