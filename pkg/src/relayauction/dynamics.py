"""Best-response dynamics, equilibrium solving, and price search.

With linear best responses bid_i = f_i * (opponents + reserve), an
equilibrium exists exactly when every factor is finite and the aggregate
share S = sum f_i/(1+f_i) stays below one; the equilibrium then allocates
user i the fraction f_i/(1+f_i) of the budget, so S is also the utilization.
Synchronous best-response updates form a linear fixed-point iteration whose
matrix has f_i in row i off the diagonal and zeros on it; its spectral
radius is below one under the same condition, which makes convergence
geometric from any positive start.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .auction import (
    AuctionParams,
    BestResponse,
    allocate,
    best_response_factor,
    critical_prices,
    divergence_cutoff,
    is_power_regular,
    is_snr_regular,
    payment,
)
from .channel import NetworkScenario, rate_increase, relayed_snr
from .numutil import bisect_transition, expand_until

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000
DIVERGENCE_CAP_FACTOR = 1e12


@dataclass(frozen=True)
class IterationTrace:
    """History of one synchronous best-response run."""

    bids: tuple[np.ndarray, ...]
    residuals: tuple[float, ...]
    converged: bool
    diverged: bool

    @property
    def final_bids(self) -> np.ndarray:
        return self.bids[-1]

    @property
    def n_steps(self) -> int:
        return len(self.residuals)


@dataclass(frozen=True)
class EquilibriumResult:
    """Equilibrium bids together with everything they imply for each user."""

    kind: str
    price: float
    reserve_bid: float
    bids: np.ndarray
    powers: np.ndarray
    delta_snr: np.ndarray
    rate_increase_bps: np.ndarray
    payments: np.ndarray
    payoffs: np.ndarray
    utilization: float
    method: str
    iterations: int = 0
    rate_estimate: Optional[float] = None

    @property
    def total_rate_increase_bps(self) -> float:
        return float(self.rate_increase_bps.sum())


@dataclass(frozen=True)
class NoEquilibrium:
    """Outcome marker for prices at which no equilibrium exists."""

    reason: str


SolveResult = Union[EquilibriumResult, NoEquilibrium]


@dataclass(frozen=True)
class PriceSearchResult:
    """Outcome of tuning the price toward a target utilization."""

    price: float
    utilization: float
    feasible: bool


def response_factors(scenario: NetworkScenario, params: AuctionParams) -> list[BestResponse]:
    """Per-user best-response factors at this price."""
    return [
        best_response_factor(u, params.kind, params.price, scenario.relay_budget_w, scenario.system)
        for u in scenario.users
    ]


def aggregate_share(factors: Sequence[BestResponse]) -> float:
    """S = sum f/(1+f); equilibrium utilization when all factors are finite."""
    if any(f.is_infinite for f in factors):
        raise ValueError("aggregate share undefined with divergent factors")
    return float(sum(f.value / (1.0 + f.value) for f in factors))


def ne_exists(scenario: NetworkScenario, params: AuctionParams) -> bool:
    factors = response_factors(scenario, params)
    if any(f.is_infinite for f in factors):
        return False
    return aggregate_share(factors) < 1.0


def ne_bids_from_factors(factors: Sequence[float], reserve_bid: float) -> np.ndarray:
    """Fixed-point bids for finite factors: b_i = f_i/(1+f_i) * (B + reserve)."""
    f = np.asarray(factors, dtype=float)
    shares = f / (1.0 + f)
    s = float(shares.sum())
    if s >= 1.0:
        raise ValueError("aggregate demand meets or exceeds the budget")
    total = reserve_bid * s / (1.0 - s)
    return shares * (total + reserve_bid)


def update_matrix(factors: Sequence[float]) -> np.ndarray:
    """Linear map of the synchronous update: f_i off the diagonal of row i."""
    f = np.asarray(factors, dtype=float)
    m = np.tile(f[:, None], (1, f.size))
    np.fill_diagonal(m, 0.0)
    return m


def equilibrium_from_bids(
    scenario: NetworkScenario,
    params: AuctionParams,
    bids: np.ndarray,
    method: str,
    iterations: int = 0,
    rate_estimate: Optional[float] = None,
) -> EquilibriumResult:
    powers = allocate(bids, params.reserve_bid, scenario.relay_budget_w)
    sys = scenario.system
    d_snr = np.array([float(relayed_snr(u, p, sys)) for u, p in zip(scenario.users, powers)])
    gains = np.array([float(rate_increase(u, p, sys)) for u, p in zip(scenario.users, powers)])
    pays = np.array(
        [payment(params.kind, params.price, u, float(p), sys) for u, p in zip(scenario.users, powers)]
    )
    return EquilibriumResult(
        kind=params.kind,
        price=params.price,
        reserve_bid=params.reserve_bid,
        bids=np.asarray(bids, dtype=float),
        powers=powers,
        delta_snr=d_snr,
        rate_increase_bps=gains,
        payments=pays,
        payoffs=gains - pays,
        utilization=float(powers.sum() / scenario.relay_budget_w),
        method=method,
        iterations=iterations,
        rate_estimate=rate_estimate,
    )


def iterate_best_response(
    scenario: NetworkScenario,
    params: AuctionParams,
    b0: Sequence[float],
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> IterationTrace:
    """Synchronous updates: every user best-responds to the previous profile.

    Stops when the max-norm bid change falls below tol relative to the bid
    scale, when any bid passes the divergence cap, or after max_iter steps.
    A divergent best response at this price marks the trace diverged
    immediately.
    """
    if not tol > 0.0:
        raise ValueError("tol must be strictly positive")
    b = np.asarray(b0, dtype=float).copy()
    if b.shape != (scenario.n_users,):
        raise ValueError("b0 must hold one bid per user")
    if np.any(b < 0.0) or not np.all(np.isfinite(b)):
        raise ValueError("starting bids must be finite and nonnegative")

    factors = response_factors(scenario, params)
    history = [b.copy()]
    residuals: list[float] = []
    if any(f.is_infinite for f in factors):
        return IterationTrace(tuple(history), (), converged=False, diverged=True)

    f = np.array([fac.value for fac in factors])
    cap = DIVERGENCE_CAP_FACTOR * params.reserve_bid
    converged = False
    diverged = False
    for _ in range(max_iter):
        b_next = f * (b.sum() - b + params.reserve_bid)
        res = float(np.max(np.abs(b_next - b)))
        history.append(b_next.copy())
        residuals.append(res)
        b = b_next
        if res <= tol * max(float(b.max(initial=0.0)), params.reserve_bid):
            converged = True
            break
        if float(b.max(initial=0.0)) > cap:
            diverged = True
            break
    return IterationTrace(tuple(history), tuple(residuals), converged=converged, diverged=diverged)


def solve_ne(
    scenario: NetworkScenario,
    params: AuctionParams,
    multistarts: int = 5,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> SolveResult:
    """Equilibrium of the auction at this price, or a no-equilibrium marker.

    SNR auction: solved in closed form through the aggregate-share identity.
    Power auction: the factors come from numeric payoff maximization, after
    which the fixed point is reached by iteration from several deterministic
    positive starts that must agree.
    """
    factors = response_factors(scenario, params)
    if any(f.is_infinite for f in factors):
        return NoEquilibrium("a best response diverges at this price")
    share = aggregate_share(factors)
    if share >= 1.0:
        return NoEquilibrium("aggregate demand meets or exceeds the budget")

    values = [f.value for f in factors]
    if params.kind == "snr":
        bids = ne_bids_from_factors(values, params.reserve_bid)
        return equilibrium_from_bids(scenario, params, bids, method="closed-form")

    rng = np.random.default_rng(20080521)
    starts: list[np.ndarray] = [
        np.full(scenario.n_users, 0.1 * params.reserve_bid),
        np.full(scenario.n_users, params.reserve_bid),
        np.full(scenario.n_users, 10.0 * params.reserve_bid),
    ]
    while len(starts) < multistarts:
        starts.append(rng.uniform(0.05, 5.0, scenario.n_users) * params.reserve_bid)
    fixed_points = []
    first_trace: Optional[IterationTrace] = None
    for b0 in starts[:multistarts]:
        trace = iterate_best_response(scenario, params, b0, tol=tol, max_iter=max_iter)
        if trace.diverged or not trace.converged:
            return NoEquilibrium("best-response iteration failed to converge")
        fixed_points.append(trace.final_bids)
        if first_trace is None:
            first_trace = trace
    ref = fixed_points[0]
    scale = max(float(np.max(np.abs(ref))), params.reserve_bid)
    for other in fixed_points[1:]:
        if float(np.max(np.abs(other - ref))) > 1e-6 * scale:
            raise RuntimeError("multistart iterations disagree on the fixed point")
    assert first_trace is not None
    rate = None
    if first_trace.converged and first_trace.n_steps >= 5:
        try:
            rate = estimate_geometric_rate(first_trace)
        except ValueError:
            rate = None
    return equilibrium_from_bids(
        scenario,
        params,
        ref,
        method="iteration",
        iterations=first_trace.n_steps,
        rate_estimate=rate,
    )


def estimate_geometric_rate(trace: IterationTrace, tail: int = 20) -> float:
    """Per-step residual contraction ratio from a least-squares fit of log residuals."""
    if not trace.converged:
        raise ValueError("rate estimation needs a converged trace")
    res = np.asarray(trace.residuals, dtype=float)
    if res.size < 5:
        raise ValueError("rate estimation needs at least 5 steps")
    steps = np.arange(res.size)
    floor = res.max() * 1e-14
    keep = res > max(floor, 0.0)
    res, steps = res[keep], steps[keep]
    if res.size < 5:
        raise ValueError("too few usable residuals for a rate estimate")
    if res.size > tail:
        res, steps = res[-tail:], steps[-tail:]
    slope = np.polyfit(steps, np.log(res), 1)[0]
    return float(math.exp(slope))


def _regularity_check(scenario: NetworkScenario, kind: str) -> bool:
    return is_snr_regular(scenario) if kind == "snr" else is_power_regular(scenario)


def threshold_price(scenario: NetworkScenario, kind: str, rtol: float = 1e-6) -> float:
    """Price above which an equilibrium exists and below which none does.

    Existence is monotone in the price: factors shrink as the price grows.
    Bisection runs between a price strictly inside some user's divergence
    region and one where every user bids zero.
    """
    if not _regularity_check(scenario, kind):
        raise ValueError(f"scenario is not {kind}-regular: only the all-zero outcome exists")
    budget = scenario.relay_budget_w
    sys = scenario.system
    cutoffs = [divergence_cutoff(u, kind, budget, sys) for u in scenario.users]
    hats = [critical_prices(u, kind, budget, sys).pi_hat for u in scenario.users]

    def exists(price: float) -> bool:
        return ne_exists(scenario, AuctionParams(kind, price))

    lo = max(cutoffs) * (1.0 - 1e-7)
    if lo <= 0.0 or exists(lo):
        # no divergence region at all: the threshold sits at zero price
        return 0.0
    hi = max(max(hats), lo * 2.0)
    hi = expand_until(exists, hi)
    x_false, x_true = bisect_transition(exists, lo, hi, rtol=rtol)
    return 0.5 * (x_false + x_true)


def _all_zero_price(scenario: NetworkScenario, kind: str) -> float:
    hats = [
        critical_prices(u, kind, scenario.relay_budget_w, scenario.system).pi_hat
        for u in scenario.users
    ]
    return max(max(hats) * 1.01, 1.0)


def calibrate_price(
    scenario: NetworkScenario,
    kind: str,
    target_utilization: float = 0.99,
    rtol: float = 1e-9,
) -> PriceSearchResult:
    """Smallest-utilization price still meeting the target, by bisection.

    Utilization is non-increasing in the price, so the feasible prices form
    an interval just above the existence threshold; the search returns the
    upper edge, leaving utilization as close to the target as the (possibly
    discontinuous) utilization curve allows.  When even the edge of the
    existence region falls short, the best achieved point is reported with
    feasible=False.
    """
    if not 0.0 < target_utilization < 1.0:
        raise ValueError("target_utilization must lie in (0, 1)")
    if not _regularity_check(scenario, kind):
        return PriceSearchResult(
            price=_all_zero_price(scenario, kind), utilization=0.0, feasible=False
        )

    def utilization(price: float) -> Optional[float]:
        factors = response_factors(scenario, AuctionParams(kind, price))
        if any(f.is_infinite for f in factors):
            return None
        share = aggregate_share(factors)
        return share if share < 1.0 else None

    pi_th = threshold_price(scenario, kind)
    price = max(pi_th, 1e-300) * (1.0 + 4e-6)
    u = utilization(price)
    for _ in range(60):
        if u is not None:
            break
        price *= 1.0 + 1e-5
        u = utilization(price)
    if u is None:
        return PriceSearchResult(
            price=_all_zero_price(scenario, kind), utilization=0.0, feasible=False
        )
    if u < target_utilization:
        return PriceSearchResult(price=price, utilization=u, feasible=False)

    def meets(p: float) -> bool:
        v = utilization(p)
        return v is not None and v >= target_utilization

    hi = expand_until(lambda p: not meets(p), price * 2.0)
    x_false, x_true = bisect_transition(lambda p: meets(p), hi, price, rtol=rtol)
    achieved = utilization(x_true)
    assert achieved is not None
    return PriceSearchResult(price=x_true, utilization=achieved, feasible=True)
