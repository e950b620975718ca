"""Deterministic simulator for auction-based relay power allocation.

Amplify-and-forward users share one relay's transmit power through simple
share auctions (SNR-priced or power-priced); this package computes their
equilibria in closed form and by best-response iteration, compares them
against centralized efficient/fair/pivot benchmarks, and reproduces the
standard two-user and multi-user experiments.
"""

from .auction import (
    KINDS,
    POWER,
    SNR,
    AuctionParams,
    BestResponse,
    CriticalPrices,
    allocate,
    best_response,
    best_response_factor,
    critical_prices,
    g_snr,
    is_power_regular,
    is_snr_regular,
    payment,
    payoff,
    power_best_response_factor,
    power_critical_prices,
    snr_best_response_factor,
    snr_critical_prices,
)
from .channel import (
    NetworkScenario,
    SystemParams,
    UserLink,
    breakeven_power,
    coop_rate,
    direct_rate,
    direct_snr,
    link_from_geometry,
    load_scenario,
    path_gain,
    power_for_relayed_snr,
    rate_increase,
    rate_increase_power_slope,
    relayed_snr,
    relayed_snr_limit,
    save_scenario,
    scenario_from_dict,
    scenario_from_geometry,
    scenario_to_dict,
    snr_marginal_rate,
)
from .dynamics import (
    EquilibriumResult,
    IterationTrace,
    NoEquilibrium,
    PriceSearchResult,
    aggregate_share,
    calibrate_price,
    estimate_geometric_rate,
    equilibrium_from_bids,
    iterate_best_response,
    ne_bids_from_factors,
    ne_exists,
    response_factors,
    solve_ne,
    threshold_price,
    update_matrix,
)
from .experiments import (
    MultiUserSpec,
    Report,
    TwoUserSweepSpec,
    build_two_user_scenario,
    emit_report,
    positive_increase_variance,
    report_from_json,
    report_to_csv,
    report_to_json,
    run_multi_user,
    run_two_user_sweep,
    sample_topologies,
    scenario_from_topology,
)
from .oracles import OracleAllocation, VcgResult, efficient_allocation, fair_allocation, vcg_auction

__version__ = "0.1.0"

__all__ = [
    "AuctionParams",
    "BestResponse",
    "CriticalPrices",
    "EquilibriumResult",
    "IterationTrace",
    "KINDS",
    "MultiUserSpec",
    "NetworkScenario",
    "NoEquilibrium",
    "OracleAllocation",
    "POWER",
    "PriceSearchResult",
    "Report",
    "SNR",
    "SystemParams",
    "TwoUserSweepSpec",
    "UserLink",
    "VcgResult",
    "aggregate_share",
    "allocate",
    "best_response",
    "best_response_factor",
    "breakeven_power",
    "build_two_user_scenario",
    "calibrate_price",
    "coop_rate",
    "critical_prices",
    "direct_rate",
    "direct_snr",
    "efficient_allocation",
    "emit_report",
    "equilibrium_from_bids",
    "estimate_geometric_rate",
    "fair_allocation",
    "g_snr",
    "is_power_regular",
    "is_snr_regular",
    "iterate_best_response",
    "link_from_geometry",
    "load_scenario",
    "ne_bids_from_factors",
    "ne_exists",
    "path_gain",
    "payment",
    "payoff",
    "positive_increase_variance",
    "power_best_response_factor",
    "power_critical_prices",
    "power_for_relayed_snr",
    "rate_increase",
    "rate_increase_power_slope",
    "relayed_snr",
    "relayed_snr_limit",
    "report_from_json",
    "report_to_csv",
    "report_to_json",
    "response_factors",
    "run_multi_user",
    "run_two_user_sweep",
    "sample_topologies",
    "save_scenario",
    "scenario_from_dict",
    "scenario_from_geometry",
    "scenario_from_topology",
    "scenario_to_dict",
    "snr_best_response_factor",
    "snr_marginal_rate",
    "snr_critical_prices",
    "solve_ne",
    "threshold_price",
    "update_matrix",
    "vcg_auction",
]
