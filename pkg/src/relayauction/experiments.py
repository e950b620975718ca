"""Scenario builders, the two benchmark experiments, and report output.

The two-user sweep moves a relay along a vertical line through a fixed
four-node geometry and reports, per position, the centralized pivot-auction
benchmark and both share auctions at prices tuned for 99% utilization.  The
multi-user experiment averages both auctions over seeded random topologies
for several relay power budgets.  Reports are deterministic functions of
(spec, seed) and are written as CSV plus a full-precision JSON mirror.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .auction import POWER, SNR, AuctionParams
from .channel import NetworkScenario, SystemParams, scenario_from_geometry
from .dynamics import EquilibriumResult, calibrate_price, solve_ne
from .oracles import efficient_allocation, vcg_auction

RNG_ALGORITHM = "numpy.random.Generator(PCG64)"


@dataclass(frozen=True)
class TwoUserSweepSpec:
    """Fixed two-user geometry with the relay swept along x = relay_x."""

    source_1: tuple[float, float] = (200.0, -25.0)
    source_2: tuple[float, float] = (0.0, 25.0)
    dest_1: tuple[float, float] = (0.0, -25.0)
    dest_2: tuple[float, float] = (200.0, 25.0)
    relay_x: float = 80.0
    relay_y_min: float = -200.0
    relay_y_max: float = 200.0
    relay_y_step: float = 5.0
    source_power_w: float = 0.01
    noise_w: float = 1e-11
    bandwidth_hz: float = 1e6
    relay_budget_w: float = 0.1
    pathloss_exponent: float = 4.0
    reserve_bid: float = 1.0
    target_utilization: float = 0.99
    vcg_delta: float = 0.0
    oracle_grid_n: int = 4096

    @property
    def system(self) -> SystemParams:
        return SystemParams(self.bandwidth_hz, self.noise_w, self.pathloss_exponent)

    def relay_ys(self) -> np.ndarray:
        n = int(round((self.relay_y_max - self.relay_y_min) / self.relay_y_step)) + 1
        return self.relay_y_min + self.relay_y_step * np.arange(n)


@dataclass(frozen=True)
class MultiUserSpec:
    """Random-topology population study over a set of relay power budgets."""

    n_users: int = 20
    field_min: float = -150.0
    field_max: float = 150.0
    relay: tuple[float, float] = (0.0, 0.0)
    relay_powers: tuple[float, ...] = (0.04, 0.1, 0.3, 1.0)
    n_topologies: int = 100
    seed: int = 0
    source_power_w: float = 0.01
    noise_w: float = 1e-11
    bandwidth_hz: float = 1e6
    pathloss_exponent: float = 4.0
    reserve_bid: float = 1.0
    target_utilization: float = 0.99

    @property
    def system(self) -> SystemParams:
        return SystemParams(self.bandwidth_hz, self.noise_w, self.pathloss_exponent)


@dataclass(frozen=True)
class Report:
    """Plot-ready tabular results plus provenance metadata."""

    name: str
    columns: tuple[str, ...]
    rows: tuple[dict, ...]
    meta: dict = field(default_factory=dict)


def build_two_user_scenario(spec: TwoUserSweepSpec, relay_y: float) -> NetworkScenario:
    """Scenario for one relay position of the two-user sweep."""
    if not spec.relay_y_min <= relay_y <= spec.relay_y_max:
        raise ValueError("relay_y outside the sweep range")
    return scenario_from_geometry(
        sources=(spec.source_1, spec.source_2),
        destinations=(spec.dest_1, spec.dest_2),
        relay=(spec.relay_x, relay_y),
        source_power_w=spec.source_power_w,
        system=spec.system,
        relay_budget_w=spec.relay_budget_w,
    )


def positive_increase_variance(values: Iterable[float]) -> float:
    """Population variance of the strictly positive entries; 0 below two entries."""
    v = np.asarray(list(values), dtype=float)
    pos = v[v > 0.0]
    if pos.size < 2:
        return 0.0
    return float(pos.var())


def _calibrated_equilibrium(
    scenario: NetworkScenario, kind: str, target: float, reserve_bid: float
) -> tuple[EquilibriumResult, float, bool]:
    search = calibrate_price(scenario, kind, target_utilization=target)
    params = AuctionParams(kind, search.price, reserve_bid)
    eq = solve_ne(scenario, params)
    if isinstance(eq, EquilibriumResult):
        return eq, search.price, search.feasible
    raise RuntimeError(f"no equilibrium at calibrated price {search.price!r}")


def run_two_user_sweep(spec: TwoUserSweepSpec = TwoUserSweepSpec()) -> Report:
    """Sweep the relay along its line and benchmark all three mechanisms."""
    w = spec.bandwidth_hz
    rows = []
    for y in spec.relay_ys():
        scenario = build_two_user_scenario(spec, float(y))
        row: dict = {"relay_y_m": float(y)}

        vcg = vcg_auction(scenario, delta=spec.vcg_delta, grid_n=spec.oracle_grid_n)
        gains = vcg.allocation.per_user_rate_increase_bps / w
        row["vcg_total_bits_per_hz"] = float(gains.sum())
        row["vcg_user1_bits_per_hz"] = float(gains[0])
        row["vcg_user2_bits_per_hz"] = float(gains[1])
        row["vcg_utilization"] = float(vcg.allocation.powers.sum() / spec.relay_budget_w)

        for kind in (POWER, SNR):
            eq, price, feasible = _calibrated_equilibrium(
                scenario, kind, spec.target_utilization, spec.reserve_bid
            )
            per_user = eq.rate_increase_bps / w
            row[f"{kind}_price"] = price
            row[f"{kind}_total_bits_per_hz"] = float(per_user.sum())
            row[f"{kind}_user1_bits_per_hz"] = float(per_user[0])
            row[f"{kind}_user2_bits_per_hz"] = float(per_user[1])
            row[f"{kind}_utilization"] = eq.utilization
            row[f"{kind}_calibrated"] = float(feasible)
            row[f"{kind}_positive_variance"] = positive_increase_variance(per_user)
        rows.append(row)

    columns = tuple(rows[0].keys())
    meta = {
        "experiment": "two-user-sweep",
        "relay_x_m": spec.relay_x,
        "relay_y_step_m": spec.relay_y_step,
        "source_power_w": spec.source_power_w,
        "noise_w": spec.noise_w,
        "bandwidth_hz": spec.bandwidth_hz,
        "relay_budget_w": spec.relay_budget_w,
        "pathloss_exponent": spec.pathloss_exponent,
        "reserve_bid": spec.reserve_bid,
        "target_utilization": spec.target_utilization,
        "vcg_delta": spec.vcg_delta,
    }
    return Report(name="two_user_sweep", columns=columns, rows=tuple(rows), meta=meta)


def sample_topologies(spec: MultiUserSpec) -> np.ndarray:
    """Seeded node draws: (topology, user, [sx, sy, dx, dy]) uniform on the field."""
    rng = np.random.default_rng(spec.seed)
    return rng.uniform(
        spec.field_min, spec.field_max, size=(spec.n_topologies, spec.n_users, 4)
    )


def scenario_from_topology(
    spec: MultiUserSpec, nodes: np.ndarray, relay_budget_w: float
) -> NetworkScenario:
    sources = [(float(r[0]), float(r[1])) for r in nodes]
    dests = [(float(r[2]), float(r[3])) for r in nodes]
    return scenario_from_geometry(
        sources=sources,
        destinations=dests,
        relay=spec.relay,
        source_power_w=spec.source_power_w,
        system=spec.system,
        relay_budget_w=relay_budget_w,
    )


def run_multi_user(spec: MultiUserSpec = MultiUserSpec()) -> Report:
    """Average both auctions over seeded topologies for each power budget.

    The same topologies are reused across budgets so that curves over the
    budget are paired comparisons.  The centralized welfare benchmark is
    included only for small populations (three users or fewer); at full scale
    its search cost dwarfs the auctions and the comparison is left out.
    """
    w = spec.bandwidth_hz
    topologies = sample_topologies(spec)
    with_oracle = spec.n_users <= 3
    rows = []
    for budget in spec.relay_powers:
        acc = {
            kind: {"total": [], "variance": [], "utilization": [], "price": [], "feasible": []}
            for kind in (POWER, SNR)
        }
        oracle_totals = []
        for t in range(spec.n_topologies):
            scenario = scenario_from_topology(spec, topologies[t], float(budget))
            for kind in (POWER, SNR):
                eq, price, feasible = _calibrated_equilibrium(
                    scenario, kind, spec.target_utilization, spec.reserve_bid
                )
                per_user = eq.rate_increase_bps / w
                acc[kind]["total"].append(float(per_user.sum()))
                acc[kind]["variance"].append(positive_increase_variance(per_user))
                acc[kind]["utilization"].append(eq.utilization)
                acc[kind]["price"].append(price)
                acc[kind]["feasible"].append(1.0 if feasible else 0.0)
            if with_oracle:
                eff = efficient_allocation(scenario, delta=0.0, grid_n=512)
                oracle_totals.append(eff.total_rate_increase_bps / w)
        row: dict = {"relay_power_w": float(budget)}
        for kind in (POWER, SNR):
            row[f"{kind}_mean_total_bits_per_hz"] = float(np.mean(acc[kind]["total"]))
            row[f"{kind}_mean_positive_variance"] = float(np.mean(acc[kind]["variance"]))
            row[f"{kind}_mean_utilization"] = float(np.mean(acc[kind]["utilization"]))
            row[f"{kind}_mean_price"] = float(np.mean(acc[kind]["price"]))
            row[f"{kind}_calibrated_fraction"] = float(np.mean(acc[kind]["feasible"]))
        if with_oracle:
            row["efficient_mean_total_bits_per_hz"] = float(np.mean(oracle_totals))
        rows.append(row)

    columns = tuple(rows[0].keys())
    meta = {
        "experiment": "multi-user",
        "n_users": spec.n_users,
        "n_topologies": spec.n_topologies,
        "seed": spec.seed,
        "rng": RNG_ALGORITHM,
        "field_m": [spec.field_min, spec.field_max],
        "relay_m": list(spec.relay),
        "source_power_w": spec.source_power_w,
        "noise_w": spec.noise_w,
        "bandwidth_hz": spec.bandwidth_hz,
        "pathloss_exponent": spec.pathloss_exponent,
        "reserve_bid": spec.reserve_bid,
        "target_utilization": spec.target_utilization,
    }
    return Report(name="multi_user", columns=columns, rows=tuple(rows), meta=meta)


def _format_cell(value: float) -> str:
    return f"{float(value):.12g}"


def report_to_csv(report: Report) -> str:
    lines = [",".join(report.columns)]
    for row in report.rows:
        lines.append(",".join(_format_cell(row[c]) for c in report.columns))
    return "\n".join(lines) + "\n"


def report_to_json(report: Report) -> str:
    doc = {
        "name": report.name,
        "meta": report.meta,
        "columns": list(report.columns),
        "rows": [dict(r) for r in report.rows],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def emit_report(
    report: Report, out_dir: str | Path, formats: Iterable[str] = ("csv", "json")
) -> list[Path]:
    """Write the report files; bytes are a pure function of the report."""
    if not report.rows:
        raise ValueError("refusing to write an empty report")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for fmt in formats:
        if fmt == "csv":
            path = out / f"{report.name}.csv"
            path.write_text(report_to_csv(report), encoding="utf-8")
        elif fmt == "json":
            path = out / f"{report.name}.json"
            path.write_text(report_to_json(report), encoding="utf-8")
        else:
            raise ValueError(f"unknown report format: {fmt!r}")
        written.append(path)
    return written


def report_from_json(text: str) -> Report:
    doc = json.loads(text)
    return Report(
        name=doc["name"],
        columns=tuple(doc["columns"]),
        rows=tuple(doc["rows"]),
        meta=doc["meta"],
    )
