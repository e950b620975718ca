"""Geometry, path loss, SNR, and rate model for amplify-and-forward links.

A link carries its data over two phases: the source broadcasts to both its
destination and the relay, then the relay amplifies and forwards.  The
destination combines the direct and relayed branches by maximal ratio
combining, which adds the two SNRs; the half-rate factor accounts for the
relay occupying the second phase.

All quantities are SI: watts, hertz, meters, bits/s.  Functions are pure and
accept numpy arrays for the relay-power argument where noted.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

LN2 = math.log(2.0)

Point = tuple[float, float]


@dataclass(frozen=True)
class SystemParams:
    """Shared radio constants: bandwidth, noise power, and path-loss exponent."""

    bandwidth_hz: float
    noise_w: float
    pathloss_exponent: float

    def __post_init__(self) -> None:
        for name in ("bandwidth_hz", "noise_w", "pathloss_exponent"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class UserLink:
    """One source-destination pair: transmit power and the three channel gains."""

    user_id: int
    source_power_w: float
    gain_sd: float
    gain_sr: float
    gain_rd: float
    source: Optional[Point] = None
    destination: Optional[Point] = None

    def __post_init__(self) -> None:
        if not self.source_power_w > 0.0:
            raise ValueError("source_power_w must be strictly positive")
        for name in ("gain_sd", "gain_sr", "gain_rd"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class NetworkScenario:
    """Immutable world description: users, relay power budget, system constants."""

    users: tuple[UserLink, ...]
    relay_budget_w: float
    system: SystemParams
    relay: Optional[Point] = None

    def __post_init__(self) -> None:
        if not self.relay_budget_w > 0.0:
            raise ValueError("relay_budget_w must be strictly positive")
        if not self.users:
            raise ValueError("scenario needs at least one user")

    @property
    def n_users(self) -> int:
        return len(self.users)

    def without_user(self, index: int) -> "NetworkScenario":
        users = tuple(u for k, u in enumerate(self.users) if k != index)
        return NetworkScenario(users, self.relay_budget_w, self.system, self.relay)


def path_gain(a: Sequence[float], b: Sequence[float], exponent: float) -> float:
    """Power-law gain dist(a, b) ** -exponent between two planar points."""
    if not exponent > 0.0:
        raise ValueError("exponent must be strictly positive")
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    d2 = dx * dx + dy * dy
    if d2 == 0.0:
        raise ValueError("zero distance: degenerate geometry")
    return float(d2 ** (-exponent / 2.0))


def direct_snr(link: UserLink, sys: SystemParams) -> float:
    """SNR of the direct source-destination branch."""
    return link.source_power_w * link.gain_sd / sys.noise_w


def relayed_snr_limit(link: UserLink, sys: SystemParams) -> float:
    """Supremum of the relayed SNR over relay power (the source-relay SNR)."""
    return link.source_power_w * link.gain_sr / sys.noise_w


def relayed_snr(link: UserLink, p_rd, sys: SystemParams):
    """Relayed-branch SNR at the destination for relay transmit power p_rd.

    Accepts a scalar or numpy array.  Strictly increasing and concave in p_rd,
    bounded above by relayed_snr_limit.
    """
    if np.any(np.asarray(p_rd) < 0.0):
        raise ValueError("relay power must be nonnegative")
    a = p_rd * link.gain_rd / sys.noise_w
    b = relayed_snr_limit(link, sys)
    return a * b / (a + b + 1.0)


def power_for_relayed_snr(link: UserLink, target: float, sys: SystemParams) -> float:
    """Relay power achieving a given relayed SNR (inverse of relayed_snr)."""
    if target < 0.0:
        raise ValueError("target SNR must be nonnegative")
    if target == 0.0:
        return 0.0
    b = relayed_snr_limit(link, sys)
    if target >= b:
        raise ValueError("target SNR at or above the attainable supremum")
    a = target * (b + 1.0) / (b - target)
    return a * sys.noise_w / link.gain_rd


def direct_rate(link: UserLink, sys: SystemParams) -> float:
    """Rate of direct transmission only."""
    return float(sys.bandwidth_hz * np.log2(1.0 + direct_snr(link, sys)))


def coop_rate(link: UserLink, p_rd, sys: SystemParams):
    """Rate of two-phase cooperative transmission with MRC at the destination.

    Exactly half the direct rate at zero relay power: the halving is applied
    last so the two code paths share the same rounding.
    """
    g = direct_snr(link, sys) + relayed_snr(link, p_rd, sys)
    return 0.5 * (sys.bandwidth_hz * np.log2(1.0 + g))


def rate_increase(link: UserLink, p_rd, sys: SystemParams):
    """Rate gained by cooperating, clamped at zero (the source may opt out)."""
    return np.maximum(coop_rate(link, p_rd, sys) - direct_rate(link, sys), 0.0)


def breakeven_power(link: UserLink, sys: SystemParams) -> Optional[float]:
    """Smallest relay power at which cooperation matches direct transmission.

    Cooperation breaks even where the relayed SNR reaches g**2 + g with
    g the direct SNR; inverting the relayed-SNR expression gives a closed
    form.  Returns None when that level exceeds the attainable supremum.
    """
    g = direct_snr(link, sys)
    need = g * g + g
    if need == 0.0:
        return 0.0
    b = relayed_snr_limit(link, sys)
    if need >= b:
        return None
    return power_for_relayed_snr(link, need, sys)


def rate_increase_power_slope(link: UserLink, p_rd: float, sys: SystemParams) -> float:
    """Marginal rate increase per watt of relay power; zero on the clamped region."""
    if float(rate_increase(link, p_rd, sys)) <= 0.0:
        return 0.0
    b = relayed_snr_limit(link, sys)
    a = p_rd * link.gain_rd / sys.noise_w
    dsnr_dp = b * (b + 1.0) / (a + b + 1.0) ** 2 * (link.gain_rd / sys.noise_w)
    g = direct_snr(link, sys) + relayed_snr(link, p_rd, sys)
    return 0.5 * sys.bandwidth_hz / LN2 * dsnr_dp / (1.0 + g)


def snr_marginal_rate(link: UserLink, delta_snr: float, sys: SystemParams) -> float:
    """Marginal rate increase per unit of relayed SNR on the cooperative branch."""
    g = direct_snr(link, sys)
    return 0.5 * sys.bandwidth_hz / LN2 / (1.0 + g + delta_snr)


# ---------------------------------------------------------------------------
# scenario construction and JSON round-trip


def link_from_geometry(
    user_id: int,
    source: Point,
    destination: Point,
    relay: Point,
    source_power_w: float,
    system: SystemParams,
) -> UserLink:
    """Derive the three channel gains of one user from node positions."""
    alpha = system.pathloss_exponent
    return UserLink(
        user_id=user_id,
        source_power_w=source_power_w,
        gain_sd=path_gain(source, destination, alpha),
        gain_sr=path_gain(source, relay, alpha),
        gain_rd=path_gain(relay, destination, alpha),
        source=(float(source[0]), float(source[1])),
        destination=(float(destination[0]), float(destination[1])),
    )


def scenario_from_geometry(
    sources: Sequence[Point],
    destinations: Sequence[Point],
    relay: Point,
    source_power_w: float,
    system: SystemParams,
    relay_budget_w: float,
) -> NetworkScenario:
    if len(sources) != len(destinations):
        raise ValueError("sources and destinations must pair up")
    users = tuple(
        link_from_geometry(i, s, d, relay, source_power_w, system)
        for i, (s, d) in enumerate(zip(sources, destinations))
    )
    relay_pt = (float(relay[0]), float(relay[1]))
    return NetworkScenario(users, relay_budget_w, system, relay_pt)


def scenario_to_dict(scenario: NetworkScenario) -> dict:
    doc: dict = {
        "system": {
            "bandwidth_hz": scenario.system.bandwidth_hz,
            "noise_w": scenario.system.noise_w,
            "pathloss_exponent": scenario.system.pathloss_exponent,
        },
        "relay_budget_w": scenario.relay_budget_w,
        "users": [],
    }
    if scenario.relay is not None:
        doc["relay"] = list(scenario.relay)
    for u in scenario.users:
        entry: dict = {
            "source_power_w": u.source_power_w,
            "gain_sd": u.gain_sd,
            "gain_sr": u.gain_sr,
            "gain_rd": u.gain_rd,
        }
        if u.source is not None:
            entry["source"] = list(u.source)
        if u.destination is not None:
            entry["destination"] = list(u.destination)
        doc["users"].append(entry)
    return doc


def scenario_from_dict(doc: dict) -> NetworkScenario:
    """Build a scenario from its JSON form.

    Each user carries either explicit gains or source/destination positions;
    positional users additionally need a top-level relay position, and their
    gains are derived from distances via the path-loss exponent.
    """
    sysdoc = doc["system"]
    system = SystemParams(
        bandwidth_hz=float(sysdoc["bandwidth_hz"]),
        noise_w=float(sysdoc["noise_w"]),
        pathloss_exponent=float(sysdoc["pathloss_exponent"]),
    )
    relay = tuple(float(v) for v in doc["relay"]) if "relay" in doc else None
    users = []
    for i, entry in enumerate(doc["users"]):
        p_s = float(entry["source_power_w"])
        if "gain_sd" in entry:
            users.append(
                UserLink(
                    user_id=i,
                    source_power_w=p_s,
                    gain_sd=float(entry["gain_sd"]),
                    gain_sr=float(entry["gain_sr"]),
                    gain_rd=float(entry["gain_rd"]),
                    source=tuple(entry["source"]) if "source" in entry else None,
                    destination=tuple(entry["destination"]) if "destination" in entry else None,
                )
            )
        else:
            if relay is None:
                raise ValueError("positional users require a relay position")
            users.append(
                link_from_geometry(
                    i,
                    tuple(float(v) for v in entry["source"]),
                    tuple(float(v) for v in entry["destination"]),
                    relay,
                    p_s,
                    system,
                )
            )
    return NetworkScenario(tuple(users), float(doc["relay_budget_w"]), system, relay)


def load_scenario(path: str | Path) -> NetworkScenario:
    with open(path, "r", encoding="utf-8") as fh:
        return scenario_from_dict(json.load(fh))


def save_scenario(scenario: NetworkScenario, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario_to_dict(scenario), fh, indent=2, sort_keys=True)
        fh.write("\n")
