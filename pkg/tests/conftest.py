"""Shared fixtures: the benchmark two-user geometry and random scenarios."""

import numpy as np
import pytest

from relayauction import (
    NetworkScenario,
    SystemParams,
    TwoUserSweepSpec,
    build_two_user_scenario,
    is_snr_regular,
    link_from_geometry,
    run_two_user_sweep,
)

BENCH_SYSTEM = SystemParams(bandwidth_hz=1e6, noise_w=1e-11, pathloss_exponent=4.0)


def make_random_scenario(rng: np.random.Generator, n_users: int) -> NetworkScenario:
    """Random square-field topology with the relay at the origin."""
    users = []
    for i in range(n_users):
        src = (float(rng.uniform(-150, 150)), float(rng.uniform(-150, 150)))
        dst = (float(rng.uniform(-150, 150)), float(rng.uniform(-150, 150)))
        users.append(link_from_geometry(i, src, dst, (0.0, 0.0), 0.01, BENCH_SYSTEM))
    return NetworkScenario(tuple(users), 0.1, BENCH_SYSTEM)


def make_snr_regular_scenarios(seed: int, count: int, min_users: int = 2, max_users: int = 5):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        sc = make_random_scenario(rng, int(rng.integers(min_users, max_users + 1)))
        if is_snr_regular(sc):
            out.append(sc)
    return out


@pytest.fixture(scope="session")
def bench_spec() -> TwoUserSweepSpec:
    return TwoUserSweepSpec()


@pytest.fixture(scope="session")
def scenario_y0(bench_spec):
    return build_two_user_scenario(bench_spec, 0.0)


@pytest.fixture(scope="session")
def scenario_y25(bench_spec):
    return build_two_user_scenario(bench_spec, 25.0)


@pytest.fixture(scope="session")
def scenario_ym25(bench_spec):
    return build_two_user_scenario(bench_spec, -25.0)


@pytest.fixture(scope="session")
def two_user_report(bench_spec):
    import time

    t0 = time.time()
    report = run_two_user_sweep(bench_spec)
    elapsed = time.time() - t0
    return report, elapsed
