import os
import subprocess
import sys

import numpy as np
import pytest

from dpsgame.exact import solve_waiting_times, tagged_job_time
from dpsgame.metrics import cmu_queue_lengths, optimal_cost_cmu
from dpsgame.params import SystemParams
from dpsgame.sim import (SimConfig, SimEstimate, load_backend, replication_rng, simulate,
                         simulate_dps, simulate_ros, simulate_strict_priority, simulate_tagged)
from dpsgame.sim.residual import dps_residual_run

SHORT = SimConfig(events=200_000)
K2 = SystemParams([1.0, 1.0], [2.0, 1.0], 4.0)

try:
    load_backend("cython")
    HAVE_C = True
except ImportError:
    HAVE_C = False


def within(est, target, k=3.0):
    return abs(est.z(target)) < k


# -- backends ------------------------------------------------------------------

KERNEL_ARGS = {
    "dps_run": dict(lam=[1.0, 0.5], mu=2.0, beta=[2.0, 1.0], warmup=5.0, horizon=3000.0,
                    probe_beta=1.5, probe_rate=0.3),
    "priority_run": dict(lam=[1.0, 0.5], mu=2.0, warmup=5.0, horizon=3000.0),
    "ros_run": dict(lam=[1.0, 0.5], mu=2.0, beta=[2.0, 1.0], warmup=5.0, horizon=3000.0),
}


@pytest.mark.skipif(not HAVE_C, reason="compiled core not built")
@pytest.mark.parametrize("kernel", sorted(KERNEL_ARGS))
def test_backends_bit_identical(kernel):
    py = getattr(load_backend("python"), kernel)(rng=replication_rng(9, 3), **KERNEL_ARGS[kernel])
    cy = getattr(load_backend("cython"), kernel)(rng=replication_rng(9, 3), **KERNEL_ARGS[kernel])
    assert py == cy


def test_backend_selection():
    with pytest.raises(ValueError):
        load_backend("fortran")
    env = dict(os.environ, DPSGAME_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import dpsgame.sim as s; print(s.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_reproducible_and_seed_sensitive():
    a = simulate_dps(K2, [2.0, 1.0], SimConfig(events=20_000, rng_seed=5))
    b = simulate_dps(K2, [2.0, 1.0], SimConfig(events=20_000, rng_seed=5))
    c = simulate_dps(K2, [2.0, 1.0], SimConfig(events=20_000, rng_seed=6))
    assert a == b
    assert a.W != c.W


def test_workers_do_not_change_results():
    cfg = SimConfig(events=20_000, rng_seed=1)
    one = simulate_dps(K2, [2.0, 1.0], cfg)
    two = simulate_dps(K2, [2.0, 1.0], SimConfig(events=20_000, rng_seed=1, workers=2))
    assert one == two


# -- DPS -----------------------------------------------------------------------

def test_single_class_processor_sharing():
    p = SystemParams([1.4], [1.0], 2.0)
    est = simulate_dps(p, [1.0], SHORT)
    assert within(est.W[0], 1 / (p.service_rate * (1 - p.load)))
    assert within(est.EN[0], p.load / (1 - p.load))


def test_two_class_hand_values():
    est = simulate_dps(K2, [2.0, 1.0], SHORT)
    assert within(est.W[0], 4 / 9) and within(est.W[1], 5 / 9)


def test_three_class_against_exact_solver():
    p = SystemParams.from_rates([1.0, 0.5, 1.5], [3.0, 2.0, 1.0], load=0.7)
    beta = [3.0, 1.5, 0.5]
    W = solve_waiting_times(p, beta).W
    est = simulate_dps(p, beta, SHORT)
    for e, w in zip(est.W, W):
        assert within(e, w)


def test_littles_law():
    p = SystemParams.from_rates([1.0, 0.5, 1.5], [3.0, 2.0, 1.0], load=0.7)
    est = simulate_dps(p, [3.0, 1.5, 0.5], SHORT)
    for g in est.little_gap:
        assert within(g, 0.0)


def test_tagged_single_class_hand_value():
    p = SystemParams([1.0], [1.0], 2.0)
    assert tagged_job_time(p, [1.0], 2.0).V == pytest.approx(0.8, rel=1e-14)
    assert within(simulate_tagged(p, [1.0], 2.0, SHORT), 0.8)


def test_tagged_at_own_priority_matches_class_time():
    beta = [2.0, 1.0]
    dps = simulate_dps(K2, beta, SHORT)
    for i, b in enumerate(beta):
        tag = simulate_tagged(K2, beta, b, SimConfig(events=200_000, rng_seed=17))
        se = np.hypot(tag.std_error, dps.W[i].std_error)
        assert abs(tag.mean - dps.W[i].mean) < 3 * se


def test_tagged_decreasing_in_priority():
    ests = [simulate_tagged(K2, [2.0, 1.0], b, SHORT) for b in (0.5, 1.0, 2.0)]
    for hi, lo in zip(ests, ests[1:]):
        assert hi.mean - lo.mean > 3 * np.hypot(hi.std_error, lo.std_error)
    with pytest.raises(ValueError):
        simulate_tagged(K2, [2.0, 1.0], 0.0, SHORT)


def test_residual_work_simulator_agrees():
    lam, mu, beta = [1.0, 1.0], 4.0, [2.0, 1.0]
    warm, horizon = 20.0, 5000.0
    runs = [dps_residual_run(lam, mu, beta, warm, horizon, replication_rng(0, r)) for r in range(20)]
    w = np.array([np.divide(r["soj_sum"], r["soj_cnt"]) for r in runs])
    chain = simulate_dps(K2, beta, SimConfig(warmup_time=warm, measurement_time=horizon - warm, rng_seed=1))
    for i in range(2):
        res = SimEstimate.from_samples(w[:, i])
        assert within(res, [4 / 9, 5 / 9][i])
        se = np.hypot(res.std_error, chain.W[i].std_error)
        assert abs(res.mean - chain.W[i].mean) < 3 * se


# -- strict priority -----------------------------------------------------------

def test_priority_single_class():
    p = SystemParams([1.2], [3.0], 2.0)
    est = simulate_strict_priority(p, SHORT)
    assert within(est.optimal_cost, 3.0 * p.load / (1 - p.load))


def test_priority_hand_value_and_telescoping():
    est = simulate_strict_priority(K2, SHORT)
    assert optimal_cost_cmu(K2) == pytest.approx(4 / 3)
    assert within(est.optimal_cost, 4 / 3)
    for e, n in zip(est.EN, cmu_queue_lengths(K2)):
        assert within(e, n)
    assert within(est.total_jobs, K2.load / (1 - K2.load))


# -- ROS -----------------------------------------------------------------------

def test_ros_equal_priorities_conserve_work():
    p = SystemParams.from_rates([1.0, 0.5, 1.5], [3.0, 2.0, 1.0], load=0.7)
    est = simulate_ros(p, [1.0, 1.0, 1.0], SHORT)
    total = sum(l * e.mean for l, e in zip(p.arrival_rates, est.W))
    # classes share one busy period, so their errors add rather than cancel
    se = sum(l * e.std_error for l, e in zip(p.arrival_rates, est.W))
    assert abs(total - p.load / (1 - p.load)) < 3 * se


def test_ros_single_class_ignores_priority():
    p = SystemParams([1.0], [1.0], 2.0)
    for b in (0.1, 10.0):
        est = simulate_ros(p, [b], SHORT)
        assert within(est.W[0], 1.0 / (p.service_rate - 1.0))


def test_ros_job_alone_is_served_to_completion():
    # at vanishing load a job almost never waits, so sojourn is one service time
    p = SystemParams([1e-3, 1e-3], [2.0, 1.0], 1.0)
    est = simulate_ros(p, [100.0, 1.0], SimConfig(measurement_time=2e5, rng_seed=0))
    for e in est.W:
        assert abs(e.mean - 1.0) < 0.01 + 3 * e.std_error


# -- config --------------------------------------------------------------------

def test_sim_config_validation_and_defaults():
    for bad in (dict(replications=1), dict(warmup_time=0.0), dict(measurement_time=-1.0),
                dict(policy="FIFO"), dict(rng_seed=-1), dict(rng_seed=2 ** 64)):
        with pytest.raises(ValueError):
            SimConfig(**bad)
    r = SimConfig().resolved(K2)
    assert r.warmup_time == pytest.approx(10 / (0.5 * 4.0))
    assert r.measurement_time == pytest.approx(1e6 / 4.0)
    assert r.probe_rate == pytest.approx(2.0 * 0.5)


def test_dispatch():
    cfg = SimConfig(events=10_000, policy="strict-priority")
    assert simulate(K2, None, cfg) == simulate_strict_priority(K2, cfg)
    cfg = SimConfig(events=10_000, policy="ROS")
    assert simulate(K2, [2.0, 1.0], cfg) == simulate_ros(K2, [2.0, 1.0], cfg)
    assert simulate(K2, [2.0, 1.0], SimConfig(events=10_000)) == simulate_dps(K2, [2.0, 1.0], SimConfig(events=10_000))


def test_estimate_z():
    e = SimEstimate.from_samples([1.0, 2.0, 3.0])
    assert e.mean == 2.0 and e.std_error == pytest.approx(1 / np.sqrt(3))
    assert e.z(2.0) == 0.0
    flat = SimEstimate.from_samples([1.0, 1.0])
    assert flat.z(1.0) == 0.0 and flat.z(2.0) == np.inf
