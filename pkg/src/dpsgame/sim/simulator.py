"""Monte Carlo estimates for DPS, strict-priority and ROS queues.

Each replication runs one long sample path on its own random substream and
yields one number per quantity; estimates report the across-replication mean
and its standard error.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ..params import SystemParams, priority_vector
from . import _backend

RNG_ALGORITHM = "numpy PCG64, SeedSequence(seed, spawn_key=(replication,)), uniform blocks of 8192"
POLICIES = ("DPS", "strict-priority", "ROS")


@dataclass(frozen=True)
class SimConfig:
    """Run lengths and seeding for one simulation experiment.

    ``warmup_time`` defaults to ``10 / ((1-rho) mu)``; ``measurement_time``
    defaults to roughly ``events`` chain transitions (``events / (2 lambda)``).
    ``probe_rate`` is the rate of tagged-job probes; the default
    ``lambda (1 - rho)`` keeps probe work close to the main chain's at any
    load, since each probe runs for about one sojourn.
    """

    warmup_time: float | None = None
    measurement_time: float | None = None
    replications: int = 20
    rng_seed: int = 0
    policy: str = "DPS"
    events: int = 1_000_000
    probe_rate: float | None = None
    workers: int = 1
    backend: str | None = None

    def __post_init__(self):
        if self.replications < 2:
            raise ValueError("need at least two replications for a standard error")
        for name in ("warmup_time", "measurement_time"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")
        if self.policy not in POLICIES:
            raise ValueError(f"policy must be one of {POLICIES}")
        if not 0 <= self.rng_seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def resolved(self, params: SystemParams) -> "SimConfig":
        rho, mu, lam = params.load, params.service_rate, params.total_arrival_rate
        warm = self.warmup_time if self.warmup_time is not None else 10.0 / ((1.0 - rho) * mu)
        meas = self.measurement_time if self.measurement_time is not None else self.events / (2.0 * lam)
        probe = self.probe_rate if self.probe_rate is not None else lam * (1.0 - rho)
        return replace(self, warmup_time=warm, measurement_time=meas, probe_rate=probe)


@dataclass(frozen=True)
class SimEstimate:
    mean: float
    std_error: float
    replications: int
    label: str = ""

    @classmethod
    def from_samples(cls, samples, label: str = "") -> "SimEstimate":
        x = np.asarray(samples, dtype=float)
        return cls(mean=float(x.mean()), std_error=float(x.std(ddof=1) / np.sqrt(x.size)),
                   replications=int(x.size), label=label)

    def z(self, target: float) -> float:
        """Standardized distance from ``target``."""
        if self.std_error == 0:
            return 0.0 if self.mean == target else float(np.inf)
        return (self.mean - target) / self.std_error


def replication_rng(seed: int, rep: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(rep,))))


def _one(args):
    kernel_name, backend, rep, seed, kwargs = args
    core = _backend.load(backend) if backend else _backend.core
    return getattr(core, kernel_name)(rng=replication_rng(seed, rep), **kwargs)


def _replicate(kernel_name: str, cfg: SimConfig, **kwargs) -> list[dict]:
    jobs = [(kernel_name, cfg.backend, r, cfg.rng_seed, kwargs) for r in range(cfg.replications)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
            return list(ex.map(_one, jobs))
    return [_one(j) for j in jobs]


@dataclass(frozen=True)
class ClassEstimates:
    """Per-class estimates from one experiment.

    ``W``: mean sojourn from completed jobs.  ``EN``: time-average count.
    ``little_gap``: ``lambda_i W_i - EN_i`` computed within each replication,
    which should straddle zero.
    """

    W: tuple
    EN: tuple
    little_gap: tuple
    events: int


def _class_estimates(runs: list[dict], params: SystemParams, cfg: SimConfig, prefix: str) -> ClassEstimates:
    area = np.array([r["area"] for r in runs]) / cfg.measurement_time
    cnt = np.array([r["soj_cnt"] for r in runs], dtype=float)
    tot = np.array([r["soj_sum"] for r in runs])
    with np.errstate(invalid="ignore", divide="ignore"):
        w = tot / cnt
    gap = params.arrival_rates[None, :] * w - area
    K = params.num_classes
    return ClassEstimates(
        W=tuple(SimEstimate.from_samples(w[:, i], f"{prefix}W_{i + 1}") for i in range(K)),
        EN=tuple(SimEstimate.from_samples(area[:, i], f"{prefix}E[N_{i + 1}]") for i in range(K)),
        little_gap=tuple(SimEstimate.from_samples(gap[:, i], f"little_{i + 1}") for i in range(K)),
        events=int(sum(r["events"] for r in runs)))


def simulate_dps(params: SystemParams, priorities, sim_config: SimConfig = SimConfig()) -> ClassEstimates:
    beta = priority_vector(priorities, params.num_classes)
    cfg = sim_config.resolved(params)
    runs = _replicate("dps_run", cfg, lam=list(params.arrival_rates), mu=params.service_rate,
                      beta=list(beta), warmup=cfg.warmup_time,
                      horizon=cfg.warmup_time + cfg.measurement_time)
    return _class_estimates(runs, params, cfg, "")


def simulate_tagged(params: SystemParams, priorities, beta: float,
                    sim_config: SimConfig = SimConfig()) -> SimEstimate:
    """Sojourn of a tagged job with priority ``beta`` entering in steady state."""
    if not beta > 0:
        raise ValueError("tagged priority must be positive")
    bv = priority_vector(priorities, params.num_classes)
    cfg = sim_config.resolved(params)
    runs = _replicate("dps_run", cfg, lam=list(params.arrival_rates), mu=params.service_rate,
                      beta=list(bv), warmup=cfg.warmup_time,
                      horizon=cfg.warmup_time + cfg.measurement_time,
                      probe_beta=float(beta), probe_rate=cfg.probe_rate)
    return SimEstimate.from_samples([r["probe_sum"] / r["probe_cnt"] for r in runs], f"V({beta:g})")


@dataclass(frozen=True)
class PriorityEstimates:
    optimal_cost: SimEstimate
    EN: tuple
    total_jobs: SimEstimate


def simulate_strict_priority(params: SystemParams, sim_config: SimConfig = SimConfig()) -> PriorityEstimates:
    """Preemptive priority in descending cost order (the c-mu rule)."""
    cfg = sim_config.resolved(params)
    runs = _replicate("priority_run", cfg, lam=list(params.arrival_rates), mu=params.service_rate,
                      warmup=cfg.warmup_time, horizon=cfg.warmup_time + cfg.measurement_time)
    area = np.array([r["area"] for r in runs]) / cfg.measurement_time
    return PriorityEstimates(
        optimal_cost=SimEstimate.from_samples(area @ params.cost_rates, "C_opt"),
        EN=tuple(SimEstimate.from_samples(area[:, i], f"E[N_{i + 1}]") for i in range(params.num_classes)),
        total_jobs=SimEstimate.from_samples(area.sum(axis=1), "E[N]"))


def simulate_ros(params: SystemParams, priorities, sim_config: SimConfig = SimConfig()) -> ClassEstimates:
    beta = priority_vector(priorities, params.num_classes)
    cfg = sim_config.resolved(params)
    runs = _replicate("ros_run", cfg, lam=list(params.arrival_rates), mu=params.service_rate,
                      beta=list(beta), warmup=cfg.warmup_time,
                      horizon=cfg.warmup_time + cfg.measurement_time)
    return _class_estimates(runs, params, cfg, "ros_")


def simulate(params: SystemParams, priorities, sim_config: SimConfig = SimConfig()):
    """Dispatch on ``sim_config.policy``."""
    if sim_config.policy == "DPS":
        return simulate_dps(params, priorities, sim_config)
    if sim_config.policy == "ROS":
        return simulate_ros(params, priorities, sim_config)
    return simulate_strict_priority(params, sim_config)
