"""Discrete-event simulation of the single-server queue under several disciplines."""
from ._backend import BACKEND, load as load_backend
from .simulator import (POLICIES, RNG_ALGORITHM, ClassEstimates, PriorityEstimates, SimConfig,
                        SimEstimate, replication_rng, simulate, simulate_dps, simulate_ros,
                        simulate_strict_priority, simulate_tagged)

__all__ = [
    "BACKEND", "load_backend", "POLICIES", "RNG_ALGORITHM", "ClassEstimates", "PriorityEstimates",
    "SimConfig", "SimEstimate", "replication_rng", "simulate", "simulate_dps", "simulate_ros",
    "simulate_strict_priority", "simulate_tagged",
]
