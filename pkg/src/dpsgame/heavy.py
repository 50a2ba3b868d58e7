"""Heavy-traffic sojourn times and the equilibria they induce.

Under state-space collapse the mean sojourn of a job with priority ``b`` is
approximated by ``1 / ((1 - rho) * mu * b * gamma)`` where ``gamma`` is the
load-weighted mean inverse priority.  That makes the job-level best response
explicit and the equilibrium available in closed form.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .distributions import Density, PointMasses
from .exact import solve_waiting_times, tagged_job_time
from .params import SystemParams, priority_vector
from .results import EquilibriumResult


@dataclass(frozen=True)
class HeavyTrafficContext:
    """Aggregates shared by every heavy-traffic formula for one profile."""

    gamma: float
    S1: float

    @classmethod
    def build(cls, params: SystemParams, priorities) -> "HeavyTrafficContext":
        return cls(gamma=aggregate_inverse_priority(params, priorities), S1=cost_moment(params))


def aggregate_inverse_priority(params: SystemParams, priorities) -> float:
    """``gamma = (1/rho) * sum_i rho_i / beta_i``."""
    beta = priority_vector(priorities, params.num_classes)
    return float(np.dot(params.arrival_rates, 1.0 / beta) / params.total_arrival_rate)


def cost_moment(params: SystemParams, alpha: float | None = None) -> float:
    """``S1 = sum_i lambda_i * c_i ** (-1/(alpha+1))``."""
    a = params.alpha if alpha is None else alpha
    return float(np.dot(params.arrival_rates, params.cost_rates ** (-1.0 / (a + 1.0))))


def v_ht(params: SystemParams, priorities, beta: float) -> float:
    """Heavy-traffic sojourn time of a tagged job with priority ``beta``."""
    if not beta > 0:
        raise ValueError("tagged priority must be positive")
    gamma = aggregate_inverse_priority(params, priorities)
    return 1.0 / ((1.0 - params.load) * params.service_rate * beta * gamma)


def hte_priorities(params: SystemParams) -> np.ndarray:
    """Closed-form job-level heavy-traffic equilibrium priorities."""
    a, rho = params.alpha, params.load
    scale = (a * (1.0 - rho) / rho * cost_moment(params)) ** (-1.0 / a)
    return params.cost_rates ** (1.0 / (a + 1.0)) * scale


def hte_foc_residuals(params: SystemParams, priorities) -> np.ndarray:
    """Relative first-order residuals of each class's heavy-traffic objective.

    For class i the derivative of ``c_i V_HT(b) + b**alpha`` at ``b=beta_i``
    is ``-c_i / (k b^2) + alpha b^(alpha-1)`` with ``k = (1-rho) mu gamma``;
    the residual is that derivative divided by ``alpha b^(alpha-1)``.
    """
    beta = priority_vector(priorities, params.num_classes)
    k = (1.0 - params.load) * params.service_rate * aggregate_inverse_priority(params, beta)
    a = params.alpha
    return params.cost_rates / (k * beta ** 2) / (a * beta ** (a - 1.0)) - 1.0


def hte_job_level(params: SystemParams) -> EquilibriumResult:
    beta = hte_priorities(params)
    res = float(np.max(np.abs(hte_foc_residuals(params, beta))))
    return EquilibriumResult(priorities=beta, kind="job-HTE", residual=res)


def w_ht_class(params: SystemParams, priorities, i: int, beta: float | None = None) -> float:
    """Class-level heavy-traffic waiting time of class ``i``.

    ``beta`` replaces class i's own coordinate inside the aggregate, which is
    what distinguishes the class-level game (a class moves all its jobs).
    Defaults to the class's current priority.
    """
    bvec = priority_vector(priorities, params.num_classes)
    if not 0 <= i < params.num_classes:
        raise IndexError(f"class index {i} out of range for K={params.num_classes}")
    b = bvec[i] if beta is None else float(beta)
    if not b > 0:
        raise ValueError("priority must be positive")
    lam = params.arrival_rates
    others = float(np.dot(np.delete(lam, i), 1.0 / np.delete(bvec, i)))
    gamma_minus = (others + lam[i] / b) / params.total_arrival_rate
    return 1.0 / ((1.0 - params.load) * params.service_rate * b * gamma_minus)


# ---------------------------------------------------------------------------
# continuum-of-classes game


@dataclass(frozen=True)
class LimitingGameSpec:
    """Continuum limit of the class-level game.

    ``service_rate`` is the per-class service rate (the limit of mu_K / K),
    ``cost`` and ``arrival`` are distributions over positive bounded supports.
    """

    cost: PointMasses | Density
    arrival: PointMasses | Density
    service_rate: float
    priority_support: tuple = (1e-8, 1e8)

    def __post_init__(self):
        if not self.service_rate > 0:
            raise ValueError("service rate must be positive")
        for dist in (self.cost, self.arrival):
            if not dist.support[0] > 0:
                raise ValueError("supports must be positive")
        lo, hi = self.priority_support
        if not 0 < lo < hi:
            raise ValueError("priority support must be a positive interval")
        if not self.mean_arrival < self.service_rate:
            raise ValueError("mean arrival rate must be below the per-class service rate")

    @property
    def mean_arrival(self) -> float:
        return self.arrival.expect(lambda x: x)

    @property
    def load(self) -> float:
        return self.mean_arrival / self.service_rate

    def finite_game(self, num_classes: int, rng: np.random.Generator, alpha: float = 1.0) -> tuple[SystemParams, np.ndarray]:
        """Sample a K-class instance approximating this limit.

        Service rate is ``K * mu`` and time is measured in per-class units
        (one unit is K original units), so cost rates are scaled by K.  The
        unscaled cost draws are returned alongside, in canonical order.
        """
        return self.finite_games([num_classes], rng, alpha)[0]

    def finite_games(self, class_counts: Sequence[int], rng: np.random.Generator,
                     alpha: float = 1.0) -> list[tuple[SystemParams, np.ndarray]]:
        """Nested instances: system K uses the first K classes of one iid draw.

        This follows a single sample path of class draws as K grows, which is
        the setting of the almost-sure convergence to the strategy function.
        """
        n = max(int(k) for k in class_counts)
        c_all = self.cost.sample(rng, n)
        lam_all = self.arrival.sample(rng, n)
        out = []
        for k in class_counts:
            k = int(k)
            params = SystemParams.from_rates(lam_all[:k], k * c_all[:k], k * self.service_rate, alpha)
            out.append((params, params.cost_rates / k))
        return out


@dataclass(frozen=True)
class StrategyFunction:
    """Closed-form equilibrium strategy ``B(c)`` of the continuum game."""

    alpha: float
    service_rate: float
    load: float
    S2: float
    gamma: float

    @property
    def scale(self) -> float:
        return (self.service_rate * self.alpha * (1.0 - self.load) * self.S2) ** (-1.0 / self.alpha)

    def __call__(self, c):
        return np.asarray(c, dtype=float) ** (1.0 / (self.alpha + 1.0)) * self.scale

    def v_ht(self, beta):
        """Heavy-traffic sojourn of a job with priority ``beta`` against ``B``."""
        return 1.0 / (self.service_rate * (1.0 - self.load) * self.gamma * np.asarray(beta, dtype=float))

    def foc_residual(self, c) -> np.ndarray:
        """Relative derivative of ``c V_HT(b) + b**alpha`` at ``b = B(c)``."""
        c = np.asarray(c, dtype=float)
        b = self(c)
        a = self.alpha
        k = self.service_rate * (1.0 - self.load) * self.gamma
        return c / (k * b ** 2) / (a * b ** (a - 1.0)) - 1.0


def limiting_hte(spec: LimitingGameSpec, alpha: float, tol: float = 1e-10) -> StrategyFunction:
    s2 = spec.cost.expect(lambda c: c ** (-1.0 / (alpha + 1.0)), tol=tol)
    rho = spec.load
    partial = StrategyFunction(alpha=alpha, service_rate=spec.service_rate, load=rho, S2=s2, gamma=np.nan)
    gamma = spec.cost.expect(lambda c: 1.0 / partial(c), tol=tol)
    return StrategyFunction(alpha=alpha, service_rate=spec.service_rate, load=rho, S2=s2, gamma=gamma)


# ---------------------------------------------------------------------------
# deviation check along a heavy-traffic sequence


def load_sequence(params: SystemParams, loads: Sequence[float]) -> list[SystemParams]:
    """Instances with fixed arrival rates and service rate shrunk to hit each load."""
    return [params.with_load(r) for r in loads]


def deviation_check(params_seq: Sequence[SystemParams], delta: float) -> np.ndarray:
    """Scaled gain from deviating to ``delta`` times one's HTE priority.

    Returns an array of shape ``(len(params_seq), K)`` whose entry ``[n, i]``
    is ``(1-rho_n) * [cost at HTE - cost at delta * beta_i]`` for class i of
    instance n, evaluated with exact sojourn times.  Positive entries mean
    the deviation pays.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    rows = []
    for p in params_seq:
        beta = hte_priorities(p)
        prof = solve_waiting_times(p, beta)
        a = p.alpha
        gains = []
        for i, (b, c) in enumerate(zip(beta, p.cost_rates)):
            at = c * tagged_job_time(p, beta, b, prof).V + b ** a
            dev = c * tagged_job_time(p, beta, delta * b, prof).V + (delta * b) ** a
            gains.append((1.0 - p.load) * (at - dev))
        rows.append(gains)
    return np.array(rows)
