"""Cost, revenue and price of anarchy at the heavy-traffic equilibrium."""
from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Sequence

import numpy as np

from .errors import InstabilityError
from .params import SystemParams

ALPHA_GRID = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0)


@dataclass(frozen=True)
class EconomicReport:
    system_cost: float
    revenue: float
    optimal_cost: float
    poa: float
    poa_bound_tight: float
    poa_bound_loose: float

    def as_dict(self) -> dict:
        return asdict(self)


def _moments(params: SystemParams, alpha: float):
    lam, c = params.arrival_rates, params.cost_rates
    e = 1.0 / (alpha + 1.0)
    return float(np.dot(lam, c ** (alpha * e))), float(np.dot(lam, c ** (-e)))


def system_cost_hte(params: SystemParams, alpha: float | None = None) -> float:
    """Total delay cost per unit time at the heavy-traffic equilibrium."""
    a = params.alpha if alpha is None else alpha
    rho = params.load
    up, down = _moments(params, a)
    return rho / (1.0 - rho) * up / down


def revenue_hte(params: SystemParams, alpha: float | None = None) -> float:
    """Payments collected per unit time at the heavy-traffic equilibrium."""
    a = params.alpha if alpha is None else alpha
    rho = params.load
    up, down = _moments(params, a)
    return rho / (a * (1.0 - rho)) * up / down


def cmu_queue_lengths(params: SystemParams) -> np.ndarray:
    """Mean queue lengths under preemptive priority in descending cost order.

    Classes 1..i together form an M/M/1 queue, so class i holds the
    difference of two M/M/1 occupancies.
    """
    cum = np.concatenate([[0.0], np.cumsum(params.loads)])
    if cum[-1] >= 1.0:
        raise InstabilityError("unstable system")
    occ = cum / (1.0 - cum)
    return np.diff(occ)


def optimal_cost_cmu(params: SystemParams) -> float:
    """Minimum delay cost rate, attained by the c-mu rule."""
    return float(np.dot(params.cost_rates, cmu_queue_lengths(params)))


def poa_bounds(params: SystemParams) -> tuple[float, float]:
    """The two upper bounds on the price of anarchy: (tight, loose)."""
    a = params.alpha
    lam, c = params.arrival_rates, params.cost_rates
    lr, cr = lam[:-1] / lam[-1], c[:-1] / c[-1]
    tight = (np.dot(lr, cr ** (a / (a + 1.0))) + 1.0) / (np.dot(lr, cr ** (-1.0 / (a + 1.0))) + 1.0)
    loose = (lam.sum() - lam[-1]) / lam[-1] * (c[0] / c[-1]) ** (a / (a + 1.0)) + 1.0
    return float(tight), float(loose)


def poa_report(params: SystemParams) -> EconomicReport:
    cost = system_cost_hte(params)
    opt = optimal_cost_cmu(params)
    tight, loose = poa_bounds(params)
    return EconomicReport(system_cost=cost, revenue=revenue_hte(params), optimal_cost=opt,
                          poa=cost / opt, poa_bound_tight=tight, poa_bound_loose=loose)


def poa_growth_instance(num_classes: int, m: float, alpha: float = 1.0, arrival_rate: float = 1.0) -> SystemParams:
    """Instance on which the price of anarchy grows without bound in ``m``.

    Equal arrival rates, cost ``m`` for the first K-1 classes and 1 for the
    last, load ``1 - 1/m^2``.  The K-1 equal-cost classes merge into one.
    """
    c = [m] * (num_classes - 1) + [1.0]
    return SystemParams.from_rates([arrival_rate] * num_classes, c, alpha=alpha, load=1.0 - m ** -2)


@dataclass(frozen=True)
class MonotonicityReport:
    alphas: tuple
    costs: tuple
    revenues: tuple
    cost_increasing: bool
    revenue_decreasing: bool
    revenue_claim_applies: bool


def monotonicity_suite(params_grid: Sequence[SystemParams], alphas: Sequence[float] = ALPHA_GRID) -> list[MonotonicityReport]:
    """Cost and revenue along an alpha grid for each instance.

    ``revenue_claim_applies`` is true when ``c_1/c_K < e^4``, the regime in
    which revenue is known to fall with alpha.
    """
    out = []
    for p in params_grid:
        costs = tuple(system_cost_hte(p, a) for a in alphas)
        revs = tuple(revenue_hte(p, a) for a in alphas)
        out.append(MonotonicityReport(
            alphas=tuple(alphas), costs=costs, revenues=revs,
            cost_increasing=bool(np.all(np.diff(costs) > 0)),
            revenue_decreasing=bool(np.all(np.diff(revs) < 0)),
            revenue_claim_applies=bool(p.cost_rates[0] / p.cost_rates[-1] < np.exp(4.0))))
    return out


def revenue_slope(params: SystemParams, alpha: float = 1.0, h: float = 1e-4) -> float:
    """Central difference of revenue in alpha."""
    return (revenue_hte(params, alpha + h) - revenue_hte(params, alpha - h)) / (2 * h)


def find_revenue_reversal(arrival_rates=(1.0, 1.0), load: float = 0.5, alpha: float = 1.0,
                          start_ratio: float = 1e6, max_decades: int = 12):
    """Smallest decade cost ratio c1/c2 at which revenue rises with alpha near ``alpha``.

    Starts at ``start_ratio`` and escalates by factors of ten.  Returns
    ``(ratio, slope)`` or ``(None, last_slope)`` if no reversal was found.
    """
    ratio, slope = start_ratio, np.nan
    for _ in range(max_decades + 1):
        p = SystemParams.from_rates(arrival_rates, [ratio, 1.0], alpha=alpha, load=load)
        slope = revenue_slope(p, alpha)
        if slope > 0:
            return ratio, slope
        ratio *= 10.0
    return None, slope
