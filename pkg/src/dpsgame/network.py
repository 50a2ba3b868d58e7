"""Several independent DPS markets shared by jobs that need all of their resources.

A class-i job bids separately at every resource in its route and pays the
sum of its bids (linear pricing).  It is charged for the slowest of its
per-resource sojourns, so at a best response the sojourns are equalized at a
common level ``Vbar``; the search is then one-dimensional in ``Vbar``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .equilibrium import SolverConfig
from .errors import ConvergenceError, HypothesisError, InstabilityError
from .optimize import minimize_log
from .params import SystemParams


@dataclass(frozen=True)
class NetworkSpec:
    service_rates: np.ndarray
    arrival_rates: np.ndarray
    cost_rates: np.ndarray
    routes: tuple

    def __post_init__(self):
        mu = np.asarray(self.service_rates, dtype=float).ravel()
        lam = np.asarray(self.arrival_rates, dtype=float).ravel()
        c = np.asarray(self.cost_rates, dtype=float).ravel()
        routes = tuple(tuple(sorted(set(int(j) for j in r))) for r in self.routes)
        if not (lam.shape == c.shape and len(routes) == lam.size):
            raise ValueError("arrival_rates, cost_rates and routes must have one entry per class")
        if np.any(mu <= 0) or np.any(lam <= 0) or np.any(c <= 0):
            raise ValueError("rates must be positive")
        for i, r in enumerate(routes):
            if not r:
                raise ValueError(f"class {i} has an empty route")
            if r[0] < 0 or r[-1] >= mu.size:
                raise ValueError(f"class {i} uses an unknown resource")
        object.__setattr__(self, "service_rates", mu)
        object.__setattr__(self, "arrival_rates", lam)
        object.__setattr__(self, "cost_rates", c)
        object.__setattr__(self, "routes", routes)
        load = self.resource_loads
        if np.any(load >= 1.0):
            raise InstabilityError(f"resource loads {load} not all below 1")
        if np.any(load == 0.0):
            raise ValueError("every resource must carry at least one class")

    @property
    def num_resources(self) -> int:
        return int(self.service_rates.size)

    @property
    def num_classes(self) -> int:
        return int(self.arrival_rates.size)

    @property
    def incidence(self) -> np.ndarray:
        """Boolean ``(K, J)`` matrix, true where class i uses resource j."""
        inc = np.zeros((self.num_classes, self.num_resources), dtype=bool)
        for i, r in enumerate(self.routes):
            inc[i, list(r)] = True
        return inc

    @property
    def class_loads(self) -> np.ndarray:
        """``rho_ij = lambda_i / mu_j`` on the route, zero elsewhere."""
        return np.where(self.incidence, self.arrival_rates[:, None] / self.service_rates[None, :], 0.0)

    @property
    def resource_loads(self) -> np.ndarray:
        return self.class_loads.sum(axis=0)

    def single_resource_params(self) -> SystemParams:
        """The equivalent one-server game (alpha = 1); only for J = 1."""
        if self.num_resources != 1:
            raise ValueError("reduction needs exactly one resource")
        return SystemParams.from_rates(self.arrival_rates, self.cost_rates, self.service_rates[0], 1.0)


def _gammas(spec: NetworkSpec, bids: np.ndarray) -> np.ndarray:
    inc = spec.incidence
    inv = np.where(inc, spec.arrival_rates[:, None] / np.where(inc, bids, 1.0), 0.0)
    return inv.sum(axis=0) / (spec.resource_loads * spec.service_rates)


def _slowness(spec: NetworkSpec, bids: np.ndarray) -> np.ndarray:
    """``(1 - rho_j) mu_j gamma_j`` per resource; sojourn is ``1 / (slowness * b)``."""
    return (1.0 - spec.resource_loads) * spec.service_rates * _gammas(spec, bids)


def v_ht_resource(spec: NetworkSpec, bids, j: int, beta: float) -> float:
    """Heavy-traffic sojourn at resource ``j`` for a job bidding ``beta`` there."""
    if not beta > 0:
        raise ValueError("bid must be positive")
    return float(1.0 / (_slowness(spec, np.asarray(bids, dtype=float))[j] * beta))


def inverse_bid(spec: NetworkSpec, bids, j: int, target_wait: float) -> tuple[float, float]:
    """Bid achieving sojourn ``target_wait`` at resource ``j``, and its derivative."""
    if not target_wait > 0:
        raise ValueError("target sojourn must be positive")
    b = 1.0 / (_slowness(spec, np.asarray(bids, dtype=float))[j] * target_wait)
    return float(b), float(-b / target_wait)


@dataclass(frozen=True)
class NetworkReport:
    bids: np.ndarray
    equalized_wait: np.ndarray
    bid_slopes: np.ndarray
    poa_bound: float | None
    iterations: int
    residual: float
    converged: bool

    def resource_waits(self, spec: NetworkSpec) -> np.ndarray:
        """Per-(class, resource) heavy-traffic sojourns at the reported bids, NaN off-route."""
        s = _slowness(spec, self.bids)
        return np.where(spec.incidence, 1.0 / (s[None, :] * np.where(spec.incidence, self.bids, 1.0)), np.nan)

    def slope_identity_residual(self, spec: NetworkSpec) -> np.ndarray:
        """``sum_j (-b'_ij) / c_i - 1`` per class."""
        return np.nansum(-self.bid_slopes, axis=1) / spec.cost_rates - 1.0

    def equalization_residual(self, spec: NetworkSpec) -> np.ndarray:
        w = self.resource_waits(spec)
        return (np.nanmax(w, axis=1) - np.nanmin(w, axis=1)) / self.equalized_wait


def _class_responses(spec: NetworkSpec, bids: np.ndarray, config: SolverConfig):
    inc = spec.incidence
    # sum over the route of 1/slowness_j: bids needed are D_i / Vbar in total
    d = (inc / _slowness(spec, bids)[None, :]).sum(axis=1)[:, None]
    c = spec.cost_rates[:, None]

    def fun(v):
        return c * v + d / v

    def deriv(v):
        return c - d / v ** 2

    lo, hi = config.bracket
    res = minimize_log(fun, lo, hi, spec.num_classes, deriv=deriv)
    return res.x


def solve_network_hte(spec: NetworkSpec, config: SolverConfig = SolverConfig(),
                      init=None, raise_on_failure: bool = False) -> NetworkReport:
    """Heavy-traffic equilibrium of the network game by best-response dynamics."""
    inc = spec.incidence
    bids = np.where(inc, 1.0, np.nan) if init is None else np.where(inc, np.asarray(init, dtype=float), np.nan)
    change, it, escaped = np.inf, 0, False
    vbar = np.full(spec.num_classes, np.nan)
    while it < config.max_iterations:
        it += 1
        vbar = _class_responses(spec, bids, config)
        s = _slowness(spec, bids)
        br = np.where(inc, 1.0 / (s[None, :] * vbar[:, None]), np.nan)
        new = bids + config.damping * (br - bids)
        change = float(np.nanmax(np.abs(new - bids) / bids))
        bids = new
        lo, hi = config.bracket
        escaped = np.any(inc & ~((bids >= lo) & (bids <= hi)))
        if escaped or change < config.br_tolerance:
            break
    # bids running off the bracket mean there is no interior fixed point
    converged = bool(change < config.br_tolerance and not escaped)
    # report against the final profile
    s = _slowness(spec, bids)
    waits = np.where(inc, 1.0 / (s[None, :] * np.where(inc, bids, 1.0)), np.nan)
    vbar = np.nanmax(waits, axis=1)
    slopes = np.where(inc, -bids / vbar[:, None], np.nan)
    report = NetworkReport(bids=bids, equalized_wait=vbar, bid_slopes=slopes, poa_bound=None,
                           iterations=it, residual=change, converged=converged)
    if np.all(spec.arrival_rates == spec.arrival_rates[0]):
        report = NetworkReport(**{**report.__dict__, "poa_bound": network_poa_bound(report, spec)})
    if not converged and raise_on_failure:
        raise ConvergenceError(f"network best-response dynamics did not converge in {it} sweeps", report)
    return report


def network_poa_bound(report: NetworkReport, spec: NetworkSpec) -> float:
    """Upper bound on the price of anarchy from the equilibrium bid slopes.

    ``(K-1) * max_j sqrt(max_i(-b'_ij) / min_i(-b'_ij)) + 1``; requires equal
    arrival rates across classes.
    """
    lam = spec.arrival_rates
    if not np.all(lam == lam[0]):
        raise HypothesisError("the network price-of-anarchy bound needs equal arrival rates")
    if spec.num_classes == 1:
        return 1.0
    neg = -report.bid_slopes
    ratios = np.nanmax(neg, axis=0) / np.nanmin(neg, axis=0)
    return float((spec.num_classes - 1) * np.sqrt(np.max(ratios)) + 1.0)


def network_from_dict(d: dict) -> NetworkSpec:
    return NetworkSpec(service_rates=d["service_rates"], arrival_rates=d["arrival_rates"],
                       cost_rates=d["cost_rates"], routes=d["routes"])


def best_response_direct(spec: NetworkSpec, bids, i: int, method: str = "Nelder-Mead") -> np.ndarray:
    """Direct multi-dimensional minimization of class i's objective.

    Minimizes ``c_i max_j V_j(x_j) + sum_j x_j`` over the route's bids in log
    coordinates.  Slow; kept as an independent check of the equalization
    shortcut.
    """
    from scipy.optimize import minimize

    bids = np.asarray(bids, dtype=float)
    route = list(spec.routes[i])
    s = _slowness(spec, bids)[route]
    c = spec.cost_rates[i]

    def obj(logx):
        x = np.exp(logx)
        return c * np.max(1.0 / (s * x)) + x.sum()

    x0 = np.log(bids[i, route])
    res = minimize(obj, x0, method=method, options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000})
    out = np.full(spec.num_resources, np.nan)
    out[route] = np.exp(res.x)
    return out
