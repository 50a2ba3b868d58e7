"""Best-response dynamics for exact and class-level equilibria.

Each sweep computes every class's best response against the profile from
the start of the sweep (a synchronous, Jacobi-style update), so the outcome
does not depend on class order.  Inner problems are one-dimensional and are
solved in a single batch per sweep.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BracketExhaustedError, ConvergenceError
from .exact import own_priority_slope, solve_waiting_times, tagged_time_and_slope
from .heavy import hte_priorities
from .linalg import gauss_solve
from .exact import waiting_time_system
from .optimize import minimize_log
from .params import SystemParams, priority_vector
from .results import EquilibriumResult


@dataclass(frozen=True)
class SolverConfig:
    br_tolerance: float = 1e-10
    max_iterations: int = 10_000
    bracket: tuple = (1e-8, 1e8)
    inner_tolerance: float = 1e-12
    damping: float = 1.0
    multistart_count: int = 8

    def __post_init__(self):
        lo, hi = self.bracket
        if not 0 < lo < hi:
            raise ValueError("bracket must satisfy 0 < lo < hi")
        if not (self.br_tolerance > 0 and self.inner_tolerance > 0):
            raise ValueError("tolerances must be positive")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if self.max_iterations < 1 or self.multistart_count < 1:
            raise ValueError("iteration and multistart counts must be positive")

    def starts_for(self, alpha: float) -> int:
        return 1 if alpha >= 1 else self.multistart_count


# ---------------------------------------------------------------------------
# best responses


def _job_best_responses(params: SystemParams, beta: np.ndarray, config: SolverConfig):
    prof = solve_waiting_times(params, beta)
    c = params.cost_rates[:, None]
    a = params.alpha

    def fun(x):
        v, _ = tagged_time_and_slope(params, beta, prof, x)
        return c * v + x ** a

    def deriv(x):
        _, dv = tagged_time_and_slope(params, beta, prof, x)
        return c * dv + a * x ** (a - 1.0)

    lo, hi = config.bracket
    res = minimize_log(fun, lo, hi, params.num_classes, deriv=deriv, starts=config.starts_for(a))
    return res.x, res.pinned


def best_response_job(params: SystemParams, priorities, i: int,
                      config: SolverConfig = SolverConfig()) -> float:
    """Job-level best response of a class-``i`` job to the class profile.

    The responding job is infinitesimal: its priority does not enter the
    class vector, only its own sojourn time.
    """
    beta = priority_vector(priorities, params.num_classes)
    x, pinned = _job_best_responses(params, beta, config)
    if pinned[i]:
        raise BracketExhaustedError(f"best response of class {i} pinned at {x[i]:.3e}", x[i])
    return float(x[i])


def _class_w_i(params: SystemParams, beta: np.ndarray, i: int, b: float) -> tuple[float, float]:
    trial = beta.copy()
    trial[i] = b
    m, rhs = waiting_time_system(params, trial)
    w = gauss_solve(m, rhs)
    return float(w[i]), trial


def _class_best_responses(params: SystemParams, beta: np.ndarray, config: SolverConfig):
    a = params.alpha
    cost = params.cost_rates

    def fun(x):
        out = np.empty_like(x)
        for r in range(x.shape[0]):
            for s in range(x.shape[1]):
                w, _ = _class_w_i(params, beta, r, x[r, s])
                out[r, s] = cost[r] * w + x[r, s] ** a
        return out

    def deriv(x):
        out = np.empty_like(x)
        for r in range(x.shape[0]):
            for s in range(x.shape[1]):
                trial = beta.copy()
                trial[r] = x[r, s]
                out[r, s] = cost[r] * own_priority_slope(params, trial, r) + a * x[r, s] ** (a - 1.0)
        return out

    lo, hi = config.bracket
    res = minimize_log(fun, lo, hi, params.num_classes, deriv=deriv, starts=config.starts_for(a))
    return res.x, res.pinned


def class_hte_objective(params: SystemParams, priorities, i: int, b):
    """``c_i W_i^HT + b**alpha`` with class i's own priority set to ``b``."""
    beta = priority_vector(priorities, params.num_classes)
    lam = params.arrival_rates
    others = float(np.dot(lam, 1.0 / beta) - lam[i] / beta[i])
    kappa = params.cost_rates[i] * params.total_arrival_rate / ((1.0 - params.load) * params.service_rate)
    b = np.asarray(b, dtype=float)
    return kappa / (b * others + lam[i]) + b ** params.alpha


def _class_hte_terms(params: SystemParams, beta: np.ndarray):
    lam = params.arrival_rates
    others = np.dot(lam, 1.0 / beta) - lam / beta
    kappa = params.cost_rates * params.total_arrival_rate / ((1.0 - params.load) * params.service_rate)
    return kappa, others


def class_hte_foc_residuals(params: SystemParams, priorities) -> np.ndarray:
    """Relative residual of each class-level heavy-traffic first-order condition."""
    beta = priority_vector(priorities, params.num_classes)
    kappa, others = _class_hte_terms(params, beta)
    lam, a = params.arrival_rates, params.alpha
    marginal_delay = kappa * others / (beta * others + lam) ** 2
    return marginal_delay / (a * beta ** (a - 1.0)) - 1.0


def _class_hte_best_responses(params: SystemParams, beta: np.ndarray, config: SolverConfig):
    kappa, others = _class_hte_terms(params, beta)
    kappa, others = kappa[:, None], others[:, None]
    lam, a = params.arrival_rates[:, None], params.alpha

    def fun(x):
        return kappa / (x * others + lam) + x ** a

    def deriv(x):
        return -kappa * others / (x * others + lam) ** 2 + a * x ** (a - 1.0)

    lo, hi = config.bracket
    res = minimize_log(fun, lo, hi, params.num_classes, deriv=deriv, starts=config.starts_for(a))
    return res.x, res.pinned


# ---------------------------------------------------------------------------
# dynamics


def _iterate(step, params: SystemParams, init, config: SolverConfig, kind: str,
             raise_on_failure: bool) -> EquilibriumResult:
    beta = priority_vector(init, params.num_classes).copy()
    history = []
    change, pinned = np.inf, np.zeros(params.num_classes, dtype=bool)
    it = 0
    while it < config.max_iterations:
        it += 1
        br, pinned = step(params, beta, config)
        new = beta + config.damping * (br - beta)
        change = float(np.max(np.abs(new - beta) / beta))
        beta = new
        history.append(change)
        if change < config.br_tolerance:
            break
    converged = change < config.br_tolerance
    result = EquilibriumResult(priorities=beta, kind=kind, iterations=it, residual=change,
                               converged=converged, heuristic=params.alpha < 1,
                               pinned=tuple(int(i) for i in np.flatnonzero(pinned)),
                               history=tuple(history))
    if not converged and raise_on_failure:
        raise ConvergenceError(f"{kind} best-response dynamics did not converge in {it} sweeps "
                               f"(last change {change:.3e})", result)
    return result


def solve_job_ne(params: SystemParams, config: SolverConfig = SolverConfig(), init=None,
                 raise_on_failure: bool = False) -> EquilibriumResult:
    """Symmetric job-level Nash equilibrium by best-response dynamics.

    Starts from the closed-form heavy-traffic equilibrium unless ``init`` is
    given.
    """
    start = hte_priorities(params) if init is None else init
    return _iterate(_job_best_responses, params, start, config, "job-NE", raise_on_failure)


def solve_class_ne(params: SystemParams, config: SolverConfig = SolverConfig(), init=None,
                   raise_on_failure: bool = False) -> EquilibriumResult:
    """Class-level Nash equilibrium; each class re-solves the linear system for its own move."""
    start = hte_priorities(params) if init is None else init
    return _iterate(_class_best_responses, params, start, config, "class-NE", raise_on_failure)


def solve_class_hte(params: SystemParams, config: SolverConfig = SolverConfig(), init=None,
                    raise_on_failure: bool = False) -> EquilibriumResult:
    """Finite-K class-level heavy-traffic equilibrium.

    With K=1 the heavy-traffic delay no longer depends on the class's own
    priority, the optimum runs to the bracket floor and the class is listed
    in ``pinned``.
    """
    start = hte_priorities(params) if init is None else init
    res = _iterate(_class_hte_best_responses, params, start, config, "class-HTE", False)
    if not res.converged and params.num_classes > 1:
        res = _class_hte_root(params, res, start, config)
    if not res.converged and raise_on_failure:
        raise ConvergenceError(f"class-HTE best-response dynamics did not converge in {res.iterations} "
                               f"sweeps (last change {res.residual:.3e})", res)
    return res


def _class_hte_root(params: SystemParams, failed: EquilibriumResult, start,
                    config: SolverConfig) -> EquilibriumResult:
    """Solve the first-order system directly when best responses cycle.

    Sweeps can orbit an equilibrium that repels them.  A root of the
    first-order conditions is accepted only if every coordinate is then
    confirmed as a best response by the batched search.
    """
    from scipy.optimize import root

    lo, hi = config.bracket
    for x0 in (np.log(priority_vector(start, params.num_classes)), np.log(failed.priorities)):
        sol = root(lambda u: class_hte_foc_residuals(params, np.exp(u)), x0, method="hybr",
                   options={"xtol": 1e-14})
        beta = np.exp(sol.x)
        if not (np.all(np.isfinite(beta)) and np.all((beta > lo) & (beta < hi))):
            continue
        br, pinned = _class_hte_best_responses(params, beta, config)
        gap = float(np.max(np.abs(br - beta) / beta))
        if gap < config.br_tolerance * 100 and not pinned.any():
            return EquilibriumResult(priorities=beta, kind="class-HTE",
                                     iterations=failed.iterations + int(sol.nfev), residual=gap,
                                     converged=True, heuristic=params.alpha < 1, pinned=(),
                                     history=failed.history)
    return failed


def verify_best_responses(params: SystemParams, result: EquilibriumResult,
                          config: SolverConfig = SolverConfig()) -> np.ndarray:
    """Relative gap between each coordinate and a fresh best response to the profile."""
    step = {"job-NE": _job_best_responses, "class-NE": _class_best_responses,
            "class-HTE": _class_hte_best_responses}[result.kind]
    br, _ = step(params, np.array(result.priorities), config)
    return np.abs(br - result.priorities) / result.priorities


def relative_error(beta_ht, beta_ne) -> float:
    """``max_i (beta_ht_i - beta_ne_i) / beta_ne_i`` (signed, as a worst overshoot)."""
    ht, ne = np.asarray(beta_ht), np.asarray(beta_ne)
    return float(np.max((ht - ne) / ne))
