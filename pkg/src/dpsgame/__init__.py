"""Priority pricing on discriminatory processor sharing queues.

Exact and heavy-traffic equilibria of the priority-purchase game, their
economic metrics, a network extension, and a Monte Carlo simulator used as
an independent check.
"""
__version__ = "0.1.0"

from .errors import (BracketExhaustedError, ConvergenceError, DPSError, HypothesisError,
                     InstabilityError, QuadratureError, SingularSystemError)
from .params import SystemParams, priority_vector
from .results import EquilibriumResult
from .exact import (TaggedJobTime, WaitingProfile, closed_form_k1, solve_waiting_times,
                    tagged_job_time)
from .heavy import (LimitingGameSpec, StrategyFunction, deviation_check, hte_job_level,
                    hte_priorities, limiting_hte, v_ht, w_ht_class)
from .equilibrium import (SolverConfig, best_response_job, relative_error, solve_class_hte,
                          solve_class_ne, solve_job_ne)
from .metrics import EconomicReport, optimal_cost_cmu, poa_bounds, poa_report, revenue_hte, system_cost_hte
from .network import NetworkSpec, solve_network_hte

__all__ = [
    "__version__", "BracketExhaustedError", "ConvergenceError", "DPSError", "HypothesisError",
    "InstabilityError", "QuadratureError", "SingularSystemError", "SystemParams", "priority_vector",
    "EquilibriumResult", "TaggedJobTime", "WaitingProfile", "closed_form_k1", "solve_waiting_times",
    "tagged_job_time", "LimitingGameSpec", "StrategyFunction", "deviation_check", "hte_job_level",
    "hte_priorities", "limiting_hte", "v_ht", "w_ht_class", "SolverConfig", "best_response_job",
    "relative_error", "solve_class_hte", "solve_class_ne", "solve_job_ne", "EconomicReport",
    "optimal_cost_cmu", "poa_bounds", "poa_report", "revenue_hte", "system_cost_hte", "NetworkSpec",
    "solve_network_hte",
]
