"""Experiment drivers behind the command-line runner.

Each ``run_*`` function takes a :class:`~dpsgame.config.ScenarioConfig` and
returns ``(columns, rows)`` ready for CSV output.  Rows are plain dicts;
vectors are stored as numpy arrays and flattened by the writer.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from .config import ConfigError, ScenarioConfig, parse_distribution
from .equilibrium import (SolverConfig, class_hte_foc_residuals, relative_error, solve_class_hte,
                          solve_class_ne, solve_job_ne)
from .exact import solve_waiting_times, tagged_job_time
from .heavy import LimitingGameSpec, hte_foc_residuals, hte_priorities, limiting_hte, w_ht_class
from .metrics import cmu_queue_lengths, optimal_cost_cmu, poa_report
from .network import network_from_dict, solve_network_hte
from .params import SystemParams
from .sim import (simulate_dps, simulate_ros, simulate_strict_priority,
                  simulate_tagged)

TIE_NUDGE = 1e-9


def sample_rng(seed: int, point: int, sample: int) -> np.random.Generator:
    """Independent stream for one (sweep point, sample) pair."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(point, sample))))


def sample_instance(rng: np.random.Generator, num_classes: int, c0: float, lam0: float,
                    alpha: float, load: float) -> SystemParams:
    """Random instance with ``c ~ U[0,10] + c0`` and ``lambda ~ U[0,10] + lam0``.

    Costs are sorted descending (each keeps its own arrival rate); an exact
    tie is broken by raising the earlier cost by the next uniform draw times
    ``1e-9``.
    """
    K = int(num_classes)
    c = rng.uniform(0.0, 10.0, K) + c0
    lam = rng.uniform(0.0, 10.0, K) + lam0
    order = np.argsort(-c, kind="stable")
    c, lam = c[order], lam[order]
    for i in range(K - 2, -1, -1):
        while c[i] <= c[i + 1]:
            c[i] = c[i + 1] + rng.uniform() * TIE_NUDGE * c[i + 1]
    mu = lam.sum() / load
    return SystemParams(lam, c, mu, alpha)


# ---------------------------------------------------------------------------
# compare: heavy-traffic closed form against the exact equilibrium


COMPARE_COLUMNS = ("kind", "point", "axis", "num_classes", "c0", "lam0", "alpha", "load", "sample",
                   "converged", "iterations", "relative_error", "beta_ht", "beta_ne",
                   "count", "converged_count", "min", "q1", "median", "q3", "max")


def _compare_one(args):
    seed, point, sample, pt, solver = args
    rng = sample_rng(seed, point, sample)
    p = sample_instance(rng, pt["num_classes"], pt["c0"], pt["lam0"], pt["alpha"], pt["load"])
    ht = hte_priorities(p)
    ne = solve_job_ne(p, solver)
    return dict(kind="sample", point=point, sample=sample, converged=ne.converged,
                iterations=ne.iterations, relative_error=relative_error(ht, ne.priorities),
                beta_ht=ht, beta_ne=np.asarray(ne.priorities))


def boxplot_stats(values) -> dict:
    """Min, quartiles and max with linear-interpolation quantiles."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return dict(min=None, q1=None, median=None, q3=None, max=None)
    q = np.quantile(v, [0.0, 0.25, 0.5, 0.75, 1.0], method="linear")
    return dict(zip(("min", "q1", "median", "q3", "max"), (float(x) for x in q)))


def _map(fn, jobs, threads: int):
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
    return [fn(j) for j in jobs]


def run_compare(config: ScenarioConfig, threads: int = 1):
    """Relative error of the heavy-traffic equilibrium on random instances.

    One ``sample`` row per instance and one ``summary`` row per sweep point
    with boxplot statistics of the relative error over converged samples.
    """
    solver = config.solver()
    points = config.sweep_points()
    jobs = [(config.seed, k, s, pt, solver)
            for k, pt in enumerate(points) for s in range(int(pt["sample_count"]))]
    results = sorted(_map(_compare_one, jobs, threads), key=lambda r: (r["point"], r["sample"]))
    rows = []
    for k, pt in enumerate(points):
        desc = {key: pt[key] for key in ("axis", "num_classes", "c0", "lam0", "alpha", "load")}
        mine = [r for r in results if r["point"] == k]
        rows.extend(dict(desc, **r) for r in mine)
        good = [r["relative_error"] for r in mine if r["converged"]]
        rows.append(dict(desc, kind="summary", point=k, count=len(mine), converged_count=len(good),
                         **boxplot_stats(good)))
    return COMPARE_COLUMNS, rows


def summary_medians(rows, axis: str) -> list[tuple[float, float]]:
    """``(axis value, median)`` pairs from the summary rows of one sweep axis."""
    return [(r[axis], r["median"]) for r in rows if r["kind"] == "summary" and r["axis"] == axis]


# ---------------------------------------------------------------------------
# metrics


METRIC_COLUMNS = ("instance", "num_classes", "alpha", "load", "system_cost", "revenue", "optimal_cost",
                  "poa", "poa_bound_tight", "poa_bound_loose", "identity_residual")


def _instances_or_samples(config: ScenarioConfig) -> list[SystemParams]:
    out = [p for p, _ in config.instances()]
    if "sampling" in config.raw:
        s = config.sampling()
        out += [sample_instance(sample_rng(config.seed, 0, i), s["num_classes"], s["c0"], s["lam0"],
                                s["alpha"], s["load"]) for i in range(int(s["sample_count"]))]
    return out


def run_metrics(config: ScenarioConfig, threads: int = 1):
    rows = []
    for n, p in enumerate(_instances_or_samples(config)):
        rep = poa_report(p)
        rows.append(dict(instance=n, num_classes=p.num_classes, alpha=p.alpha, load=p.load,
                         identity_residual=rep.system_cost - p.alpha * rep.revenue, **rep.as_dict()))
    return METRIC_COLUMNS, rows


# ---------------------------------------------------------------------------
# simulation against analytic values


SIM_COLUMNS = ("instance", "policy", "quantity", "class", "analytic", "reference", "mean", "std_error",
               "replications", "z")


def _sim_row(n, policy, quantity, cls, analytic, reference, est):
    return dict(instance=n, policy=policy, quantity=quantity, **{"class": cls}, analytic=analytic,
                reference=reference, mean=est.mean, std_error=est.std_error,
                replications=est.replications, z=est.z(analytic))


def run_simulate(config: ScenarioConfig, threads: int = 1):
    """Simulated estimates beside their analytic targets.

    ``reference`` names the analytic value: ``exact`` for the DPS linear
    system, ``cmu`` for the priority-queue formula and ``heavy-traffic`` for
    the ROS comparison.  Priorities default to the heavy-traffic equilibrium.
    """
    sim = config.sim()
    if threads > 1 and sim.workers == 1:
        sim = replace(sim, workers=threads)
    tagged = [float(b) for b in config.raw.get("tagged", [])]
    rows = []
    for n, (p, pri) in enumerate(config.instances()):
        beta = hte_priorities(p) if pri is None else np.asarray(pri, dtype=float)
        if sim.policy == "DPS":
            prof = solve_waiting_times(p, beta)
            est = simulate_dps(p, beta, sim)
            for i in range(p.num_classes):
                rows.append(_sim_row(n, "DPS", "W", i + 1, prof.W[i], "exact", est.W[i]))
            for i in range(p.num_classes):
                rows.append(_sim_row(n, "DPS", "E[N]", i + 1, prof.EN[i], "exact", est.EN[i]))
            for b in tagged:
                v = simulate_tagged(p, beta, b, sim)
                rows.append(_sim_row(n, "DPS", f"V({b:.17g})", "", tagged_job_time(p, beta, b, prof).V,
                                     "exact", v))
        elif sim.policy == "strict-priority":
            est = simulate_strict_priority(p, sim)
            rows.append(_sim_row(n, sim.policy, "C_opt", "", optimal_cost_cmu(p), "cmu", est.optimal_cost))
            for i, q in enumerate(cmu_queue_lengths(p)):
                rows.append(_sim_row(n, sim.policy, "E[N]", i + 1, q, "cmu", est.EN[i]))
        else:
            est = simulate_ros(p, beta, sim)
            for i in range(p.num_classes):
                rows.append(_sim_row(n, "ROS", "W", i + 1, w_ht_class(p, beta, i), "heavy-traffic",
                                     est.W[i]))
    return SIM_COLUMNS, rows


# ---------------------------------------------------------------------------
# single-instance solvers


SOLVE_COLUMNS = ("instance", "class", "cost_rate", "arrival_rate", "priority", "kind", "converged",
                 "iterations", "residual", "pinned", "heuristic")


def _solve_rows(n, p, res, per_class_residual=None):
    rows = []
    for i in range(p.num_classes):
        r = res.residual if per_class_residual is None else float(per_class_residual[i])
        rows.append({"instance": n, "class": i + 1, "cost_rate": p.cost_rates[i],
                     "arrival_rate": p.arrival_rates[i], "priority": res.priorities[i], "kind": res.kind,
                     "converged": res.converged, "iterations": res.iterations, "residual": r,
                     "pinned": i in res.pinned, "heuristic": res.heuristic})
    return rows


def run_solver(config: ScenarioConfig, threads: int = 1):
    """``hte``, ``exact-ne``, ``class-ne`` or ``class-hte`` on every instance.

    Iterative solvers raise :class:`~dpsgame.errors.ConvergenceError` when
    the dynamics fail to settle.
    """
    from .heavy import hte_job_level

    solver = config.solver()
    rows = []
    for n, p in enumerate(_instances_or_samples(config)):
        if config.mode == "hte":
            res = hte_job_level(p)
            rows += _solve_rows(n, p, res, np.abs(hte_foc_residuals(p, res.priorities)))
            continue
        fn = {"exact-ne": solve_job_ne, "class-ne": solve_class_ne, "class-hte": solve_class_hte}[config.mode]
        res = fn(p, solver, raise_on_failure=True)
        extra = np.abs(class_hte_foc_residuals(p, res.priorities)) if config.mode == "class-hte" else None
        rows += _solve_rows(n, p, res, extra)
    return SOLVE_COLUMNS, rows


# ---------------------------------------------------------------------------
# continuum game


LIMIT_COLUMNS = ("kind", "num_classes", "cost", "priority", "max_abs_gap", "converged")


def run_limiting(config: ScenarioConfig, threads: int = 1):
    """Strategy function on a cost grid and its distance to sampled finite games."""
    d = config.raw.get("limiting")
    if not d:
        raise ConfigError("limiting mode needs a 'limiting' section")
    try:
        spec = LimitingGameSpec(cost=parse_distribution(d["cost"]), arrival=parse_distribution(d["arrival"]),
                                service_rate=float(d["service_rate"]))
    except KeyError as exc:
        raise ConfigError(f"limiting section is missing {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    alpha = float(d.get("alpha", 1.0))
    B = limiting_hte(spec, alpha)
    rows = [dict(kind="strategy", cost=float(c), priority=float(B(c)))
            for c in d.get("cost_grid", [])]
    counts = [int(k) for k in d.get("class_counts", [])]
    if counts:
        rng = sample_rng(config.seed, 0, 0)
        for K, (p, c) in zip(counts, spec.finite_games(counts, rng, alpha)):
            res = solve_class_hte(p, config.solver(), raise_on_failure=True)
            rows.append(dict(kind="finite-class-hte", num_classes=K, converged=res.converged,
                             max_abs_gap=float(np.max(np.abs(res.priorities - B(c))))))
            rows.append(dict(kind="finite-job-hte", num_classes=K, converged=True,
                             max_abs_gap=float(np.max(np.abs(hte_priorities(p) - B(c))))))
    return LIMIT_COLUMNS, rows


def limiting_gaps(spec: LimitingGameSpec, alpha: float, class_counts, seed: int,
                  solver: SolverConfig = SolverConfig()) -> dict[str, list[float]]:
    """``max_i |beta_i^K - B(c_i)|`` along nested sampled games.

    Keys ``class`` (finite class-level heavy-traffic equilibrium) and
    ``job`` (job-level closed form of each finite system).
    """
    B = limiting_hte(spec, alpha)
    out = {"class": [], "job": []}
    for p, c in spec.finite_games(class_counts, sample_rng(seed, 0, 0), alpha):
        out["class"].append(float(np.max(np.abs(solve_class_hte(p, solver, raise_on_failure=True).priorities - B(c)))))
        out["job"].append(float(np.max(np.abs(hte_priorities(p) - B(c)))))
    return out


# ---------------------------------------------------------------------------
# network market


NETWORK_COLUMNS = ("class", "resource", "bid", "wait", "bid_slope", "equalized_wait", "converged",
                   "iterations", "residual", "poa_bound")


def run_network(config: ScenarioConfig, threads: int = 1):
    d = config.raw.get("network")
    if not d:
        raise ConfigError("network mode needs a 'network' section")
    try:
        spec = network_from_dict(d)
    except KeyError as exc:
        raise ConfigError(f"network section is missing {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rep = solve_network_hte(spec, config.solver(), raise_on_failure=True)
    waits = rep.resource_waits(spec)
    rows = []
    for i, route in enumerate(spec.routes):
        for j in route:
            rows.append(dict(**{"class": i + 1}, resource=j + 1, bid=rep.bids[i, j], wait=waits[i, j],
                             bid_slope=rep.bid_slopes[i, j], equalized_wait=rep.equalized_wait[i],
                             converged=rep.converged, iterations=rep.iterations, residual=rep.residual,
                             poa_bound=rep.poa_bound))
    return NETWORK_COLUMNS, rows


# ---------------------------------------------------------------------------
# divergence probe


DIVERGENCE_COLUMNS = ("step", "ratio", "cost_rates", "arrival_rates", "converged", "iterations",
                      "relative_error", "increasing_so_far")


def divergence_instance(ratio: float, load: float, alpha: float) -> SystemParams:
    """Two classes with cost and arrival ratios both equal to ``ratio``.

    A ratio of one would merge the classes, so the first cost is nudged up
    by the sampler's tie-break factor to keep two classes.
    """
    c1 = ratio if ratio != 1.0 else 1.0 + TIE_NUDGE
    return SystemParams.from_rates([ratio, 1.0], [c1, 1.0], alpha=alpha, load=load)


def run_divergence_probe(config: ScenarioConfig, threads: int = 1):
    """Relative error along a sequence of increasingly unbalanced two-class systems.

    Non-converged steps are flagged and skipped when checking monotonicity.
    The last row's ``increasing_so_far`` tells whether the error grew at
    every converged step.
    """
    d = config.raw.get("divergence", {})
    ratios = [float(r) for r in d.get("ratios", [1, 10, 100, 1000])]
    if not ratios or any(r < 1 for r in ratios):
        raise ConfigError("ratios must be a nonempty list of values >= 1")
    load, alpha = float(d.get("load", 0.9)), float(d.get("alpha", 1.0))
    solver = config.solver()
    rows, last, ok = [], -np.inf, True
    for step, r in enumerate(ratios):
        try:
            p = divergence_instance(r, load, alpha)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        ne = solve_job_ne(p, solver)
        err = relative_error(hte_priorities(p), ne.priorities)
        if ne.converged:
            ok = ok and err > last
            last = err
        rows.append(dict(step=step, ratio=r, cost_rates=p.cost_rates, arrival_rates=p.arrival_rates,
                         converged=ne.converged, iterations=ne.iterations, relative_error=err,
                         increasing_so_far=ok))
    return DIVERGENCE_COLUMNS, rows


RUNNERS = {
    "compare": run_compare, "metrics": run_metrics, "simulate": run_simulate,
    "hte": run_solver, "exact-ne": run_solver, "class-ne": run_solver, "class-hte": run_solver,
    "limiting": run_limiting, "network": run_network, "divergence-probe": run_divergence_probe,
}
