"""Throughput of the compiled and pure-Python simulation kernels.

    python benchmarks/bench_sim.py [--events N] [--repeat R]

Runs each kernel on the same seed, checks that both backends return
identical results, and prints events per second and the speedup.
"""
import argparse
import time

from dpsgame.sim import load_backend, replication_rng

CASES = {
    "dps": ("dps_run", dict(lam=[1.0, 1.0, 0.5], mu=3.5, beta=[3.0, 2.0, 1.0], warmup=10.0)),
    "dps+probe": ("dps_run", dict(lam=[1.0, 1.0, 0.5], mu=3.5, beta=[3.0, 2.0, 1.0], warmup=10.0,
                                  probe_beta=1.5, probe_rate=0.5)),
    "priority": ("priority_run", dict(lam=[1.0, 1.0, 0.5], mu=3.5, warmup=10.0)),
    "ros": ("ros_run", dict(lam=[1.0, 1.0, 0.5], mu=3.5, beta=[3.0, 2.0, 1.0], warmup=10.0)),
}


def _time(fn, kwargs, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(rng=replication_rng(2024, 0), **kwargs)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--events", type=int, default=200_000, help="approximate chain transitions per run")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    py = load_backend("python")
    try:
        cy = load_backend("cython")
    except ImportError:
        print("compiled backend not built; only timing the Python kernels")
        cy = None
    print(f"{'case':<10} {'python ev/s':>14} {'cython ev/s':>14} {'speedup':>8} identical")
    for name, (kernel, kw) in CASES.items():
        horizon = kw["warmup"] + args.events / (2.0 * sum(kw["lam"]))
        kwargs = dict(kw, horizon=horizon)
        tp, rp = _time(getattr(py, kernel), kwargs, args.repeat)
        line = f"{name:<10} {rp['events'] / tp:>14.0f}"
        if cy is not None:
            tc, rc = _time(getattr(cy, kernel), kwargs, args.repeat)
            line += f" {rc['events'] / tc:>14.0f} {tp / tc:>8.1f} {rp == rc}"
        print(line)


if __name__ == "__main__":
    main()
