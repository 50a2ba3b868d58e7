"""DPS simulated job by job with explicit remaining work.

Slow and kept only as an independent check of the jump-chain kernels: it
never uses the memoryless shortcut.  Each job carries its own exponential
work requirement and is served at rate ``beta_l / sum_m beta_m``.
"""
from __future__ import annotations

import numpy as np


def dps_residual_run(lam, mu, beta, warmup, horizon, rng: np.random.Generator) -> dict:
    """Same output layout as the jump-chain kernels (no probes)."""
    lam = np.asarray(lam, dtype=float)
    beta = np.asarray(beta, dtype=float)
    K = lam.size
    total = lam.sum()
    cls: list[int] = []
    work: list[float] = []
    born: list[float] = []
    area = np.zeros(K)
    soj_sum = np.zeros(K)
    soj_cnt = np.zeros(K, dtype=np.int64)
    n = np.zeros(K, dtype=np.int64)
    events = 0
    t = 0.0
    next_arrival = rng.exponential(1.0 / total)
    while True:
        wsum = float(np.dot(n, beta))
        if cls:
            w = np.asarray(work)
            share = beta[cls] / wsum
            finish = w / share
            j = int(np.argmin(finish))
            dt_done = float(finish[j])
        else:
            j, dt_done = -1, np.inf
        departure = dt_done < next_arrival - t
        dt = dt_done if departure else next_arrival - t
        t_next = t + dt
        stop = t_next > horizon
        lo, hi = max(t, warmup), min(t_next, horizon)
        if hi > lo:
            area += n * (hi - lo)
        if stop:
            break
        if cls:
            work = list(np.asarray(work) - dt * share)
        t = t_next
        events += 1
        if departure:
            k = cls.pop(j)
            work.pop(j)
            t0 = born.pop(j)
            n[k] -= 1
            if t0 >= warmup:
                soj_sum[k] += t - t0
                soj_cnt[k] += 1
        else:
            k = int(rng.choice(K, p=lam / total))
            cls.append(k)
            work.append(rng.exponential(1.0 / mu))
            born.append(t)
            n[k] += 1
            next_arrival = t + rng.exponential(1.0 / total)
    return dict(area=list(area), soj_sum=list(soj_sum), soj_cnt=[int(v) for v in soj_cnt], events=events)
