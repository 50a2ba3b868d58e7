"""Pure-Python event loops; reference twin of ``_ccore.pyx``.

Both backends draw uniforms in blocks from the same numpy Generator and
perform the same floating-point operations in the same order, so a given
seed yields bit-identical results whichever backend is loaded.  Keep the two
files in lockstep.

Every kernel returns a dict with:
``area``      time integral of the per-class job count over the window
``soj_sum``   summed sojourn of jobs that arrived and left inside the window
``soj_cnt``   number of such jobs
``events``    jump-chain transitions processed
"""
from math import log

BLOCK = 8192


class _Uniforms:
    __slots__ = ("rng", "buf", "pos")

    def __init__(self, rng):
        self.rng = rng
        self.buf = rng.random(BLOCK).tolist()
        self.pos = 0

    def next(self):
        if self.pos == BLOCK:
            self.buf = self.rng.random(BLOCK).tolist()
            self.pos = 0
        u = self.buf[self.pos]
        self.pos += 1
        return u


def _accumulate(area, n, t0, t1, warmup):
    lo = t0 if t0 > warmup else warmup
    if t1 > lo:
        span = t1 - lo
        for i in range(len(n)):
            area[i] += n[i] * span


def dps_run(lam, mu, beta, warmup, horizon, rng, probe_beta=1.0, probe_rate=0.0):
    """Discriminatory processor sharing.

    Class-i completions occur at rate ``mu * n_i beta_i / sum_j n_j beta_j``;
    the departing class-i job is uniform among those present (memoryless
    service).  With ``probe_rate > 0``, probe instants form an extra Poisson
    stream; at each, a copy of the current state is run forward with an
    added job of priority ``probe_beta`` until that job leaves, and its
    sojourn is recorded.  The main chain is untouched by probes.
    """
    lam = [float(x) for x in lam]
    beta = [float(x) for x in beta]
    K = len(lam)
    total_lam = 0.0
    for i in range(K):
        total_lam += lam[i]
    U = _Uniforms(rng)
    n = [0] * K
    jobs = [[] for _ in range(K)]
    area = [0.0] * K
    soj_sum = [0.0] * K
    soj_cnt = [0] * K
    probe_sum = 0.0
    probe_cnt = 0
    events = 0
    busy_total = 0
    t = 0.0
    while True:
        serve = mu if busy_total > 0 else 0.0
        rate = total_lam + serve + probe_rate
        t_next = t - log(1.0 - U.next()) / rate
        if t_next > horizon:
            _accumulate(area, n, t, horizon, warmup)
            break
        _accumulate(area, n, t, t_next, warmup)
        t = t_next
        events += 1
        x = U.next() * rate
        if x < total_lam:
            acc = 0.0
            k = K - 1
            for i in range(K):
                acc += lam[i]
                if x < acc:
                    k = i
                    break
            n[k] += 1
            busy_total += 1
            jobs[k].append(t)
        elif x < total_lam + serve:
            w = 0.0
            for i in range(K):
                w += n[i] * beta[i]
            y = (x - total_lam) / mu * w
            acc = 0.0
            k = -1
            for i in range(K):
                if n[i] > 0:
                    k = i
                    acc += n[i] * beta[i]
                    if y < acc:
                        break
            lst = jobs[k]
            idx = int(U.next() * n[k])
            if idx >= n[k]:
                idx = n[k] - 1
            t_arr = lst[idx]
            lst[idx] = lst[-1]
            lst.pop()
            n[k] -= 1
            busy_total -= 1
            if t_arr >= warmup:
                soj_sum[k] += t - t_arr
                soj_cnt[k] += 1
        else:
            if t >= warmup:
                probe_sum += _probe(U, lam, total_lam, mu, beta, n, probe_beta)
                probe_cnt += 1
    return dict(area=area, soj_sum=soj_sum, soj_cnt=soj_cnt,
                probe_sum=probe_sum, probe_cnt=probe_cnt, events=events)


def _probe(U, lam, total_lam, mu, beta, n0, probe_beta):
    K = len(lam)
    n = list(n0)
    rate = total_lam + mu
    elapsed = 0.0
    while True:
        elapsed -= log(1.0 - U.next()) / rate
        x = U.next() * rate
        if x < total_lam:
            acc = 0.0
            k = K - 1
            for i in range(K):
                acc += lam[i]
                if x < acc:
                    k = i
                    break
            n[k] += 1
        else:
            w = probe_beta
            for i in range(K):
                w += n[i] * beta[i]
            y = (x - total_lam) / mu * w
            if y < probe_beta:
                return elapsed
            acc = probe_beta
            k = -1
            for i in range(K):
                if n[i] > 0:
                    k = i
                    acc += n[i] * beta[i]
                    if y < acc:
                        break
            if k < 0:
                return elapsed
            n[k] -= 1


def priority_run(lam, mu, warmup, horizon, rng):
    """Preemptive-resume priority, class 0 highest."""
    lam = [float(x) for x in lam]
    K = len(lam)
    total_lam = 0.0
    for i in range(K):
        total_lam += lam[i]
    U = _Uniforms(rng)
    n = [0] * K
    area = [0.0] * K
    events = 0
    busy_total = 0
    t = 0.0
    while True:
        serve = mu if busy_total > 0 else 0.0
        rate = total_lam + serve
        t_next = t - log(1.0 - U.next()) / rate
        if t_next > horizon:
            _accumulate(area, n, t, horizon, warmup)
            break
        _accumulate(area, n, t, t_next, warmup)
        t = t_next
        events += 1
        x = U.next() * rate
        if x < total_lam:
            acc = 0.0
            k = K - 1
            for i in range(K):
                acc += lam[i]
                if x < acc:
                    k = i
                    break
            n[k] += 1
            busy_total += 1
        else:
            for i in range(K):
                if n[i] > 0:
                    n[i] -= 1
                    break
            busy_total -= 1
    return dict(area=area, soj_sum=[0.0] * K, soj_cnt=[0] * K, events=events)


def ros_run(lam, mu, beta, warmup, horizon, rng):
    """Non-preemptive random order of service weighted by priority.

    On each completion the next job is drawn with probability proportional
    to its priority; arrivals never interrupt the job in service.
    """
    lam = [float(x) for x in lam]
    beta = [float(x) for x in beta]
    K = len(lam)
    total_lam = 0.0
    for i in range(K):
        total_lam += lam[i]
    U = _Uniforms(rng)
    n = [0] * K          # jobs present, including the one in service
    waiting = [[] for _ in range(K)]
    area = [0.0] * K
    soj_sum = [0.0] * K
    soj_cnt = [0] * K
    events = 0
    cur = -1
    cur_arr = 0.0
    t = 0.0
    while True:
        serve = mu if cur >= 0 else 0.0
        rate = total_lam + serve
        t_next = t - log(1.0 - U.next()) / rate
        if t_next > horizon:
            _accumulate(area, n, t, horizon, warmup)
            break
        _accumulate(area, n, t, t_next, warmup)
        t = t_next
        events += 1
        x = U.next() * rate
        if x < total_lam:
            acc = 0.0
            k = K - 1
            for i in range(K):
                acc += lam[i]
                if x < acc:
                    k = i
                    break
            n[k] += 1
            if cur < 0:
                cur = k
                cur_arr = t
            else:
                waiting[k].append(t)
        else:
            n[cur] -= 1
            if cur_arr >= warmup:
                soj_sum[cur] += t - cur_arr
                soj_cnt[cur] += 1
            w = 0.0
            for i in range(K):
                w += len(waiting[i]) * beta[i]
            if w == 0.0:
                cur = -1
            else:
                y = U.next() * w
                acc = 0.0
                k = -1
                for i in range(K):
                    m = len(waiting[i])
                    if m > 0:
                        k = i
                        acc += m * beta[i]
                        if y < acc:
                            break
                lst = waiting[k]
                m = len(lst)
                idx = int(U.next() * m)
                if idx >= m:
                    idx = m - 1
                cur = k
                cur_arr = lst[idx]
                lst[idx] = lst[-1]
                lst.pop()
    return dict(area=area, soj_sum=soj_sum, soj_cnt=soj_cnt, events=events)
