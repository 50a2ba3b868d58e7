# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled event loops; twin of ``_pycore.py``.

Same uniform stream, same arithmetic, same order of operations.  Do not
build with -ffast-math: results must match the pure-Python backend bit for
bit.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport log

cnp.import_array()

cdef enum:
    BLOCK = 8192


cdef class _Uniforms:
    cdef object rng
    cdef double[::1] buf
    cdef Py_ssize_t pos

    def __init__(self, rng):
        self.rng = rng
        self.buf = rng.random(BLOCK)
        self.pos = 0

    cdef inline double next(self):
        if self.pos == BLOCK:
            self.buf = self.rng.random(BLOCK)
            self.pos = 0
        cdef double u = self.buf[self.pos]
        self.pos += 1
        return u


cdef inline void _accumulate(double[::1] area, long[::1] n, Py_ssize_t K,
                             double t0, double t1, double warmup) noexcept:
    cdef double lo = t0 if t0 > warmup else warmup
    cdef double span
    cdef Py_ssize_t i
    if t1 > lo:
        span = t1 - lo
        for i in range(K):
            area[i] += n[i] * span


cdef class _JobTimes:
    """Per-class arrival-time buffers with O(1) removal by swap-with-last."""
    cdef double[:, ::1] t
    cdef Py_ssize_t cap

    def __init__(self, Py_ssize_t K, Py_ssize_t cap=256):
        self.cap = cap
        self.t = np.empty((K, cap))

    cdef void push(self, Py_ssize_t k, Py_ssize_t count, double value):
        if count == self.cap:
            arr = np.empty((self.t.shape[0], 2 * self.cap))
            arr[:, :self.cap] = np.asarray(self.t)
            self.t = arr
            self.cap *= 2
        self.t[k, count] = value

    cdef inline double take(self, Py_ssize_t k, Py_ssize_t idx, Py_ssize_t count) noexcept:
        cdef double v = self.t[k, idx]
        self.t[k, idx] = self.t[k, count - 1]
        return v


cdef double _probe(_Uniforms U, double[::1] lam, double total_lam, double mu,
                   double[::1] beta, long[::1] n0, double probe_beta):
    cdef Py_ssize_t K = lam.shape[0]
    cdef long[::1] n = np.array(n0, dtype=np.int64)
    cdef double rate = total_lam + mu
    cdef double elapsed = 0.0
    cdef double x, y, w, acc
    cdef Py_ssize_t i, k
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


def dps_run(lam, double mu, beta, double warmup, double horizon, rng,
            double probe_beta=1.0, double probe_rate=0.0):
    cdef double[::1] lam_v = np.ascontiguousarray(lam, dtype=np.float64)
    cdef double[::1] beta_v = np.ascontiguousarray(beta, dtype=np.float64)
    cdef Py_ssize_t K = lam_v.shape[0]
    cdef double total_lam = 0.0
    cdef Py_ssize_t i, k, idx
    for i in range(K):
        total_lam += lam_v[i]
    cdef _Uniforms U = _Uniforms(rng)
    cdef long[::1] n = np.zeros(K, dtype=np.int64)
    cdef _JobTimes jobs = _JobTimes(K)
    cdef double[::1] area = np.zeros(K)
    cdef double[::1] soj_sum = np.zeros(K)
    cdef long[::1] soj_cnt = np.zeros(K, dtype=np.int64)
    cdef double probe_sum = 0.0
    cdef long probe_cnt = 0
    cdef long events = 0
    cdef long busy_total = 0
    cdef double t = 0.0
    cdef double t_next, serve, rate, x, y, w, acc, t_arr
    while True:
        serve = mu if busy_total > 0 else 0.0
        rate = total_lam + serve + probe_rate
        t_next = t - log(1.0 - U.next()) / rate
        if t_next > horizon:
            _accumulate(area, n, K, t, horizon, warmup)
            break
        _accumulate(area, n, K, t, t_next, warmup)
        t = t_next
        events += 1
        x = U.next() * rate
        if x < total_lam:
            acc = 0.0
            k = K - 1
            for i in range(K):
                acc += lam_v[i]
                if x < acc:
                    k = i
                    break
            jobs.push(k, n[k], t)
            n[k] += 1
            busy_total += 1
        elif x < total_lam + serve:
            w = 0.0
            for i in range(K):
                w += n[i] * beta_v[i]
            y = (x - total_lam) / mu * w
            acc = 0.0
            k = -1
            for i in range(K):
                if n[i] > 0:
                    k = i
                    acc += n[i] * beta_v[i]
                    if y < acc:
                        break
            idx = <Py_ssize_t>(U.next() * n[k])
            if idx >= n[k]:
                idx = n[k] - 1
            t_arr = jobs.take(k, idx, n[k])
            n[k] -= 1
            busy_total -= 1
            if t_arr >= warmup:
                soj_sum[k] += t - t_arr
                soj_cnt[k] += 1
        else:
            if t >= warmup:
                probe_sum += _probe(U, lam_v, total_lam, mu, beta_v, n, probe_beta)
                probe_cnt += 1
    return dict(area=list(np.asarray(area)), soj_sum=list(np.asarray(soj_sum)),
                soj_cnt=[int(v) for v in np.asarray(soj_cnt)],
                probe_sum=probe_sum, probe_cnt=int(probe_cnt), events=int(events))


def priority_run(lam, double mu, double warmup, double horizon, rng):
    cdef double[::1] lam_v = np.ascontiguousarray(lam, dtype=np.float64)
    cdef Py_ssize_t K = lam_v.shape[0]
    cdef double total_lam = 0.0
    cdef Py_ssize_t i, k
    for i in range(K):
        total_lam += lam_v[i]
    cdef _Uniforms U = _Uniforms(rng)
    cdef long[::1] n = np.zeros(K, dtype=np.int64)
    cdef double[::1] area = np.zeros(K)
    cdef long events = 0
    cdef long busy_total = 0
    cdef double t = 0.0
    cdef double t_next, serve, rate, x, acc
    while True:
        serve = mu if busy_total > 0 else 0.0
        rate = total_lam + serve
        t_next = t - log(1.0 - U.next()) / rate
        if t_next > horizon:
            _accumulate(area, n, K, t, horizon, warmup)
            break
        _accumulate(area, n, K, t, t_next, warmup)
        t = t_next
        events += 1
        x = U.next() * rate
        if x < total_lam:
            acc = 0.0
            k = K - 1
            for i in range(K):
                acc += lam_v[i]
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
    return dict(area=list(np.asarray(area)), soj_sum=[0.0] * K, soj_cnt=[0] * K, events=int(events))


def ros_run(lam, double mu, beta, double warmup, double horizon, rng):
    cdef double[::1] lam_v = np.ascontiguousarray(lam, dtype=np.float64)
    cdef double[::1] beta_v = np.ascontiguousarray(beta, dtype=np.float64)
    cdef Py_ssize_t K = lam_v.shape[0]
    cdef double total_lam = 0.0
    cdef Py_ssize_t i, k, idx, m
    for i in range(K):
        total_lam += lam_v[i]
    cdef _Uniforms U = _Uniforms(rng)
    cdef long[::1] n = np.zeros(K, dtype=np.int64)
    cdef long[::1] nwait = np.zeros(K, dtype=np.int64)
    cdef _JobTimes waiting = _JobTimes(K)
    cdef double[::1] area = np.zeros(K)
    cdef double[::1] soj_sum = np.zeros(K)
    cdef long[::1] soj_cnt = np.zeros(K, dtype=np.int64)
    cdef long events = 0
    cdef Py_ssize_t cur = -1
    cdef double cur_arr = 0.0
    cdef double t = 0.0
    cdef double t_next, serve, rate, x, y, w, acc
    while True:
        serve = mu if cur >= 0 else 0.0
        rate = total_lam + serve
        t_next = t - log(1.0 - U.next()) / rate
        if t_next > horizon:
            _accumulate(area, n, K, t, horizon, warmup)
            break
        _accumulate(area, n, K, t, t_next, warmup)
        t = t_next
        events += 1
        x = U.next() * rate
        if x < total_lam:
            acc = 0.0
            k = K - 1
            for i in range(K):
                acc += lam_v[i]
                if x < acc:
                    k = i
                    break
            n[k] += 1
            if cur < 0:
                cur = k
                cur_arr = t
            else:
                waiting.push(k, nwait[k], t)
                nwait[k] += 1
        else:
            n[cur] -= 1
            if cur_arr >= warmup:
                soj_sum[cur] += t - cur_arr
                soj_cnt[cur] += 1
            w = 0.0
            for i in range(K):
                w += nwait[i] * beta_v[i]
            if w == 0.0:
                cur = -1
            else:
                y = U.next() * w
                acc = 0.0
                k = -1
                for i in range(K):
                    m = nwait[i]
                    if m > 0:
                        k = i
                        acc += m * beta_v[i]
                        if y < acc:
                            break
                m = nwait[k]
                idx = <Py_ssize_t>(U.next() * m)
                if idx >= m:
                    idx = m - 1
                cur = k
                cur_arr = waiting.take(k, idx, m)
                nwait[k] -= 1
    return dict(area=list(np.asarray(area)), soj_sum=list(np.asarray(soj_sum)),
                soj_cnt=[int(v) for v in np.asarray(soj_cnt)], events=int(events))
