"""Exact steady-state sojourn times for the K-class DPS queue.

Class waiting times solve a K x K linear system; the sojourn time of a
tagged job with an arbitrary priority is then linear in the mean queue
lengths.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import gauss_solve
from .params import SystemParams, priority_vector


@dataclass(frozen=True)
class WaitingProfile:
    """Per-class mean sojourn times and the matching mean queue lengths."""

    W: np.ndarray
    EN: np.ndarray

    @property
    def total_jobs(self) -> float:
        return float(self.EN.sum())


@dataclass(frozen=True)
class TaggedJobTime:
    """Sojourn time of a tagged job and the coefficients that produce it.

    ``V = U0 + sum(U * EN)`` where ``U[i] = beta_i / (beta_i + beta) * U0``.
    """

    V: float
    U0: float
    U: np.ndarray


def waiting_time_system(params: SystemParams, priorities) -> tuple[np.ndarray, np.ndarray]:
    """Matrix and right-hand side of the DPS waiting-time equations.

    Row k reads ``mu W_k - sum_i a_ki (W_k + W_i) = 1`` with
    ``a_ki = lambda_i beta_i / (beta_i + beta_k)``.
    """
    beta = priority_vector(priorities, params.num_classes)
    lam = params.arrival_rates
    a = lam[None, :] * beta[None, :] / (beta[None, :] + beta[:, None])
    m = np.diag(params.service_rate - a.sum(axis=1)) - a
    return m, np.ones(params.num_classes)


def solve_waiting_times(params: SystemParams, priorities) -> WaitingProfile:
    m, rhs = waiting_time_system(params, priorities)
    w = gauss_solve(m, rhs)
    w.setflags(write=False)
    en = params.arrival_rates * w
    en.setflags(write=False)
    return WaitingProfile(W=w, EN=en)


def tagged_coefficients(params: SystemParams, priorities, beta: float) -> tuple[float, np.ndarray]:
    """``(U0, U)`` for a tagged job of priority ``beta``."""
    if not beta > 0:
        raise ValueError("tagged priority must be positive")
    b = priority_vector(priorities, params.num_classes)
    share = b / (b + beta)
    u0 = 1.0 / (params.service_rate - float(np.dot(params.arrival_rates, share)))
    return u0, share * u0


def tagged_job_time(params: SystemParams, priorities, beta: float,
                    profile: WaitingProfile | None = None) -> TaggedJobTime:
    """Expected sojourn of a job with priority ``beta`` entering in steady state.

    The class priority vector is unaffected by the tagged job.  Pass a
    precomputed ``profile`` to skip the O(K^3) solve.
    """
    if profile is None:
        profile = solve_waiting_times(params, priorities)
    u0, u = tagged_coefficients(params, priorities, beta)
    u.setflags(write=False)
    return TaggedJobTime(V=float(u0 + np.dot(u, profile.EN)), U0=u0, U=u)


def tagged_time_and_slope(params: SystemParams, priorities, profile: WaitingProfile, betas):
    """Vectorized ``V(b)`` and ``dV/db`` for an array of tagged priorities.

    Uses ``V = f/g`` with ``f = 1 + sum EN_i s_i``, ``g = mu - sum lam_i s_i``
    and ``s_i = beta_i / (beta_i + b)``.
    """
    bv = np.asarray(priorities, dtype=float)
    x = np.asarray(betas, dtype=float)
    denom = bv[None, :] + x.reshape(-1, 1)
    s = bv[None, :] / denom
    ds = -bv[None, :] / denom ** 2
    lam = params.arrival_rates
    f = 1.0 + s @ profile.EN
    g = params.service_rate - s @ lam
    df = ds @ profile.EN
    dg = -(ds @ lam)
    v = f / g
    dv = (df * g - f * dg) / g ** 2
    return v.reshape(x.shape), dv.reshape(x.shape)


def closed_form_k1(params: SystemParams, class_priority: float, beta: float) -> float:
    """Tagged sojourn time in a single-class system, in closed form."""
    if params.num_classes != 1:
        raise ValueError(f"closed form needs K=1, got K={params.num_classes}")
    rho = params.load
    base = 1.0 / (params.service_rate * (1.0 - rho))
    return base * (beta * (1.0 - rho) + class_priority) / (class_priority * (1.0 - rho) + beta)


def own_priority_slope(params: SystemParams, priorities, i: int,
                       profile: WaitingProfile | None = None) -> float:
    """dW_i / d(beta_i) when class i moves its whole priority.

    Differentiates the linear system implicitly: ``dW = -A^{-1} (dA W)``.
    Used by the class-level solver, where a class's own choice enters the
    system it waits in.
    """
    beta = priority_vector(priorities, params.num_classes)
    m, _ = waiting_time_system(params, beta)
    if profile is None:
        profile = WaitingProfile(W=gauss_solve(m, np.ones(beta.size)), EN=None)
    lam = params.arrival_rates
    da = np.zeros((beta.size, beta.size))
    # a_ki depends on beta_i through both numerator and denominator
    da[:, i] = lam[i] * beta / (beta[i] + beta) ** 2
    # a_im depends on beta_i through the denominator only
    da[i, :] = -lam * beta / (beta + beta[i]) ** 2
    da[i, i] = 0.0
    dm = np.diag(-da.sum(axis=1)) - da
    dw = -gauss_solve(m, dm @ profile.W)
    return float(dw[i])
