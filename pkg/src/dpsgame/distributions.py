"""Distributions over class costs and arrival rates for the continuum game.

Two representations are supported: finite point-mass lists, integrated
exactly, and densities on a closed interval, integrated by adaptive
quadrature.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import QuadratureError


@dataclass(frozen=True)
class PointMasses:
    values: tuple
    weights: tuple = ()

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        w = np.ones_like(v) if not len(self.weights) else np.asarray(self.weights, dtype=float).ravel()
        if v.size == 0 or v.shape != w.shape or np.any(w < 0) or w.sum() <= 0:
            raise ValueError("point masses need matching values and nonnegative weights")
        object.__setattr__(self, "values", tuple(v))
        object.__setattr__(self, "weights", tuple(w / w.sum()))

    @property
    def support(self) -> tuple[float, float]:
        return min(self.values), max(self.values)

    def expect(self, fn: Callable[[np.ndarray], np.ndarray], tol: float = 1e-10) -> float:
        return float(np.dot(self.weights, fn(np.asarray(self.values))))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.choice(np.asarray(self.values), size=n, p=np.asarray(self.weights))


@dataclass(frozen=True)
class Density:
    """A distribution given by its density on ``[lo, hi]``.

    ``sampler`` is optional; without it :meth:`sample` inverts a tabulated CDF.
    """

    pdf: Callable[[float], float]
    lo: float
    hi: float
    sampler: Callable | None = None

    def __post_init__(self):
        if not 0 < self.lo <= self.hi < np.inf:
            raise ValueError("support must be a positive, bounded closed interval")

    @property
    def support(self) -> tuple[float, float]:
        return self.lo, self.hi

    def expect(self, fn, tol: float = 1e-10) -> float:
        if self.lo == self.hi:
            return float(fn(np.asarray(self.lo)))
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                val, err = integrate.quad(lambda x: float(fn(np.asarray(x))) * self.pdf(x),
                                          self.lo, self.hi, epsabs=tol, epsrel=0.0, limit=200)
            except integrate.IntegrationWarning as exc:
                raise QuadratureError(str(exc)) from exc
        if not np.isfinite(val) or err > max(tol, 1e-8 * abs(val)):
            raise QuadratureError(f"quadrature error estimate {err:.3e} exceeds tolerance")
        return float(val)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.sampler is not None:
            return np.asarray(self.sampler(rng, n), dtype=float)
        grid = np.linspace(self.lo, self.hi, 2049)
        dens = np.array([self.pdf(x) for x in grid])
        cdf = np.concatenate([[0.0], np.cumsum((dens[1:] + dens[:-1]) / 2 * np.diff(grid))])
        return np.interp(rng.random(n), cdf / cdf[-1], grid)


def uniform(lo: float, hi: float) -> Density:
    width = hi - lo
    return Density(pdf=lambda x: 1.0 / width, lo=lo, hi=hi,
                   sampler=lambda rng, n: rng.uniform(lo, hi, size=n))
