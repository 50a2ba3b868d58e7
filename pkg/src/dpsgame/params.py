"""Game instance and strategy-profile types for the K-class DPS queue."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InstabilityError


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SystemParams:
    """A priority-pricing game on a single DPS server.

    Classes are stored in canonical order, strictly decreasing cost rate.
    Build instances with :meth:`from_rates` when the input may be unsorted or
    contain equal costs; the direct constructor only validates.

    Attributes
    ----------
    arrival_rates : ndarray
        Poisson arrival rate of each class.
    cost_rates : ndarray
        Delay cost per unit time, strictly decreasing.
    service_rate : float
        Exponential service rate shared by every class.
    alpha : float
        Pricing exponent; priority ``b`` costs ``b**alpha``.
    class_index : tuple of int
        For each class passed to :meth:`from_rates`, the canonical class it
        ended up in.  Identity when constructed directly.
    """

    arrival_rates: np.ndarray
    cost_rates: np.ndarray
    service_rate: float
    alpha: float = 1.0
    class_index: tuple = field(default=(), compare=False)

    def __post_init__(self):
        lam = _frozen(self.arrival_rates).ravel()
        c = _frozen(self.cost_rates).ravel()
        if lam.size == 0 or lam.shape != c.shape:
            raise ValueError("arrival_rates and cost_rates must be nonempty and of equal length")
        if not (np.all(np.isfinite(lam)) and np.all(lam > 0)):
            raise ValueError("arrival rates must be positive and finite")
        if not (np.all(np.isfinite(c)) and np.all(c > 0)):
            raise ValueError("cost rates must be positive and finite")
        if np.any(np.diff(c) >= 0):
            raise ValueError("cost rates must be strictly decreasing; use SystemParams.from_rates")
        mu = float(self.service_rate)
        alpha = float(self.alpha)
        if not (np.isfinite(mu) and mu > 0):
            raise ValueError("service rate must be positive")
        if not (np.isfinite(alpha) and alpha > 0):
            raise ValueError("alpha must be positive")
        rho = lam.sum() / mu
        if rho >= 1.0:
            raise InstabilityError(f"offered load rho={rho:.6g} >= 1")
        object.__setattr__(self, "arrival_rates", lam)
        object.__setattr__(self, "cost_rates", c)
        object.__setattr__(self, "service_rate", mu)
        object.__setattr__(self, "alpha", alpha)
        if not self.class_index:
            object.__setattr__(self, "class_index", tuple(range(lam.size)))

    @classmethod
    def from_rates(cls, arrival_rates, cost_rates, service_rate=None, alpha=1.0, *, load=None):
        """Sort classes by descending cost and merge exact-cost ties.

        Exactly one of ``service_rate`` or ``load`` must be given; with
        ``load`` the service rate is ``sum(arrival_rates) / load``.
        """
        lam = np.asarray(arrival_rates, dtype=float).ravel()
        c = np.asarray(cost_rates, dtype=float).ravel()
        if lam.shape != c.shape:
            raise ValueError("arrival_rates and cost_rates must have equal length")
        if (service_rate is None) == (load is None):
            raise ValueError("give exactly one of service_rate or load")
        if load is not None:
            if not 0 < load < 1:
                raise InstabilityError(f"load must lie in (0, 1), got {load}")
            service_rate = lam.sum() / load
        order = np.argsort(-c, kind="stable")
        uniq_c, merged_lam, index = [], [], np.empty(c.size, dtype=int)
        for pos in order:
            if uniq_c and c[pos] == uniq_c[-1]:
                merged_lam[-1] += lam[pos]
            else:
                uniq_c.append(c[pos])
                merged_lam.append(lam[pos])
            index[pos] = len(uniq_c) - 1
        return cls(np.array(merged_lam), np.array(uniq_c), service_rate, alpha,
                   class_index=tuple(int(i) for i in index))

    @property
    def num_classes(self) -> int:
        return int(self.arrival_rates.size)

    @property
    def loads(self) -> np.ndarray:
        """Per-class loads rho_i = lambda_i / mu."""
        return _frozen(self.arrival_rates / self.service_rate)

    @property
    def load(self) -> float:
        return float(self.arrival_rates.sum() / self.service_rate)

    @property
    def total_arrival_rate(self) -> float:
        return float(self.arrival_rates.sum())

    def __eq__(self, other):
        if not isinstance(other, SystemParams):
            return NotImplemented
        return (np.array_equal(self.arrival_rates, other.arrival_rates)
                and np.array_equal(self.cost_rates, other.cost_rates)
                and self.service_rate == other.service_rate and self.alpha == other.alpha)

    def __hash__(self):
        return hash((self.arrival_rates.tobytes(), self.cost_rates.tobytes(), self.service_rate, self.alpha))

    def replace(self, **changes) -> "SystemParams":
        """Copy with some fields changed (canonical order is re-validated)."""
        kw = dict(arrival_rates=self.arrival_rates, cost_rates=self.cost_rates,
                  service_rate=self.service_rate, alpha=self.alpha)
        kw.update(changes)
        return SystemParams(**kw)

    def with_load(self, rho: float) -> "SystemParams":
        """Same arrival rates, service rate chosen so the load equals ``rho``."""
        return self.replace(service_rate=self.total_arrival_rate / rho)


def priority_vector(values: Sequence[float] | np.ndarray, num_classes: int | None = None) -> np.ndarray:
    """Validate a class priority vector and return it as a read-only array."""
    beta = _frozen(values).ravel()
    if num_classes is not None and beta.size != num_classes:
        raise ValueError(f"expected {num_classes} priorities, got {beta.size}")
    if beta.size == 0 or not (np.all(np.isfinite(beta)) and np.all(beta > 0)):
        raise ValueError("priorities must be positive and finite")
    return beta


# alias matching the domain vocabulary
PriorityVector = np.ndarray
