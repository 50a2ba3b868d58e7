from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

KINDS = ("job-NE", "class-NE", "job-HTE", "class-HTE", "limiting-HTE", "network-HTE")


@dataclass(frozen=True)
class EquilibriumResult:
    """A priority vector together with how it was obtained.

    ``residual`` is the sup-norm relative change of the last sweep for
    iterative solvers and the first-order-condition residual for closed
    forms.  ``heuristic`` marks results found by multistart search where the
    objective is not known to be convex (alpha < 1).  ``pinned`` lists the
    classes whose optimum sat on the search-bracket boundary.
    """

    priorities: np.ndarray
    kind: str
    iterations: int = 0
    residual: float = 0.0
    converged: bool = True
    heuristic: bool = False
    pinned: tuple = ()
    history: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown equilibrium kind {self.kind!r}")
        p = np.array(self.priorities, dtype=float)
        p.setflags(write=False)
        object.__setattr__(self, "priorities", p)
