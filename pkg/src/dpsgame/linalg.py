"""Dense Gaussian elimination for the small systems that appear in DPS analysis."""
from __future__ import annotations

import numpy as np

from .errors import SingularSystemError


def gauss_solve(a, b, *, rcond: float = 1e-14) -> np.ndarray:
    """Solve ``a @ x = b`` by elimination with partial pivoting.

    ``b`` may be a vector or a matrix of right-hand sides.  Raises
    :class:`SingularSystemError` when a pivot falls below ``rcond`` times the
    largest absolute entry of ``a``.
    """
    m = np.array(a, dtype=float)
    rhs = np.array(b, dtype=float)
    n = m.shape[0]
    if m.shape != (n, n) or rhs.shape[0] != n:
        raise ValueError("shape mismatch")
    vec = rhs.ndim == 1
    if vec:
        rhs = rhs[:, None]
    scale = np.abs(m).max() if n else 0.0
    if scale == 0.0:
        raise SingularSystemError("zero matrix")
    for k in range(n):
        p = k + int(np.argmax(np.abs(m[k:, k])))
        if abs(m[p, k]) <= rcond * scale:
            raise SingularSystemError(f"pivot {k} is {m[p, k]:.3e}")
        if p != k:
            m[[k, p]] = m[[p, k]]
            rhs[[k, p]] = rhs[[p, k]]
        f = m[k + 1:, k] / m[k, k]
        m[k + 1:, k:] -= np.outer(f, m[k, k:])
        rhs[k + 1:] -= np.outer(f, rhs[k])
    x = np.empty_like(rhs)
    for k in range(n - 1, -1, -1):
        x[k] = (rhs[k] - m[k, k + 1:] @ x[k + 1:]) / m[k, k]
    return x[:, 0] if vec else x
