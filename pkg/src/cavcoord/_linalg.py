"""Direct solver for the small dense systems produced by the trajectory planners."""

import numpy as np


class SingularSystem(ValueError):
    """Raised when elimination meets a pivot below tolerance."""


def _eliminate(a, b, tol):
    n = b.shape[0]
    scale = np.max(np.abs(a), axis=1)
    if np.any(scale == 0.0):
        raise SingularSystem("matrix has a zero row")

    for k in range(n - 1):
        p = k + int(np.argmax(np.abs(a[k:, k]) / scale[k:]))
        if abs(a[p, k]) <= tol * scale[p]:
            raise SingularSystem(f"pivot below tolerance at column {k}")
        if p != k:
            a[[k, p]] = a[[p, k]]
            b[[k, p]] = b[[p, k]]
            scale[[k, p]] = scale[[p, k]]
        factors = a[k + 1:, k] / a[k, k]
        a[k + 1:, k:] -= factors[:, None] * a[k, k:]
        b[k + 1:] -= factors * b[k]

    if abs(a[n - 1, n - 1]) <= tol * scale[n - 1]:
        raise SingularSystem(f"pivot below tolerance at column {n - 1}")

    x = np.empty(n)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - a[k, k + 1:] @ x[k + 1:]) / a[k, k]
    return x


def solve_linear(a, b, tol: float = 1e-14):
    """Solve a·x = b by Gaussian elimination with partial pivoting.

    Intended for the 2x2 and 4x4 boundary-condition systems; `a` and `b` are
    not modified. One step of iterative refinement tightens the residual, which
    matters for the poorly scaled cubic systems at large absolute times.
    Raises SingularSystem when the (scaled) pivot falls below tol; genuinely
    degenerate boundary systems (duplicate times) produce exact zero pivots,
    so ill-conditioned but regular systems still solve.
    """
    a0 = np.array(a, dtype=float)
    b0 = np.array(b, dtype=float)
    n = b0.shape[0]
    if a0.shape != (n, n):
        raise ValueError(f"shape mismatch: a is {a0.shape}, b has length {n}")

    x = _eliminate(a0.copy(), b0.copy(), tol)
    residual = b0 - a0 @ x
    if np.any(residual):
        x = x + _eliminate(a0.copy(), residual, tol)
    return x
