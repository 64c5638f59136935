"""Finite-difference derivatives on arbitrary 1-D grids (Fornberg weights)."""

from __future__ import annotations

import numpy as np


def fornberg_weights(x0: float, x: np.ndarray, m: int) -> np.ndarray:
    """Weights w with sum w_k f(x_k) ~ f^{(m)}(x0).

    Fornberg, "Generation of finite difference formulas on arbitrarily
    spaced grids", Math. Comp. 51 (1988).
    """
    n = len(x)
    c = np.zeros((n, m + 1))
    c1, c4 = 1.0, x[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5 = 1.0, c4
        c4 = x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


def derivative(y, x, order: int = 1) -> np.ndarray:
    """Derivative of sampled ``y`` at every grid point.

    Five-point centred stencils in the interior (4th order on uniform grids);
    one-sided ``4 + order`` point stencils near the ends.
    """
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    n = len(x)
    edge = 4 + order
    if n < edge:
        raise ValueError(f"need at least {edge} points for a 4th-order stencil, got {n}")
    out = np.empty(n)
    for i in range(n):
        if 2 <= i <= n - 3:
            idx = np.arange(i - 2, i + 3)
        elif i < 2:
            idx = np.arange(0, edge)
        else:
            idx = np.arange(n - edge, n)
        # differencing against y[i] makes constants exact despite weight rounding
        out[i] = fornberg_weights(x[i], x[idx], order) @ (y[idx] - y[i])
    return out
