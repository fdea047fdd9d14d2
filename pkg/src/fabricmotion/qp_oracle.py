"""Brute-force reference solver for the SVM dual, used to check SMO.

Minimises ``1/2 a'Qa - sum(a)`` over ``0 <= a <= C, y'a = 0`` by
accelerated projected gradient with an exact Euclidean projection.
"""
from __future__ import annotations

import numba
import numpy as np

from .svm import rbf_kernel


@numba.njit(cache=True)
def _project(v, y, c):
    # find lam with sum_i y_i clip(v_i - lam y_i, 0, c) = 0; the sum is nonincreasing in lam
    lo, hi = -1.0, 1.0
    for _ in range(100):
        s = 0.0
        for t in range(v.size):
            s += y[t] * min(max(v[t] - lo * y[t], 0.0), c)
        if s >= 0:
            break
        lo *= 2.0
    for _ in range(100):
        s = 0.0
        for t in range(v.size):
            s += y[t] * min(max(v[t] - hi * y[t], 0.0), c)
        if s <= 0:
            break
        hi *= 2.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        s = 0.0
        for t in range(v.size):
            s += y[t] * min(max(v[t] - mid * y[t], 0.0), c)
        if s > 0:
            lo = mid
        else:
            hi = mid
    lam = 0.5 * (lo + hi)
    out = np.empty_like(v)
    for t in range(v.size):
        out[t] = min(max(v[t] - lam * y[t], 0.0), c)
    return out


@numba.njit(cache=True)
def _fista(q, y, c, step, iters):
    n = y.size
    a = np.zeros(n)
    z = a.copy()
    tk = 1.0
    for _ in range(iters):
        g = q @ z - 1.0
        a_new = _project(z - step * g, y, c)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * tk * tk))
        z = a_new + ((tk - 1.0) / t_new) * (a_new - a)
        a = a_new
        tk = t_new
    return a


def solve_dual(x, labels, c=1.0, gamma=1.0, iters=100_000):
    """Return ``(alpha, bias)`` of the RBF C-SVM on ``x`` with labels in {0, 1}."""
    x = np.asarray(x, dtype=float)
    y = np.where(np.asarray(labels) == 1, 1.0, -1.0)
    k = rbf_kernel(x, x, gamma)
    q = (y[:, None] * y[None, :]) * k
    step = 1.0 / np.linalg.eigvalsh(q).max()
    alpha = _fista(q, y, float(c), step, iters)
    g = k @ (alpha * y)
    tol = 1e-6 * c
    free = (alpha > tol) & (alpha < c - tol)
    if free.any():
        bias = float(np.mean(y[free] - g[free]))
    else:
        # bias interval from bound multipliers: upper points need y f <= 1, zero ones need y f >= 1
        r = y - g
        lower = np.concatenate([r[(alpha <= tol) & (y > 0)], r[(alpha >= c - tol) & (y < 0)]])
        upper = np.concatenate([r[(alpha <= tol) & (y < 0)], r[(alpha >= c - tol) & (y > 0)]])
        lo = lower.max() if lower.size else -np.inf
        hi = upper.min() if upper.size else np.inf
        bias = float(0.5 * (lo + hi)) if np.isfinite(lo) and np.isfinite(hi) else float(lo if np.isfinite(lo) else hi)
    return alpha, bias


def decision_values(x_train, labels, alpha, bias, gamma, rows):
    y = np.where(np.asarray(labels) == 1, 1.0, -1.0)
    return rbf_kernel(rows, x_train, gamma) @ (alpha * y) + bias
