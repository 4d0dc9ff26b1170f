"""BFGS ascent with backtracking line search, plus a central-difference
gradient used for checks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass
class AscentResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    iterations: int
    converged: bool
    message: str


def bfgs_maximize(
    fun: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray],
    x0,
    gtol: float = 1e-8,
    max_iter: int = 500,
    max_step: float = 5.0,
) -> AscentResult:
    """Maximize ``fun`` from ``x0``.

    Stops when the infinity norm of the gradient drops below ``gtol``.
    Steps longer than ``max_step`` (Euclidean) are shortened, which keeps
    log-parameterized problems from jumping to overflow on the first move.

    Near the optimum the achievable increase can fall below the rounding
    noise of ``fun``.  A step whose change in ``fun`` is within that noise
    is therefore accepted when it shrinks the gradient, so convergence is
    still judged on the (more accurate) gradient alone.
    """
    x = np.array(x0, dtype=float)
    fx = fun(x)
    g = grad(x)
    if not np.isfinite(fx) or not np.all(np.isfinite(g)):
        return AscentResult(x, fx, g, 0, False, "non-finite objective at start")
    n = x.size
    H = np.eye(n)
    first = True
    for it in range(max_iter):
        if np.max(np.abs(g)) < gtol:
            return AscentResult(x, fx, g, it, True, "gradient below tolerance")
        p = H @ g
        slope = p @ g
        if slope <= 0 or not np.isfinite(slope):
            H = np.eye(n)
            p = g.copy()
            slope = p @ g
        norm = np.linalg.norm(p)
        if norm > max_step:
            p *= max_step / norm
            slope = p @ g
        t = 1.0
        noise = 1e-12 * (1.0 + abs(fx))
        g_new = None
        while True:
            x_new = x + t * p
            f_new = fun(x_new)
            if np.isfinite(f_new):
                if f_new - fx > noise and f_new >= fx + 1e-4 * t * slope:
                    break
                if abs(f_new - fx) <= noise:
                    g_new = grad(x_new)
                    if np.max(np.abs(g_new)) < np.max(np.abs(g)):
                        break
                    g_new = None
            t *= 0.5
            if t < 1e-16:
                return AscentResult(x, fx, g, it, False, "line search made no progress")
        if g_new is None:
            g_new = grad(x_new)
        s = x_new - x
        y = g - g_new  # curvature pair for minimizing -fun
        sy = s @ y
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            if first:
                H *= sy / (y @ y)
                first = False
            rho = 1.0 / sy
            V = np.eye(n) - rho * np.outer(s, y)
            H = V @ H @ V.T + rho * np.outer(s, s)
        x, fx, g = x_new, f_new, g_new
    converged = np.max(np.abs(g)) < gtol
    return AscentResult(x, fx, g, max_iter, converged, "iteration limit reached")


def central_difference(fun: Callable[[np.ndarray], float], x, h: float = 1e-5) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        out[k] = (fun(x + e) - fun(x - e)) / (2.0 * h)
    return out
