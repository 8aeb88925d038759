"""Dense BFGS with a backtracking Armijo line search."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass
class BfgsResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    nit: int
    reason: str
    line_search_failures: int = 0


def backtracking(fun, x, f0, g0, direction, step=1.0, shrink=0.5, c1=1e-4, max_steps=50):
    """Largest step * shrink**k satisfying the Armijo condition, or None."""
    slope = float(g0 @ direction)
    for _ in range(max_steps):
        x_new = x + step * direction
        f_new = fun(x_new)
        if f_new <= f0 + c1 * step * slope:
            return step, x_new, f_new
        step *= shrink
    return None


def bfgs(fun: Callable[[np.ndarray], float], grad: Callable[[np.ndarray], np.ndarray],
         x0: np.ndarray, max_iter: int = 200, gtol: float = 1e-6, ftol: float = 0.0,
         callback: Callable | None = None, initial_step: float = 1.0, shrink: float = 0.5,
         c1: float = 1e-4, fun_and_grad: Callable | None = None,
         max_step: float | None = None, scale_first: bool = True) -> BfgsResult:
    """Minimize `fun` from x0.

    `callback(iteration, x, f, g)` is called for the start point (iteration 0) and
    after every accepted step. A non-descent direction resets the inverse Hessian to
    the identity; so does a failed line search, after which one steepest-descent
    retry is made before giving up. With `scale_first` the first update rescales the
    identity by y.s / y.y before applying the BFGS formula. `max_step` caps the length
    of the first trial step of every line search.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if fun_and_grad is None:
        def fun_and_grad(z):
            return fun(z), grad(z)

    x = np.array(x0, dtype=float)
    n = x.size
    f, g = fun_and_grad(x)
    hinv = np.eye(n)
    fresh = True
    failures = 0
    if callback:
        callback(0, x, f, g)
    reason = "max_iter"
    nit = 0
    for it in range(1, max_iter + 1):
        if np.linalg.norm(g) <= gtol:
            reason = "gradient"
            break
        p = -hinv @ g
        if g @ p >= 0:
            hinv, fresh = np.eye(n), True
            p = -g
        first = initial_step
        if max_step is not None:
            first = min(first, max_step / max(np.linalg.norm(p), 1e-300))
        found = backtracking(fun, x, f, g, p, first, shrink, c1)
        if found is None and not fresh:
            failures += 1
            hinv, fresh = np.eye(n), True
            p = -g
            found = backtracking(fun, x, f, g, p, initial_step, shrink, c1)
        if found is None:
            failures += 1
            reason = "line_search_failed"
            break
        step, x_new, _ = found
        f_new, g_new = fun_and_grad(x_new)
        s = x_new - x
        y = g_new - g
        ys = float(y @ s)
        if ys > 1e-12:
            if fresh and scale_first:
                hinv = np.eye(n) * (ys / float(y @ y))
            fresh = False
            rho = 1.0 / ys
            hy = hinv @ y
            hinv = (hinv - rho * (np.outer(s, hy) + np.outer(hy, s))
                    + (rho * rho * float(y @ hy) + rho) * np.outer(s, s))
        df = f - f_new
        x, f, g = x_new, f_new, g_new
        nit = it
        if callback:
            callback(it, x, f, g)
        if ftol > 0 and abs(df) <= ftol * max(1.0, abs(f)):
            reason = "energy"
            break
    return BfgsResult(x, f, g, nit, reason, failures)
