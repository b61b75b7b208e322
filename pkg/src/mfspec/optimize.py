"""Minimizers for the convex functions of q that define every spectrum."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
GRAD_TOL = 1e-9


@dataclass
class MinResult:
    x: np.ndarray
    fx: float
    iterations: int
    converged: bool


def golden_section(f: Callable[[float], float], a: float, b: float, tol: float, max_iter: int = 400):
    """Golden-section search for a unimodal f on [a, b].

    Returns (x, f(x), iterations).  Infinite values are allowed.
    """
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while b - a > tol and it < max_iter:
        it += 1
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    if fc <= fd:
        return c, fc, it
    return d, fd, it


def minimize_convex_1d(
    f: Callable[[float], float],
    df: Callable[[float], float],
    radius: float,
    grad_tol: float = GRAD_TOL,
) -> MinResult:
    """Golden-section search on [-radius, radius], then safeguarded Newton
    on the derivative until |f'| <= grad_tol."""
    x, fx, it = golden_section(f, -radius, radius, tol=1e-6)
    if not math.isfinite(fx):
        return MinResult(np.array([x]), fx, it, False)
    g = df(x)
    if abs(g) <= grad_tol:
        return MinResult(np.array([x]), fx, it, True)
    lo, hi = _bracket(df, x, g, radius)
    if lo is None:
        return MinResult(np.array([x]), fx, it, False)
    best_x, best_f = x, fx
    for _ in range(200):
        it += 1
        h = 1e-6 * (1.0 + abs(x))
        curv = (df(x + h) - df(x - h)) / (2 * h)
        step_ok = curv > 0 and math.isfinite(curv)
        xn = x - g / curv if step_ok else 0.5 * (lo + hi)
        if not lo < xn < hi:
            xn = 0.5 * (lo + hi)
        gn = df(xn)
        if not math.isfinite(gn):
            xn = 0.5 * (lo + hi)
            gn = df(xn)
        if gn > 0:
            hi = xn
        else:
            lo = xn
        x, g = xn, gn
        fx = f(x)
        if fx <= best_f:
            best_x, best_f = x, fx
        if abs(g) <= grad_tol or hi - lo <= 4e-16 * (1.0 + abs(x)):
            break
    if abs(g) > grad_tol and best_f < fx:
        x, fx = best_x, best_f
        g = df(x)
    return MinResult(np.array([x]), fx, it, abs(g) <= grad_tol)


def _bracket(df, x: float, g: float, radius: float):
    step = 1e-6 * (1.0 + abs(x))
    if g > 0:
        hi = x
        while True:
            lo = max(x - step, -radius)
            gl = df(lo)
            if math.isfinite(gl) and gl <= 0:
                return lo, hi
            if lo <= -radius:
                return None, None
            if math.isfinite(gl):
                hi = lo
            step *= 4
    lo = x
    while True:
        hi = min(x + step, radius)
        gh = df(hi)
        if math.isfinite(gh) and gh >= 0:
            return lo, hi
        if hi >= radius:
            return None, None
        if math.isfinite(gh):
            lo = hi
        step *= 4


def _project(x: np.ndarray, radius: float) -> np.ndarray:
    n = float(np.linalg.norm(x))
    return x if n <= radius else x * (radius / n)


def minimize_convex_nd(
    f: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    radius: float,
    grad_tol: float = GRAD_TOL,
    max_iter: int = 500,
) -> MinResult:
    """Descent with Armijo backtracking inside the ball of given radius.

    The descent direction is the gradient preconditioned by a finite
    difference Hessian when that is positive definite, and the plain
    negative gradient otherwise.
    """
    x = _project(np.asarray(x0, dtype=np.float64), radius)
    fx = f(x)
    g = grad(x)
    d = x.shape[0]
    it = 0
    while it < max_iter and float(np.linalg.norm(g)) > grad_tol:
        it += 1
        p = -g
        hess = _fd_hessian(grad, x)
        tau = 1e-10 * max(1.0, float(np.max(np.abs(np.diag(hess)))))
        try:
            chol = np.linalg.cholesky(hess + tau * np.eye(d))
            p_newton = -np.linalg.solve(chol.T, np.linalg.solve(chol, g))
            if float(g @ p_newton) < 0:
                p = p_newton
        except np.linalg.LinAlgError:
            pass
        t = 1.0
        accepted = False
        while t > 1e-20:
            xn = _project(x + t * p, radius)
            fn = f(xn)
            if fn <= fx + 1e-4 * float(g @ (xn - x)):
                accepted = True
                break
            t *= 0.5
        if not accepted:
            if p is not g and not np.allclose(p, -g):
                # retry once along the steepest direction
                p = -g
                t = 1.0
                while t > 1e-20:
                    xn = _project(x + t * p, radius)
                    fn = f(xn)
                    if fn <= fx + 1e-4 * float(g @ (xn - x)):
                        accepted = True
                        break
                    t *= 0.5
            if not accepted:
                break
        if np.array_equal(xn, x):
            break
        x, fx = xn, fn
        g = grad(x)
    return MinResult(x, fx, it, float(np.linalg.norm(g)) <= grad_tol)


def _fd_hessian(grad, x: np.ndarray) -> np.ndarray:
    d = x.shape[0]
    h = 1e-5 * (1.0 + float(np.max(np.abs(x))))
    hess = np.empty((d, d))
    for j in range(d):
        e = np.zeros(d)
        e[j] = h
        hess[:, j] = (grad(x + e) - grad(x - e)) / (2 * h)
    return 0.5 * (hess + hess.T)
