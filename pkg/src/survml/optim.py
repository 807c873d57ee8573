"""Newton ascent with step halving, and plain gradient descent."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ConvergenceReport:
    iterations: int
    gradient_norm: float
    converged: bool
    monotone: bool = False
    trace: tuple = field(default=(), repr=False)


def newton_maximize(objective, gradient, hessian, x0, tol=1e-8, max_iter=100,
                    max_halvings=5, divergence_norm=50.0, step_tol=1e-4):
    """Maximize a concave function by Newton steps with step halving.

    A step is halved until the objective does not decrease. After
    ``max_halvings`` halvings without success the iteration falls back to a
    backtracked gradient-ascent step. Iteration stops when the infinity norm of
    the gradient drops below ``tol``, after ``max_iter`` steps, or when
    ``||x||`` exceeds ``divergence_norm`` (reported as ``monotone``: the
    objective keeps rising towards a supremum at infinity).

    Returns ``(x, report)``; ``report.trace`` lists the objective values of
    the accepted iterates, starting with ``x0``.
    """
    x = np.asarray(x0, dtype=float).copy()
    f = objective(x)
    trace = [f]
    g = gradient(x)
    monotone = False
    it = 0
    for it in range(1, max_iter + 1):
        if np.linalg.norm(x) > divergence_norm:
            monotone = True
            it -= 1
            break
        gnorm = float(np.max(np.abs(g))) if g.size else 0.0
        step = _newton_step(hessian(x), g)
        # A vanishing gradient only counts as convergence when the Newton step
        # vanishes too; a flat ridge towards infinity keeps O(1) steps.
        flat = step is not None and np.linalg.norm(step) >= step_tol * (1.0 + np.linalg.norm(x))
        if gnorm < tol and not flat:
            it -= 1
            break
        accepted = False
        if step is not None and step @ g > 0:
            t = 1.0
            for _ in range(max_halvings + 1):
                cand = x + t * step
                fc = objective(cand)
                if np.isfinite(fc) and fc >= f:
                    accepted = True
                    break
                t *= 0.5
        if not accepted:
            t = 1.0
            for _ in range(60):
                cand = x + t * g
                fc = objective(cand)
                if np.isfinite(fc) and fc >= f:
                    accepted = True
                    break
                t *= 0.5
        if not accepted or np.array_equal(cand, x):
            # no representable progress: on a flat ridge this is divergence
            monotone = bool(gnorm < tol and flat)
            break
        x, f = cand, fc
        trace.append(f)
        g = gradient(x)
    gnorm = float(np.max(np.abs(g))) if g.size else 0.0
    if np.linalg.norm(x) > divergence_norm:
        monotone = True
    report = ConvergenceReport(iterations=it, gradient_norm=gnorm, converged=gnorm < tol and not monotone,
                               monotone=monotone, trace=tuple(trace))
    return x, report


def _newton_step(H, g):
    try:
        step = np.linalg.solve(-H, g)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(step)):
        return None
    return step


@dataclass(frozen=True)
class DescentResult:
    x: np.ndarray
    trace: tuple
    iterations: int
    converged: bool
    diverged: bool


def gradient_descent(f, grad_f, x0, alpha, eps=1e-8, max_iter=100):
    """Fixed-step gradient descent ``x <- x - alpha * grad_f(x)``.

    Stops once ``||grad_f(x)|| <= eps``. Reaching ``max_iter`` without
    convergence emits a ``RuntimeWarning`` and sets ``diverged`` when the
    objective ended above its starting value. A non-finite objective raises
    ``FloatingPointError``.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    f0 = float(f(x))
    trace = [f0]
    for k in range(max_iter):
        g = np.atleast_1d(np.asarray(grad_f(x), dtype=float))
        if np.linalg.norm(g) <= eps:
            return DescentResult(x, tuple(trace), k, True, False)
        with np.errstate(over="ignore", invalid="ignore"):
            x = x - alpha * g
            fx = float(f(x))
        if not np.isfinite(fx):
            raise FloatingPointError(f"objective became non-finite at iteration {k + 1}")
        trace.append(fx)
    g = np.atleast_1d(np.asarray(grad_f(x), dtype=float))
    if np.linalg.norm(g) <= eps:
        return DescentResult(x, tuple(trace), max_iter, True, False)
    diverged = trace[-1] > trace[0]
    warnings.warn("gradient descent hit max_iter without converging", RuntimeWarning, stacklevel=2)
    return DescentResult(x, tuple(trace), max_iter, False, diverged)
