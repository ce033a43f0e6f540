"""Gradient descent with Armijo backtracking."""
from __future__ import annotations

import logging
import math

import numpy as np

from ..exceptions import NumericFailure

logger = logging.getLogger(__name__)

ARMIJO_C = 1e-4
SHRINK = 0.5
MAX_HALVINGS = 80


def gradient_descent(fun, x0, max_iter: int, tol: float, step0: float = 1.0):
    """Minimize ``fun`` starting from ``x0``.

    ``fun(x, grad)`` returns ``value`` or ``(value, gradient)``.  Each
    iteration restarts the line search from ``step0`` and halves the step
    until the Armijo condition holds.  Iteration stops when the relative
    decrease falls below ``tol``, the value reaches zero, no step gives a
    sufficient decrease, or ``max_iter`` is reached.

    Returns ``(x, trace, converged)`` where ``trace`` starts with the
    initial value and is non-increasing.
    """
    x = np.array(x0, dtype=float)
    f, g = fun(x, True)
    trace = [f]
    for it in range(max_iter):
        if not (math.isfinite(f) and np.all(np.isfinite(g))):
            raise NumericFailure(f"non-finite stress at iteration {it}")
        gg = float(g @ g)
        if f == 0.0 or gg == 0.0:
            return x, trace, True
        step = step0
        for _ in range(MAX_HALVINGS):
            trial = x - step * g
            f_trial = fun(trial, False)
            if math.isfinite(f_trial) and f_trial <= f - ARMIJO_C * step * gg:
                break
            step *= SHRINK
        else:
            logger.info("line search stalled at iteration %d (stress %.6g)", it, f)
            return x, trace, True
        decrease = (f - f_trial) / f
        x = trial
        f, g = fun(x, True)
        trace.append(f)
        if decrease < tol:
            return x, trace, True
    if not math.isfinite(f):
        raise NumericFailure(f"non-finite stress at iteration {max_iter}")
    return x, trace, False
