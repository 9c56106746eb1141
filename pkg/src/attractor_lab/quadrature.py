"""Adaptive Simpson quadrature for vector-valued integrands."""

from __future__ import annotations

import numpy as np

from .errors import ConvergenceError


def adaptive_simpson(fun, a: float, b: float, tol: float = 1e-7, max_depth: int = 40):
    """Integrate ``fun`` over ``[a, b]`` to absolute tolerance ``tol``.

    ``fun`` maps a float to an ndarray.  Each panel is accepted once the
    difference between one and two Simpson panels, divided by 15, is below
    the panel's share of ``tol``; the accepted value carries the Richardson
    correction.  Returns ``(integral, n_evaluations)``.

    Raises
    ------
    ConvergenceError
        If a panel is still unresolved after ``max_depth`` bisections.
    """
    fa, fm, fb = fun(a), fun(0.5 * (a + b)), fun(b)
    evals = 3
    whole = (b - a) / 6 * (fa + 4 * fm + fb)
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    total = np.zeros_like(whole)
    while stack:
        a0, b0, f0, f2, f4, s, eps, depth = stack.pop()
        m = 0.5 * (a0 + b0)
        f1, f3 = fun(0.5 * (a0 + m)), fun(0.5 * (m + b0))
        evals += 2
        left = (m - a0) / 6 * (f0 + 4 * f1 + f2)
        right = (b0 - m) / 6 * (f2 + 4 * f3 + f4)
        diff = left + right - s
        if np.max(np.abs(diff)) <= 15 * eps:
            total = total + left + right + diff / 15
            continue
        if depth >= max_depth:
            raise ConvergenceError(
                f"quadrature did not reach {tol:.1e} on [{a0:.6g}, {b0:.6g}]")
        stack.append((a0, m, f0, f1, f2, left, 0.5 * eps, depth + 1))
        stack.append((m, b0, f2, f3, f4, right, 0.5 * eps, depth + 1))
    return total, evals
