"""Embedded Dormand-Prince 5(4) integrator with output at prescribed times."""

from __future__ import annotations

import numpy as np

from .errors import StiffnessError

_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def _step(fun, t, y, h, k0):
    k = [k0]
    for i in range(1, 7):
        yi = y + h * sum(a * kj for a, kj in zip(_A[i], k))
        k.append(fun(t + _C[i] * h, yi))
    y_new = y + h * sum(b * kj for b, kj in zip(_B5, k))
    err = h * sum(e * kj for e, kj in zip(_E, k))
    return y_new, err, k[-1]


def integrate(fun, y0, times, rtol=1e-10, atol=1e-12, h0=None, max_steps=2_000_000,
              norm="rms"):
    """Integrate ``y' = fun(t, y)`` and return ``y`` at each of ``times``.

    ``times[0]`` is the initial time and must be followed by strictly
    increasing values.  The step is clipped so every output time is hit
    exactly (no interpolation).  ``norm="max"`` controls every component
    separately, which suits batches of independent scalar problems.

    Raises
    ------
    StiffnessError
        If the accepted step would fall below ``1e-14 * (t_end - t_start)``.
    """
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    if norm not in ("rms", "max"):
        raise ValueError(f"unknown norm {norm!r}")
    y = np.array(y0, dtype=float)
    out = np.empty((len(times),) + y.shape)
    out[0] = y
    span = times[-1] - times[0]
    if span == 0:
        return out
    h_min = 1e-14 * span
    t = times[0]
    h = h0 if h0 is not None else min(1e-3 * span, 1e-2)
    k0 = fun(t, y)
    steps = 0
    for n in range(1, len(times)):
        target = times[n]
        while t < target:
            clip = t + h >= target
            hh = target - t if clip else h
            with np.errstate(over="ignore", invalid="ignore"):
                y_new, err, k_last = _step(fun, t, y, hh, k0)
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            ratio = np.abs(err / scale)
            enorm = float(ratio.max() if norm == "max" else np.sqrt(np.mean(ratio ** 2)))
            if np.isfinite(enorm) and enorm <= 1.0:
                t = target if clip else t + hh
                y, k0 = y_new, k_last
                fac = 5.0 if enorm == 0 else min(5.0, 0.9 * enorm ** -0.2)
                h = max(h, hh * fac) if clip else hh * fac
            else:
                fac = max(0.1, 0.9 * enorm ** -0.25) if np.isfinite(enorm) else 0.1
                h = hh * fac
                if h < h_min:
                    raise StiffnessError(f"step size {h:.3e} collapsed at t={t:.6g}")
            steps += 1
            if steps > max_steps:
                raise StiffnessError(f"exceeded {max_steps} steps before t={target:.6g}")
        out[n] = y
    return out
