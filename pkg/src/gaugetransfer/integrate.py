"""Adaptive Dormand–Prince 5(4) stepping for linear complex systems.

Error is measured in a (optionally weighted) Euclidean norm relative to
the size of the whole state rather than componentwise, because the
lattice amplitudes routinely span dozens of orders of magnitude and only
their weighted total matters for the observables.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import IntegrationError

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


def dopri54(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    times: np.ndarray,
    rtol: float = 1e-10,
    atol: float = 0.0,
    weight: Callable[[float], np.ndarray] | None = None,
    first_step: float | None = None,
    max_steps: int = 5_000_000,
) -> tuple[np.ndarray, int]:
    """Integrate ``y' = rhs(t, y)`` and return the state at each of ``times``.

    Steps are clipped to land exactly on every output time. ``weight(t)``
    rescales components before norms are taken. Returns the stacked
    states and the number of accepted steps.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a non-empty 1-D array")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")

    y = np.array(y0, dtype=complex)
    out = np.empty((times.size, y.size), dtype=complex)
    out[0] = y
    t = float(times[0])

    def wnorm(t_, v):
        if weight is not None:
            v = v * weight(t_)
        return float(np.linalg.norm(v))

    span = times[-1] - times[0]
    k1 = rhs(t, y)
    if first_step is None:
        d0 = wnorm(t, y)
        d1 = wnorm(t, k1)
        h = 0.01 * d0 / d1 if d0 > 0 and d1 > 0 else 1e-6
        h = min(h, span) if span > 0 else h
    else:
        h = first_step

    steps = 0
    for i in range(1, times.size):
        t_target = times[i]
        while t < t_target:
            if steps >= max_steps:
                raise IntegrationError("step budget exhausted", t)
            h_try = min(h, t_target - t)
            last = h_try == t_target - t
            if h_try <= 16 * np.finfo(float).eps * max(abs(t), 1.0):
                raise IntegrationError("step size underflow", t)
            k2 = rhs(t + _C[1] * h_try, y + h_try * (_A[1][0] * k1))
            k3 = rhs(t + _C[2] * h_try, y + h_try * (_A[2][0] * k1 + _A[2][1] * k2))
            k4 = rhs(t + _C[3] * h_try, y + h_try * (_A[3][0] * k1 + _A[3][1] * k2 + _A[3][2] * k3))
            k5 = rhs(
                t + _C[4] * h_try,
                y + h_try * (_A[4][0] * k1 + _A[4][1] * k2 + _A[4][2] * k3 + _A[4][3] * k4),
            )
            k6 = rhs(
                t + h_try,
                y + h_try * (_A[5][0] * k1 + _A[5][1] * k2 + _A[5][2] * k3 + _A[5][3] * k4 + _A[5][4] * k5),
            )
            # the last tableau row is the 5th-order solution (first-same-as-last)
            y_new = y + h_try * (_B5[0] * k1 + _B5[2] * k3 + _B5[3] * k4 + _B5[4] * k5 + _B5[5] * k6)
            k7 = rhs(t + h_try, y_new)
            err_vec = h_try * (_E[0] * k1 + _E[2] * k3 + _E[3] * k4 + _E[4] * k5 + _E[5] * k6 + _E[6] * k7)
            t_new = t + h_try
            scale = atol + rtol * max(wnorm(t, y), wnorm(t_new, y_new))
            err = wnorm(t_new, err_vec) / scale if scale > 0 else np.inf
            if not np.isfinite(err):
                raise IntegrationError("non-finite error estimate", t)
            if err <= 1.0:
                t = t_target if last else t_new
                y = y_new
                k1 = k7
                steps += 1
                factor = _MAX_FACTOR if err == 0 else min(_MAX_FACTOR, _SAFETY * err ** -0.2)
                if not last or factor < 1.0:
                    h = h_try * factor
            else:
                h = h_try * max(_MIN_FACTOR, _SAFETY * err ** -0.2)
        out[i] = y
    return out, steps
