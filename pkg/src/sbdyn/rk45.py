"""Adaptive Dormand-Prince 5(4) integrator with explicit evaluation accounting.

A hand-rolled embedded Runge-Kutta pair is used instead of a black-box solver
so that every right-hand-side evaluation (including those inside rejected
steps) is counted and the accept/reject history is available to callers that
bill each evaluation as a batch of circuit executions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ContractViolationError

# Dormand-Prince 5(4) tableau (FSAL: last stage of an accepted step is the
# first stage of the next).
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_E = _B5 - _B4

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_ORDER_EXP = -1.0 / 5.0


@dataclass
class StepRecord:
    """One attempted step: proposed size, outcome, and scaled error norm."""

    t: float
    h: float
    accepted: bool
    error_norm: float


@dataclass
class IntegrationResult:
    ts: np.ndarray
    ys: np.ndarray
    nfev: int
    n_accepted: int
    n_rejected: int
    steps: list[StepRecord] = field(repr=False, default_factory=list)


def integrate_rk45(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    t_span: tuple[float, float],
    y0: np.ndarray,
    rtol: float,
    atol: float,
    first_step: float,
    max_step: float,
    callback: Callable[[float, np.ndarray], None] | None = None,
) -> IntegrationResult:
    """Integrate y' = rhs(t, y) over ``t_span`` with the Dormand-Prince 5(4) pair.

    Error control matches the usual embedded-pair scheme: the RMS of the
    component-wise error scaled by ``atol + rtol * |y|`` must be below 1 to
    accept a step, and the next step is scaled by ``0.9 * norm**(-1/5)``
    clamped to [0.2, 10].  ``callback`` fires at every accepted step
    (including the initial point).
    """
    t0, t_final = t_span
    if t_final <= t0:
        raise ContractViolationError("integration span must be forward in time")
    if first_step <= 0 or max_step <= 0:
        raise ContractViolationError("step sizes must be positive")
    y = np.array(y0, dtype=float)
    t = t0
    h = min(first_step, max_step, t_final - t0)

    k = np.empty((7, y.size))
    k[0] = rhs(t, y)
    nfev = 1
    n_accepted = 0
    n_rejected = 0
    ts = [t]
    ys = [y.copy()]
    steps: list[StepRecord] = []
    if callback is not None:
        callback(t, y)

    while t < t_final - 1e-14 * max(1.0, abs(t_final)):
        h = min(h, max_step, t_final - t)
        for i in range(1, 7):
            yi = y + h * (_A[i][: i] @ k[:i])
            k[i] = rhs(t + _C[i] * h, yi)
        nfev += 6
        y_new = y + h * (_B5 @ k)
        err = h * (_E @ k)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        error_norm = float(np.sqrt(np.mean((err / scale) ** 2)))
        steps.append(StepRecord(t=t, h=h, accepted=error_norm <= 1.0, error_norm=error_norm))
        if error_norm <= 1.0:
            t = t + h
            y = y_new
            k[0] = k[6]  # FSAL
            n_accepted += 1
            ts.append(t)
            ys.append(y.copy())
            if callback is not None:
                callback(t, y)
            factor = _MAX_FACTOR if error_norm == 0.0 else _SAFETY * error_norm**_ORDER_EXP
        else:
            n_rejected += 1
            factor = max(_MIN_FACTOR, _SAFETY * error_norm**_ORDER_EXP)
        h = h * min(_MAX_FACTOR, max(_MIN_FACTOR, factor))

    return IntegrationResult(
        ts=np.array(ts),
        ys=np.array(ys),
        nfev=nfev,
        n_accepted=n_accepted,
        n_rejected=n_rejected,
        steps=steps,
    )
