"""Fixed-step fourth-order Runge-Kutta for array-valued states.

States may carry leading batch axes; the right-hand side receives and returns
arrays of the state's shape.
"""

from typing import Callable, Optional, Tuple

import numpy as np

Rhs = Callable[[float, np.ndarray], np.ndarray]


def rk4_step(rhs: Rhs, t: float, y: np.ndarray, dt: float) -> np.ndarray:
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = rhs(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_fixed(
    rhs: Rhs,
    y0: np.ndarray,
    t0: float,
    dt: float,
    n_steps: int,
    observe: Optional[Callable[[float, np.ndarray], np.ndarray]] = None,
    check: Optional[Callable[[int, float, np.ndarray], None]] = None,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Take ``n_steps`` RK4 steps from ``(t0, y0)``.

    Returns ``(times, records, y_final)`` where ``records[k] = observe(t_k, y_k)``
    for k = 0..n_steps (the initial point included). ``check`` runs after every
    step and may raise.
    """
    observe = observe or (lambda t, y: np.array(y, copy=True))
    y = np.asarray(y0)
    times = t0 + dt * np.arange(n_steps + 1)
    first = np.asarray(observe(t0, y))
    records = np.empty((n_steps + 1,) + first.shape, dtype=first.dtype)
    records[0] = first
    for k in range(n_steps):
        y = rk4_step(rhs, times[k], y, dt)
        if check is not None:
            check(k + 1, times[k + 1], y)
        records[k + 1] = observe(times[k + 1], y)
    return times, records, y


def advance(rhs: Rhs, y0: np.ndarray, t0: float, dt: float, n_steps: int) -> np.ndarray:
    """Final state only."""
    y = np.asarray(y0)
    for k in range(n_steps):
        y = rk4_step(rhs, t0 + k * dt, y, dt)
    return y
