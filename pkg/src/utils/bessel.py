"""Bessel-series helpers for sinusoidally modulated resonances."""

import numpy as np
from scipy.special import jv

from src.utils.errors import NonConvergence


def bessel_cut(x: float, tol: float = 1e-12, ceiling: int = 400) -> int:
    """Smallest n_cut with 1 - sum_{|n| <= n_cut} J_n(x)^2 < tol."""
    x = abs(float(x))
    if x == 0.0:
        return 0
    captured = jv(0, x) ** 2
    n = 0
    while 1.0 - captured >= tol:
        n += 1
        if n > ceiling:
            raise NonConvergence(
                f"Bessel tail above {tol:g} at n_cut={ceiling} for modulation index {x:g}"
            )
        captured += 2.0 * jv(n, x) ** 2
    return n


def bessel_weights(x: float, n_cut: int) -> tuple:
    """Orders -n_cut..n_cut and J_n(x) evaluated on them."""
    orders = np.arange(-n_cut, n_cut + 1)
    return orders, jv(orders, x)
