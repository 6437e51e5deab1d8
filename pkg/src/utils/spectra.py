"""Correlation-function to power-spectrum helpers shared by the emission solvers."""

import numpy as np

_CHUNK = 256


def correlation_to_psd(dt: float, correlation: np.ndarray, frequencies: np.ndarray) -> np.ndarray:
    """Re of the one-sided Fourier integral  int_0^tau_max e^{-i nu tau} C(tau) d tau.

    ``correlation`` is sampled at tau = k * dt; trapezoid rule, no apodization.
    """
    correlation = np.asarray(correlation, dtype=complex)
    taus = dt * np.arange(correlation.size)
    weights = np.full(correlation.size, dt)
    weights[0] = weights[-1] = 0.5 * dt
    weighted = weights * correlation
    frequencies = np.asarray(frequencies, dtype=float)
    out = np.empty(frequencies.size)
    for start in range(0, frequencies.size, _CHUNK):
        nu = frequencies[start:start + _CHUNK]
        kernel = np.exp(-1j * np.outer(nu, taus))
        out[start:start + _CHUNK] = np.real(kernel @ weighted)
    return out


def fourier_lines(signal: np.ndarray, times: np.ndarray, omega_mod: float, orders: np.ndarray) -> np.ndarray:
    """Coefficients a_k with signal(t) = sum_k a_k e^{-i k Omega t}.

    ``signal`` must cover an integer number of periods sampled uniformly, the
    closing endpoint excluded.
    """
    phase = np.exp(1j * omega_mod * np.outer(orders, times))
    return phase @ np.asarray(signal, dtype=complex) / len(times)


def bin_lines(frequencies: np.ndarray, line_positions: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Spread delta lines ``pi * weight * delta(nu - position)`` onto a uniform grid.

    Each line goes into its nearest bin as a box of the bin width; lines off the
    grid are dropped.
    """
    frequencies = np.asarray(frequencies, dtype=float)
    out = np.zeros(frequencies.size)
    spacing = frequencies[1] - frequencies[0]
    for position, weight in zip(np.atleast_1d(line_positions), np.atleast_1d(weights)):
        index = int(np.rint((position - frequencies[0]) / spacing))
        if 0 <= index < frequencies.size:
            out[index] += np.pi * float(weight) / spacing
    return out


def orders_in_band(lo: float, hi: float, omega_mod: float, pad: int = 0) -> np.ndarray:
    """Integers k with k * Omega inside [lo, hi], widened by ``pad`` on each side."""
    k_lo = int(np.ceil(lo / omega_mod)) - pad
    k_hi = int(np.floor(hi / omega_mod)) + pad
    return np.arange(k_lo, k_hi + 1)
