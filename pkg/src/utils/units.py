"""Unit conversions at the I/O boundary.

Everything inside the solvers is angular frequency (rad/s). Config files, the
CLI and CSV outputs quote rates the way the lab does: ordinary frequency in
MHz, i.e. value/(2*pi).
"""

import math

import numpy as np

TWO_PI = 2.0 * math.pi
MHZ = 1e6


def hz_to_angular(f):
    """Ordinary frequency (Hz) to angular frequency (rad/s)."""
    return TWO_PI * np.asarray(f, dtype=float) if np.ndim(f) else TWO_PI * float(f)


def angular_to_hz(w):
    return np.asarray(w, dtype=float) / TWO_PI if np.ndim(w) else float(w) / TWO_PI


def mhz_to_angular(f_mhz):
    """MHz in the /(2*pi) convention to rad/s."""
    return hz_to_angular(np.asarray(f_mhz, dtype=float) * MHZ if np.ndim(f_mhz) else float(f_mhz) * MHZ)


def angular_to_mhz(w):
    return angular_to_hz(w) / MHZ
