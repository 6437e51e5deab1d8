# src/models/schemas/lindblad.py
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict


class DensityTrajectory(BaseModel):
    """Master-equation run recorded as expectation values.

    ``sigma[k, j]`` is <sigma_j^-> and ``excited[k, j]`` is <sigma_j^+ sigma_j^-> at
    ``times[k]``, in the frame rotating at ``reference``.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    times: np.ndarray
    sigma: np.ndarray
    excited: np.ndarray
    final_state: np.ndarray
    reference: float
    dt: float
    states: Optional[np.ndarray] = None


class CoherentSidebands(BaseModel):
    """Coherently scattered r_n, t_n at arbitrary drive power."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    r: np.ndarray
    t: np.ndarray
    n_max: int
    power: float  # (rabi / gamma1) ** 2

    @property
    def orders(self) -> np.ndarray:
        return np.arange(-self.n_max, self.n_max + 1)

    def r_n(self, n: int) -> complex:
        return complex(self.r[n + self.n_max]) if abs(n) <= self.n_max else 0j

    def t_n(self, n: int) -> complex:
        if abs(n) > self.n_max:
            return 1.0 + 0j if n == 0 else 0j
        return complex(self.t[n + self.n_max])

    def inelastic_power(self) -> tuple:
        mask = self.orders != 0
        return (
            float(np.sum(np.abs(self.r[mask]) ** 2)),
            float(np.sum(np.abs(self.t[mask]) ** 2)),
        )
