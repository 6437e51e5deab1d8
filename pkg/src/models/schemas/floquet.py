# src/models/schemas/floquet.py
import numpy as np
from pydantic import BaseModel, ConfigDict

from src.models.enums import Port


class FloquetSolution(BaseModel):
    """Sideband amplitudes p_j^(n), shape (N, 2*n_max + 1), emitters in physical order."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    amplitudes: np.ndarray
    n_max: int
    rabi: float  # probe amplitude the system was solved for
    port: Port = Port.LEFT
    residual: float = 0.0

    @property
    def orders(self) -> np.ndarray:
        return np.arange(-self.n_max, self.n_max + 1)

    def sideband(self, n: int) -> np.ndarray:
        return self.amplitudes[:, n + self.n_max]


class SidebandSpectrum(BaseModel):
    """Complex reflection and transmission coefficients r^(n), t^(n)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    r: np.ndarray
    t: np.ndarray
    n_max: int
    port: Port = Port.LEFT

    @property
    def orders(self) -> np.ndarray:
        return np.arange(-self.n_max, self.n_max + 1)

    def r_n(self, n: int) -> complex:
        if abs(n) > self.n_max:
            return 0j
        return complex(self.r[n + self.n_max])

    def t_n(self, n: int) -> complex:
        if abs(n) > self.n_max:
            return 1.0 + 0j if n == 0 else 0j
        return complex(self.t[n + self.n_max])

    def total_power(self) -> float:
        return float(np.sum(np.abs(self.r) ** 2 + np.abs(self.t) ** 2))

    def inelastic_power(self) -> tuple:
        """(reflected, transmitted) power summed over n != 0."""
        mask = self.orders != 0
        return (
            float(np.sum(np.abs(self.r[mask]) ** 2)),
            float(np.sum(np.abs(self.t[mask]) ** 2)),
        )
