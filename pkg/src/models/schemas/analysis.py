# src/models/schemas/analysis.py
from typing import Iterator

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.models.enums import SolverTier


class DirectionalityRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float
    detuning: float
    p_fwd: float
    p_bwd: float
    directivity: float


class SweepMap(BaseModel):
    """Sideband powers on an (alpha, detuning) grid; arrays have shape (len(alphas), len(detunings))."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    alphas: np.ndarray
    detunings: np.ndarray
    sideband: int
    forward: np.ndarray
    backward: np.ndarray
    directivity: np.ndarray
    tier: SolverTier = SolverTier.FLOQUET

    @property
    def scale(self) -> float:
        """Common maximum of both panels."""
        peak = max(float(np.max(self.forward)), float(np.max(self.backward)))
        return peak if peak > 0 else 1.0

    @property
    def forward_normalized(self) -> np.ndarray:
        return self.forward / self.scale

    @property
    def backward_normalized(self) -> np.ndarray:
        return self.backward / self.scale

    def records(self) -> Iterator[DirectionalityRecord]:
        for i, alpha in enumerate(self.alphas):
            for k, detuning in enumerate(self.detunings):
                yield DirectionalityRecord(
                    alpha=float(alpha),
                    detuning=float(detuning),
                    p_fwd=float(self.forward[i, k]),
                    p_bwd=float(self.backward[i, k]),
                    directivity=float(self.directivity[i, k]),
                )


class IsolatorMetrics(BaseModel):
    model_config = ConfigDict(frozen=True)

    isolation_db: float
    insertion_loss_db: float


class IsolatorScan(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    alphas: np.ndarray
    sideband: int
    s21: np.ndarray
    s12: np.ndarray
    isolation_db: np.ndarray
    insertion_loss_db: np.ndarray


class PowerMap(BaseModel):
    """Coherent elastic and inelastic scattering versus drive power and detuning."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    rabis: np.ndarray
    detunings: np.ndarray
    gamma1: float
    elastic_r: np.ndarray
    elastic_t: np.ndarray
    inelastic_r: np.ndarray
    inelastic_t: np.ndarray
    stokes_r: np.ndarray
    stokes_t: np.ndarray

    @property
    def powers(self) -> np.ndarray:
        """(rabi / gamma1) ** 2 per row."""
        return (self.rabis / self.gamma1) ** 2
