# src/models/schemas/calibration.py
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict


class MeasuredSpectrum(BaseModel):
    """Power transmission |t|^2 on a probe grid (Hz)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    frequencies: np.ndarray
    power: np.ndarray
    background: Optional[np.ndarray] = None


class QubitFit(BaseModel):
    """Fitted single-emitter parameters (rad/s) with confidence intervals."""

    model_config = ConfigDict(frozen=True)

    omega0: float
    gamma1: float
    gamma2: float
    omega0_ci: Tuple[float, float]
    gamma1_ci: Tuple[float, float]
    gamma2_ci: Tuple[float, float]
    residual: float
    confidence: float = 0.95


class ModulationFit(BaseModel):
    model_config = ConfigDict(frozen=True)

    mod_amp: float
    mod_amp_ci: Tuple[float, float]
    residual: float
    confidence: float = 0.95


class CalibrationCurve(BaseModel):
    """Linear map A_m = slope * A_V + intercept at one modulation frequency."""

    model_config = ConfigDict(frozen=True)

    slope: float  # rad/s per volt
    intercept: float
    residual: float
    omega_mod: Optional[float] = None

    def amplitude(self, volts) -> np.ndarray:
        return self.slope * np.asarray(volts, dtype=float) + self.intercept
