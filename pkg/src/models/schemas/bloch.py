# src/models/schemas/bloch.py
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.models.enums import BlochFrame


class SpinState(BaseModel):
    """Expectation values of the spin-1/2 components."""

    model_config = ConfigDict(frozen=True)

    sx: float = 0.0
    sy: float = 0.0
    sz: float = -0.5

    @classmethod
    def ground(cls) -> "SpinState":
        return cls(sx=0.0, sy=0.0, sz=-0.5)

    @classmethod
    def excited(cls) -> "SpinState":
        return cls(sx=0.0, sy=0.0, sz=0.5)

    @classmethod
    def from_vector(cls, v) -> "SpinState":
        return cls(sx=float(v[0]), sy=float(v[1]), sz=float(v[2]))

    def as_vector(self) -> np.ndarray:
        return np.array([self.sx, self.sy, self.sz])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.as_vector()))


class SpinTrajectory(BaseModel):
    """Uniformly sampled Bloch vector; ``states`` has shape (len(times), 3)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    times: np.ndarray
    states: np.ndarray
    dt: float
    frame: BlochFrame = BlochFrame.ROTATING

    def state(self, index: int) -> SpinState:
        return SpinState.from_vector(self.states[index])

    @property
    def lowering(self) -> np.ndarray:
        """<S_-> = Sx - i Sy along the trajectory."""
        return self.states[:, 0] - 1j * self.states[:, 1]


class SpectralDensity(BaseModel):
    """Emission PSD on a detection grid (rad/s, detuning from the drive)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    frequencies: np.ndarray
    psd: np.ndarray
    incoherent: Optional[np.ndarray] = None
    coherent: Optional[np.ndarray] = None
    label: str = ""


class MollowLines(BaseModel):
    """Nine nested-Mollow emission frequencies; ``lines[p + 1, q + 1]`` is omega_{p,q}."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    lines: np.ndarray
    rabi_prime: float
    rabi_double_prime: float

    def line(self, p: int, q: int) -> float:
        return float(self.lines[p + 1, q + 1])
