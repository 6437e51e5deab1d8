# src/models/schemas/scene.py
import math
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.models.enums import Port


class EmitterParams(BaseModel):
    """One frequency-modulated two-level emitter. All rates in rad/s."""

    model_config = ConfigDict(frozen=True)

    omega0: float
    gamma1: float  # radiative decay into the waveguide
    gamma2: float  # total coherence decay, >= gamma1 / 2
    mod_amp: float = 0.0  # A_m
    mod_phase: float = 0.0  # alpha_j, rad

    @property
    def dephasing(self) -> float:
        """Pure-dephasing rate Gamma2 - Gamma1/2."""
        return self.gamma2 - 0.5 * self.gamma1

    def problems(self, prefix: str = "") -> List[Tuple[str, str]]:
        found = []
        for name in ("omega0", "gamma1", "gamma2", "mod_amp", "mod_phase"):
            if not math.isfinite(getattr(self, name)):
                found.append((prefix + name, "must be finite"))
        if found:
            return found
        if self.gamma1 <= 0:
            found.append((prefix + "gamma1", "must be > 0"))
        elif self.gamma2 < 0.5 * self.gamma1 * (1.0 - 1e-12):
            found.append((prefix + "gamma2", "must be >= gamma1/2"))
        if self.mod_amp < 0:
            found.append((prefix + "mod_amp", "must be >= 0"))
        return found


class WaveguideArray(BaseModel):
    """Emitters in waveguide order plus the propagation phase between neighbours."""

    model_config = ConfigDict(frozen=True)

    emitters: Tuple[EmitterParams, ...]
    phi: float = Field(..., description="inter-emitter propagation phase, rad")

    @property
    def size(self) -> int:
        return len(self.emitters)

    @property
    def gamma1(self) -> float:
        return self.emitters[0].gamma1

    @property
    def omega0(self) -> np.ndarray:
        return np.array([e.omega0 for e in self.emitters])

    @property
    def gamma2(self) -> np.ndarray:
        return np.array([e.gamma2 for e in self.emitters])

    @property
    def mod_amp(self) -> np.ndarray:
        return np.array([e.mod_amp for e in self.emitters])

    @property
    def mod_phase(self) -> np.ndarray:
        return np.array([e.mod_phase for e in self.emitters])

    @property
    def reference_frequency(self) -> float:
        """Mean resonance; detunings in sweeps and the master-equation frame refer to it."""
        return float(np.mean(self.omega0))

    def ordered_for(self, port: Port) -> "WaveguideArray":
        """Emitter order seen by a wave incident from ``port``."""
        if Port(port) == Port.LEFT:
            return self
        return self.model_copy(update={"emitters": tuple(reversed(self.emitters))})

    def with_phase(self, index: int, alpha: float) -> "WaveguideArray":
        """Copy with one emitter's modulation phase replaced."""
        emitters = list(self.emitters)
        emitters[index] = emitters[index].model_copy(update={"mod_phase": float(alpha)})
        return self.model_copy(update={"emitters": tuple(emitters)})

    def problems(self) -> List[Tuple[str, str]]:
        if not self.emitters:
            return [("emitters", "must not be empty")]
        found = []
        for j, emitter in enumerate(self.emitters):
            found.extend(emitter.problems(f"emitters.{j}."))
        g1 = self.emitters[0].gamma1
        for j, emitter in enumerate(self.emitters[1:], start=1):
            if not math.isclose(emitter.gamma1, g1, rel_tol=1e-12):
                found.append((f"emitters.{j}.gamma1", "all emitters share one gamma1"))
        if not (math.isfinite(self.phi) and 0.0 <= self.phi < 2.0 * math.pi):
            found.append(("phi", "must lie in [0, 2pi)"))
        return found


class DriveConfig(BaseModel):
    """Coherent probe."""

    model_config = ConfigDict(frozen=True)

    omega: float
    rabi: float = 0.0
    port: Port = Port.LEFT

    def problems(self) -> List[Tuple[str, str]]:
        found = []
        if not math.isfinite(self.omega):
            found.append(("drive.omega", "must be finite"))
        if not math.isfinite(self.rabi) or self.rabi < 0:
            found.append(("drive.rabi", "must be >= 0"))
        return found


class ModulationConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    omega_mod: float

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega_mod

    def problems(self) -> List[Tuple[str, str]]:
        if not (math.isfinite(self.omega_mod) and self.omega_mod > 0):
            return [("modulation.omega_mod", "must be > 0")]
        return []


class FrequencyGrid(BaseModel):
    """Uniform grid of probe or detection frequencies (rad/s)."""

    model_config = ConfigDict(frozen=True)

    start: float
    stop: float
    count: int

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)

    @property
    def spacing(self) -> float:
        return (self.stop - self.start) / (self.count - 1)

    def problems(self, prefix: str = "grid.") -> List[Tuple[str, str]]:
        found = []
        if self.count < 2:
            found.append((prefix + "count", "must be >= 2"))
        if not (math.isfinite(self.start) and math.isfinite(self.stop) and self.start < self.stop):
            found.append((prefix + "start", "must satisfy start < stop"))
        return found


class Scene(BaseModel):
    """Array, probe and modulation as one validated unit."""

    model_config = ConfigDict(frozen=True)

    array: WaveguideArray
    drive: DriveConfig
    modulation: ModulationConfig

    def problems(self) -> List[Tuple[str, str]]:
        found = [("array." + path, msg) for path, msg in self.array.problems()]
        found.extend(self.drive.problems())
        found.extend(self.modulation.problems())
        return found
