# src/models/schemas/config_file.py
"""Scene file schema. Every rate is ordinary frequency in MHz (value / 2pi)."""

from typing import List

from pydantic import BaseModel, ConfigDict, Field

from src.models.enums import Port


class QubitEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    f0_mhz: float
    gamma1_mhz: float
    gamma2_mhz: float
    am_mhz: float = 0.0
    alpha_over_pi: float = 0.0


class DriveEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    f_mhz: float
    rabi_mhz: float = 0.0
    port: Port = Port.LEFT


class ModulationEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    omega_mhz: float


class SceneFile(BaseModel):
    """Structured config file as read from JSON or YAML."""

    model_config = ConfigDict(extra="forbid")

    qubits: List[QubitEntry] = Field(default_factory=list)
    phi_over_pi: float = 0.5
    drive: DriveEntry
    modulation: ModulationEntry
