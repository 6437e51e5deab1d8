"""Pydantic schemas for domain values and file formats."""

from src.models.schemas.scene import (
    EmitterParams,
    WaveguideArray,
    DriveConfig,
    ModulationConfig,
    FrequencyGrid,
    Scene,
)
from src.models.schemas.config_file import (
    SceneFile,
    QubitEntry,
    DriveEntry,
    ModulationEntry,
)
from src.models.schemas.floquet import FloquetSolution, SidebandSpectrum
from src.models.schemas.bloch import (
    SpinState,
    SpinTrajectory,
    SpectralDensity,
    MollowLines,
)
from src.models.schemas.lindblad import DensityTrajectory, CoherentSidebands
from src.models.schemas.analysis import (
    DirectionalityRecord,
    SweepMap,
    IsolatorMetrics,
    IsolatorScan,
    PowerMap,
)
from src.models.schemas.calibration import (
    MeasuredSpectrum,
    QubitFit,
    ModulationFit,
    CalibrationCurve,
)
from src.models.schemas.manifest import RunManifest

__all__ = [
    "EmitterParams",
    "WaveguideArray",
    "DriveConfig",
    "ModulationConfig",
    "FrequencyGrid",
    "Scene",
    "SceneFile",
    "QubitEntry",
    "DriveEntry",
    "ModulationEntry",
    "FloquetSolution",
    "SidebandSpectrum",
    "SpinState",
    "SpinTrajectory",
    "SpectralDensity",
    "MollowLines",
    "DensityTrajectory",
    "CoherentSidebands",
    "DirectionalityRecord",
    "SweepMap",
    "IsolatorMetrics",
    "IsolatorScan",
    "PowerMap",
    "MeasuredSpectrum",
    "QubitFit",
    "ModulationFit",
    "CalibrationCurve",
    "RunManifest",
]
