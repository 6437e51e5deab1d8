# src/services/scene_service.py
"""Scene validation and conversion between the MHz file schema and domain values."""

import math
from typing import Any, Dict, Optional

import pydantic

from src.models.schemas.config_file import (
    DriveEntry,
    ModulationEntry,
    QubitEntry,
    SceneFile,
)
from src.models.schemas.scene import (
    DriveConfig,
    EmitterParams,
    FrequencyGrid,
    ModulationConfig,
    Scene,
    WaveguideArray,
)
from src.utils.errors import InvalidParameter
from src.utils.logger import get_logger
from src.utils.units import angular_to_mhz, mhz_to_angular

logger = get_logger(__name__)


class SceneService:
    """Checks type invariants and builds scenes from config files."""

    @staticmethod
    def validate(scene: Scene) -> Scene:
        """Return ``scene`` unchanged, or raise InvalidParameter naming every bad field."""
        problems = scene.problems()
        if problems:
            _raise(problems)
        return scene

    @staticmethod
    def check(
        array: Optional[WaveguideArray] = None,
        drive: Optional[DriveConfig] = None,
        modulation: Optional[ModulationConfig] = None,
        emitter: Optional[EmitterParams] = None,
        grid: Optional[FrequencyGrid] = None,
    ) -> None:
        """Validate whichever parts of a scene an operation receives."""
        problems = []
        if array is not None:
            problems.extend(("array." + path, msg) for path, msg in array.problems())
        if emitter is not None:
            problems.extend(emitter.problems("emitter."))
        if drive is not None:
            problems.extend(drive.problems())
        if modulation is not None:
            problems.extend(modulation.problems())
        if grid is not None:
            problems.extend(grid.problems())
        if problems:
            _raise(problems)

    @staticmethod
    def parse_config(data: Dict[str, Any]) -> SceneFile:
        """Parse a raw mapping (JSON or YAML document) into the file schema."""
        try:
            return SceneFile.model_validate(data)
        except pydantic.ValidationError as e:
            fields = [".".join(str(part) for part in err["loc"]) for err in e.errors()]
            raise InvalidParameter(fields, "malformed scene file") from e

    @classmethod
    def scene_from_config(cls, config: SceneFile) -> Scene:
        """Convert MHz values to rad/s and validate."""
        emitters = tuple(
            EmitterParams(
                omega0=mhz_to_angular(q.f0_mhz),
                gamma1=mhz_to_angular(q.gamma1_mhz),
                gamma2=mhz_to_angular(q.gamma2_mhz),
                mod_amp=mhz_to_angular(q.am_mhz),
                mod_phase=q.alpha_over_pi * math.pi,
            )
            for q in config.qubits
        )
        scene = Scene(
            array=WaveguideArray(emitters=emitters, phi=config.phi_over_pi * math.pi),
            drive=DriveConfig(
                omega=mhz_to_angular(config.drive.f_mhz),
                rabi=mhz_to_angular(config.drive.rabi_mhz),
                port=config.drive.port,
            ),
            modulation=ModulationConfig(omega_mod=mhz_to_angular(config.modulation.omega_mhz)),
        )
        scene = cls.validate(scene)
        logger.debug(f"Scene loaded: {scene.array.size} emitter(s)")
        return scene

    @staticmethod
    def scene_to_config(scene: Scene) -> SceneFile:
        return SceneFile(
            qubits=[
                QubitEntry(
                    f0_mhz=angular_to_mhz(e.omega0),
                    gamma1_mhz=angular_to_mhz(e.gamma1),
                    gamma2_mhz=angular_to_mhz(e.gamma2),
                    am_mhz=angular_to_mhz(e.mod_amp),
                    alpha_over_pi=e.mod_phase / math.pi,
                )
                for e in scene.array.emitters
            ],
            phi_over_pi=scene.array.phi / math.pi,
            drive=DriveEntry(
                f_mhz=angular_to_mhz(scene.drive.omega),
                rabi_mhz=angular_to_mhz(scene.drive.rabi),
                port=scene.drive.port,
            ),
            modulation=ModulationEntry(omega_mhz=angular_to_mhz(scene.modulation.omega_mod)),
        )


def _raise(problems) -> None:
    fields = [path for path, _ in problems]
    detail = "; ".join(f"{path} {msg}" for path, msg in problems)
    logger.debug(f"Validation failed: {detail}")
    raise InvalidParameter(fields, detail)
