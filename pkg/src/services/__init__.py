"""Solver and analysis services."""

from src.services.scene_service import SceneService
from src.services.floquet_service import FloquetService
from src.services.bloch_service import BlochService
from src.services.lindblad_service import LindbladService
from src.services.sweep_service import SweepService
from src.services.analysis_service import AnalysisService
from src.services.calibration_service import CalibrationService

__all__ = [
    "SceneService",
    "FloquetService",
    "BlochService",
    "LindbladService",
    "SweepService",
    "AnalysisService",
    "CalibrationService",
]
