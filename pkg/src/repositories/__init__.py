"""File access: scenes, measurements and results."""

from src.repositories.scene_repository import SceneRepository
from src.repositories.measurement_repository import MeasurementRepository
from src.repositories.result_repository import ResultRepository

__all__ = ["SceneRepository", "MeasurementRepository", "ResultRepository"]
