# src/repositories/scene_repository.py
import json
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from config.settings import Settings, get_settings
from src.models.schemas.config_file import SceneFile
from src.models.schemas.scene import Scene
from src.repositories.base import BaseRepository, PathLike
from src.services.scene_service import SceneService
from src.utils.errors import InvalidParameter
from src.utils.logger import get_logger

logger = get_logger(__name__)


class SceneRepository(BaseRepository):
    """Scene files (JSON or YAML) and the named presets."""

    def __init__(self, root: PathLike = ".", settings: Optional[Settings] = None):
        super().__init__(root)
        self.settings = settings or get_settings()
        self._presets: Optional[Dict[str, Dict[str, Any]]] = None

    def _read_mapping(self, path: Path, field: str) -> Dict[str, Any]:
        try:
            data = yaml.safe_load(path.read_text(encoding="utf-8"))
        except FileNotFoundError as e:
            raise InvalidParameter([field], f"file not found: {path}") from e
        except yaml.YAMLError as e:
            logger.error(f"✗ Cannot parse {path}: {e}")
            raise InvalidParameter([field], f"cannot parse {path}") from e
        if not isinstance(data, dict):
            raise InvalidParameter([field], f"{path} does not hold a mapping")
        return data

    def load(self, name: PathLike) -> SceneFile:
        """Parse a scene file; JSON documents are read as YAML."""
        path = self.resolve(name)
        config = SceneService.parse_config(self._read_mapping(path, "config"))
        logger.info(f"Loaded scene file {path}")
        return config

    def load_scene(self, name: PathLike) -> Scene:
        return SceneService.scene_from_config(self.load(name))

    def save(self, config: SceneFile, name: PathLike) -> Path:
        """Write JSON for ``.json`` paths, YAML otherwise."""
        path = self.resolve(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        data = config.model_dump(mode="json")
        if path.suffix.lower() == ".json":
            path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        else:
            path.write_text(yaml.safe_dump(data, sort_keys=True), encoding="utf-8")
        return path

    # ------------------------------------------------------------------
    # Presets
    # ------------------------------------------------------------------

    def presets(self) -> Dict[str, Dict[str, Any]]:
        if self._presets is None:
            path = self.resolve(self.settings.PRESETS_PATH)
            self._presets = self._read_mapping(path, "preset")
            logger.debug(f"{len(self._presets)} presets in {path}")
        return self._presets

    def preset_names(self) -> List[str]:
        return sorted(self.presets())

    def _entry(self, name: str) -> Dict[str, Any]:
        entry = self.presets().get(name)
        if not isinstance(entry, dict) or "scene" not in entry:
            raise InvalidParameter(["preset"], f"unknown preset '{name}'")
        return entry

    def preset(self, name: str) -> SceneFile:
        return SceneService.parse_config(self._entry(name)["scene"])

    def preset_options(self, name: str) -> Dict[str, Any]:
        """Sweep settings stored next to a preset's scene (may be empty)."""
        return dict(self._entry(name).get("options") or {})
