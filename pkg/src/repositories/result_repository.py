# src/repositories/result_repository.py
import json
from pathlib import Path
from typing import Any, Dict

import pandas as pd
import pydantic

from src.models.schemas.manifest import RunManifest
from src.repositories.base import BaseRepository, PathLike
from src.utils.errors import InvalidParameter
from src.utils.logger import get_logger

logger = get_logger(__name__)

FLOAT_FORMAT = "%.17e"


class ResultRepository(BaseRepository):
    """CSV tables, JSON records and run manifests under the output directory.

    Tables use full-precision scientific notation and LF line endings so that
    identical runs produce byte-identical files.
    """

    def write_table(self, name: str, frame: pd.DataFrame) -> Path:
        path = self.ensure_root() / f"{name}.csv"
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        logger.info(f"✓ Wrote {path} ({len(frame)} rows)")
        return path

    def write_json(self, name: str, data: Dict[str, Any]) -> Path:
        path = self.ensure_root() / f"{name}.json"
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        logger.info(f"✓ Wrote {path}")
        return path

    def write_manifest(self, manifest: RunManifest, name: str) -> Path:
        path = self.ensure_root() / f"{name}.manifest.json"
        path.write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
        return path

    def read_manifest(self, name: PathLike) -> RunManifest:
        path = self.resolve(name)
        try:
            return RunManifest.model_validate_json(path.read_text(encoding="utf-8"))
        except FileNotFoundError as e:
            raise InvalidParameter(["manifest"], f"file not found: {path}") from e
        except pydantic.ValidationError as e:
            raise InvalidParameter(["manifest"], f"malformed manifest {path}") from e
