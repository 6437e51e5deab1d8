# src/repositories/base.py
from pathlib import Path
from typing import List, Union

PathLike = Union[str, Path]


class BaseRepository:
    """Base repository rooted at one directory."""

    def __init__(self, root: PathLike = "."):
        self.root = Path(root)

    def resolve(self, name: PathLike) -> Path:
        """Absolute paths are kept; relative ones are taken under the root."""
        path = Path(name)
        return path if path.is_absolute() else self.root / path

    def exists(self, name: PathLike) -> bool:
        return self.resolve(name).is_file()

    def list(self, pattern: str = "*") -> List[Path]:
        """Files under the root matching ``pattern``, sorted."""
        if not self.root.is_dir():
            return []
        return sorted(p for p in self.root.glob(pattern) if p.is_file())

    def ensure_root(self) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        return self.root
