# src/models/schemas/manifest.py
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class RunManifest(BaseModel):
    """Everything needed to reproduce one CLI run."""

    subcommand: str
    argv: List[str]
    config: Optional[Dict[str, Any]] = None
    tier: Optional[str] = None
    grid_shapes: Dict[str, List[int]] = Field(default_factory=dict)
    outputs: List[str] = Field(default_factory=list)
    wall_clock_s: float = 0.0
    version: str
    created_at: str
