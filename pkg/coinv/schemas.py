import hashlib
import json
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, model_validator


class TowerSpec(BaseModel):
    """One tower of a diagram file: level-1 towers carry cells, higher towers a traversal"""

    name: str = Field(..., min_length=1)
    cells: Optional[List[List[int]]] = None
    traversal: Optional[List[str]] = None

    @model_validator(mode="after")
    def exactly_one_body(self) -> "TowerSpec":
        if (self.cells is None) == (self.traversal is None):
            raise ValueError(f"Tower {self.name!r} needs exactly one of 'cells' or 'traversal'")
        return self


class DiagramFile(BaseModel):
    """Ordered Bratteli-Vershik diagram file (JSON syntax)"""

    group: List[int]
    levels: List[List[TowerSpec]] = Field(..., min_length=1)

    def to_json(self) -> str:
        return self.model_dump_json(exclude_none=True, indent=2) + "\n"


class RunReport(BaseModel):
    """Outcome of one CLI command"""

    command: str
    inputs_digest: str
    payload: Dict[str, Any] = Field(default_factory=dict)
    exit_status: int = 0

    @staticmethod
    def digest(inputs: Dict[str, Any]) -> str:
        """SHA-256 of the canonical JSON form of the inputs"""
        canonical = json.dumps(inputs, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)
