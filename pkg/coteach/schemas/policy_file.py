from typing import Any, Dict, List

from pydantic import BaseModel

POLICY_FORMAT_VERSION = 1


class PolicyFile(BaseModel):
    format_version: int = POLICY_FORMAT_VERSION
    kind: str  # tabular_q, tile_q, advising_set
    shapes: Dict[str, List[int]] = {}
    params: Dict[str, Any] = {}
    meta: Dict[str, Any] = {}
