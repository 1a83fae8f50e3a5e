"""Versioned JSON policy files for task learners and advising policy sets."""
import json
import logging
from pathlib import Path
from typing import Union

from pydantic import ValidationError

from coteach.exceptions import PolicyFormatError
from coteach.schemas.policy_file import POLICY_FORMAT_VERSION, PolicyFile
from coteach.services.qlearn import learner_from_policy_file

logger = logging.getLogger(__name__)

KNOWN_KINDS = ("tabular_q", "tile_q", "advising_set")


def save_policy(policy_file: PolicyFile, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(policy_file.model_dump_json())
    logger.info(f"Saved {policy_file.kind} policy to {path}")
    return path


def load_policy(path: Union[str, Path]) -> PolicyFile:
    path = Path(path)
    if not path.exists():
        raise PolicyFormatError(f"Policy file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise PolicyFormatError(f"Policy file {path} is not valid JSON: {e}")
    if not isinstance(raw, dict):
        raise PolicyFormatError(f"Policy file {path} must hold a JSON object")

    version = raw.get("format_version")
    if version != POLICY_FORMAT_VERSION:
        raise PolicyFormatError(
            f"Policy file {path} has format version {version}, expected {POLICY_FORMAT_VERSION}"
        )
    try:
        policy_file = PolicyFile.model_validate(raw)
    except ValidationError as e:
        raise PolicyFormatError(f"Policy file {path} is malformed: {e}")
    if policy_file.kind not in KNOWN_KINDS:
        raise PolicyFormatError(f"Policy file {path} has unknown kind '{policy_file.kind}'")
    return policy_file


def save_learner(learner, path: Union[str, Path]) -> Path:
    return save_policy(learner.to_policy_file(), path)


def load_learner(path: Union[str, Path]):
    return learner_from_policy_file(load_policy(path))
