from functools import lru_cache
from pathlib import Path
from typing import Iterable, Optional

import yaml
from pydantic_settings import BaseSettings

from coteach.exceptions import ConfigError
from coteach.schemas.experiment import ExperimentConfig


class Settings(BaseSettings):
    debug: bool = False

    log_level: str = "INFO"

    # Default output directory for runs started without --out
    results_dir: str = "./results"
    # Results store; unset means SQLite inside results_dir
    database_url: Optional[str] = None

    # Process pool width for compare/sweep (1 = serial)
    max_workers: int = 1

    class Config:
        env_file = ".env"
        env_prefix = "COTEACH_"
        extra = "ignore"

    @property
    def resolved_database_url(self) -> str:
        if self.database_url:
            return self.database_url
        return f"sqlite:///{Path(self.results_dir).as_posix()}/coteach.db"


@lru_cache()
def get_settings() -> Settings:
    return Settings()


def _set_path(data: dict, dotted_key: str, value) -> None:
    parts = dotted_key.split(".")
    target = data
    for part in parts[:-1]:
        node = target.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError(f"Cannot override '{dotted_key}': '{part}' is not a section")
        target = node
    target[parts[-1]] = value


def load_experiment_config(
    path: Optional[str | Path] = None,
    overrides: Iterable[str] = (),
) -> ExperimentConfig:
    """
    Load an experiment config from a YAML file (one mapping per section) and apply
    `section.key=value` overrides. A missing path means "all defaults".
    """
    data: dict = {}
    if path:
        config_path = Path(path)
        if not config_path.exists():
            raise ConfigError(f"Config file not found: {config_path}")
        try:
            loaded = yaml.safe_load(config_path.read_text())
        except yaml.YAMLError as e:
            raise ConfigError(f"Config file {config_path} is not valid YAML: {e}")
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"Config file {config_path} must contain a mapping of sections")
        data = loaded

    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"Override '{item}' must look like section.key=value")
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError as e:
            raise ConfigError(f"Override '{item}' has an unparsable value: {e}")
        _set_path(data, key.strip(), value)

    return ExperimentConfig.model_validate(data)
