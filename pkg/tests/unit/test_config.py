"""Configuración de experimentos: YAML, overrides, validación y settings de proceso."""
import argparse

import pytest
from pydantic import ValidationError

from coteach.commands.common import resolve
from coteach.config import Settings, get_settings, load_experiment_config
from coteach.exceptions import ConfigError
from coteach.schemas.enums import DomainName, RewardKind


def test_sin_archivo_usa_los_valores_por_defecto():
    config = load_experiment_config()
    assert config.algorithm == "learned"
    assert config.domain.name == DomainName.HALLWAY
    assert config.phase1_episodes == 100
    assert config.rewards.kind == RewardKind.VEG
    assert config.seeds == list(range(10))


def test_episodios_por_dominio():
    assert load_experiment_config(overrides=["domain.name=repeated"]).phase1_episodes == 50
    assert load_experiment_config(overrides=["domain.name=room"]).phase1_episodes == 150
    assert load_experiment_config(overrides=["domain.name=room", "phase1_episodes=3"]).phase1_episodes == 3


def test_yaml_y_overrides(tmp_path):
    path = tmp_path / "exp.yaml"
    path.write_text(
        "algorithm: importance_advising\n"
        "domain:\n"
        "  name: room\n"
        "  rotation_degrees: 180\n"
        "heuristic:\n"
        "  threshold: 0.2\n"
    )
    config = load_experiment_config(path, ["heuristic.budget=5", "rewards.cost=0.5"])
    assert config.algorithm == "importance_advising"
    assert config.domain.rotation_degrees == 180
    assert config.heuristic.threshold == 0.2
    assert config.heuristic.budget == 5
    assert config.rewards.cost == 0.5
    assert config.display_label == "importance_advising-rot180"


def test_etiquetas_de_corridas_aprendidas():
    config = load_experiment_config(overrides=["rewards.kind=jvg", "rewards.cost=0.5"])
    assert config.display_label == "learned-jvg-c0.5"
    assert load_experiment_config(overrides=["label=mine"]).display_label == "mine"


def test_errores_de_configuracion(tmp_path):
    with pytest.raises(ConfigError):
        load_experiment_config(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("- just\n- a list\n")
    with pytest.raises(ConfigError):
        load_experiment_config(bad)
    with pytest.raises(ConfigError):
        load_experiment_config(overrides=["no_equals_sign"])
    with pytest.raises(ConfigError):
        load_experiment_config(overrides=["algorithm=none", "algorithm.inner=3"])


def test_valores_invalidos_son_rechazados():
    with pytest.raises(ValidationError):
        load_experiment_config(overrides=["algorithm=qteaching"])
    with pytest.raises(ValidationError):
        load_experiment_config(overrides=["qlearn.alpha=0"])
    with pytest.raises(ValidationError):
        load_experiment_config(overrides=["rewards.kind=reward"])


def test_settings_leen_variables_de_entorno(monkeypatch):
    monkeypatch.setenv("COTEACH_MAX_WORKERS", "3")
    monkeypatch.setenv("COTEACH_LOG_LEVEL", "debug")
    settings = Settings()
    assert settings.max_workers == 3
    assert settings.log_level == "debug"


def test_url_de_bd_se_deriva_del_directorio_de_resultados(monkeypatch, tmp_path):
    monkeypatch.delenv("COTEACH_DATABASE_URL", raising=False)
    monkeypatch.setenv("COTEACH_RESULTS_DIR", str(tmp_path / "corridas"))
    settings = Settings(_env_file=None)
    assert settings.database_url is None
    assert settings.resolved_database_url == f"sqlite:///{(tmp_path / 'corridas').as_posix()}/coteach.db"
    monkeypatch.setenv("COTEACH_DATABASE_URL", "sqlite:///:memory:")
    assert Settings(_env_file=None).resolved_database_url == "sqlite:///:memory:"


def test_directorio_de_salida_por_defecto_viene_de_settings():
    def args(out=None, overrides=()):
        return argparse.Namespace(config=None, overrides=list(overrides), out=out, seeds=None, seed=None)

    config, seeds = resolve(args())
    assert config.out_dir == get_settings().results_dir
    assert seeds == list(range(10))
    config, _ = resolve(args(overrides=["out_dir=otro"]))
    assert config.out_dir == "otro"
    config, _ = resolve(args(out="cli", overrides=["out_dir=otro"]))
    assert config.out_dir == "cli"
