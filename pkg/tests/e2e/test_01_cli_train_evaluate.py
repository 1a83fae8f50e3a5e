"""
Test E2E: Escenario 01, juego repetido por línea de comandos

Verifica el flujo completo según el documento:
  tests/scenarios/01_cli_train_evaluate.md

Pasos cubiertos:
  Paso 1: evaluate sobre políticas óptimas escritas a mano (4.5244)
  Paso 2: train sin enseñanza, dos semillas, con artefactos y BD
  Paso 3: evaluate sobre las políticas recién entrenadas
  Paso 4: export a results.xlsx
  Paso 5: códigos de salida ante errores de configuración y de ejecución
"""
import json

import pytest
from openpyxl import load_workbook

from coteach.main import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main
from coteach.services.policy_store import save_learner
from coteach.services.qlearn import TabularQ

OPTIMUM = sum(0.95**t for t in range(5))
REPEATED = ["--set", "domain.name=repeated", "--set", "phase1_episodes=6", "--set", "evaluation_rollouts=2"]


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def run_cli(capsys, *argv):
    """Corre el CLI y devuelve (código de salida, JSON impreso o None)."""
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def optimal_policies(tmp_path):
    """i juega a1 y j juega a2 en cada paso: payoff 1 los cinco pasos."""
    agent_i, agent_j = TabularQ(6, 2), TabularQ(6, 2)
    agent_i.table[:, 0] = 1.0
    agent_j.table[:, 1] = 1.0
    return [
        str(save_learner(agent_i, tmp_path / "optimal_i.json")),
        str(save_learner(agent_j, tmp_path / "optimal_j.json")),
    ]


# ---------------------------------------------------------------------------
# Test principal
# ---------------------------------------------------------------------------

def test_escenario_01_cli_train_evaluate(capsys, tmp_path, db):
    """Flujo completo del escenario 01 paso a paso."""
    out = tmp_path / "results"

    # Paso 1: óptimo cerrado del juego repetido
    code, payload = run_cli(capsys, "evaluate", *REPEATED, "--policies", *optimal_policies(tmp_path))
    assert code == EXIT_OK
    assert payload["v_bar"] == pytest.approx(OPTIMUM, abs=1e-9)
    assert payload["domain"] == "repeated"

    # Paso 2: entrenamiento sin enseñanza
    code, rows = run_cli(capsys, "train", *REPEATED, "--set", "algorithm=none", "--seeds", "2", "--out", str(out))
    assert code == EXIT_OK
    assert [row["seed"] for row in rows] == [0, 1]
    assert all(row["label"] == "none" for row in rows)
    assert all(0.0 <= row["normalized_auc"] <= 1.0 for row in rows)
    assert (out / "results.csv").exists()
    assert (out / "curves" / "none_seed1.csv").exists()
    policies = [out / "policies" / f"none_seed0_agent{k}.json" for k in (0, 1)]
    assert all(p.exists() for p in policies)

    # Paso 3: evaluar lo entrenado reproduce V̄ de la semilla 0
    code, payload = run_cli(capsys, "evaluate", *REPEATED, "--policies", *map(str, policies), "--rollouts", "3")
    assert code == EXIT_OK
    assert payload["rollouts"] == 3
    assert payload["v_bar"] == pytest.approx(rows[0]["v_bar"])

    # Paso 4: exportar lo guardado en la BD
    code, payload = run_cli(capsys, "export", "--out", str(out))
    assert code == EXIT_OK
    wb = load_workbook(payload["workbook"])
    assert wb["Runs"].max_row == 1 + 2
    assert wb["Curves"].max_row == 1 + 2 * 6

    # Paso 5: errores
    code, _ = run_cli(capsys, "train", "--set", "algorithm=qteaching", "--out", str(out))
    assert code == EXIT_CONFIG
    code, _ = run_cli(capsys, "train", "--config", str(tmp_path / "missing.yaml"))
    assert code == EXIT_CONFIG
    code, _ = run_cli(capsys, "evaluate", *REPEATED, "--policies", "nope_i.json", "nope_j.json")
    assert code == EXIT_RUNTIME
    code, _ = run_cli(capsys, "evaluate", *REPEATED, "--policies", *map(str, policies), "--rollouts", "0")
    assert code == EXIT_CONFIG


def test_argumentos_invalidos_salen_con_codigo_de_configuracion(capsys):
    """argparse rechaza el subcomando y sale con 1."""
    with pytest.raises(SystemExit) as exc:
        main(["entrenar"])
    assert exc.value.code == EXIT_CONFIG
    with pytest.raises(SystemExit) as exc:
        main(["evaluate", "--policies", "solo_uno.json"])
    assert exc.value.code == EXIT_CONFIG


def test_yaml_de_experimento(capsys, tmp_path, db):
    """Las secciones del YAML y los --set se combinan."""
    config = tmp_path / "experiment.yaml"
    config.write_text(
        "algorithm: none\n"
        "domain:\n"
        "  name: hallway\n"
        "phase1_episodes: 3\n"
        "evaluation_rollouts: 1\n"
    )
    code, rows = run_cli(capsys, "train", "--config", str(config), "--set", "qlearn.epsilon=0.2",
                         "--seed", "5", "--out", str(tmp_path / "out"))
    assert code == EXIT_OK
    assert rows[0]["seed"] == 5
    assert rows[0]["domain"] == "hallway"
