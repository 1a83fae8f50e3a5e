"""Recompensas de asesoramiento: compuerta sin consejo, costo, escalado y valor conjunto."""
import numpy as np
import pytest
from hypothesis import given, strategies as st

from coteach.exceptions import ContractViolation, MissingRewardContext
from coteach.schemas.enums import DomainName, RewardKind
from coteach.schemas.experiment import DomainConfig
from coteach.services.advising import ReservoirScaler
from coteach.services.envs import make_env
from coteach.services.qlearn import TabularQ, Transition, UpdateReport, make_learners
from coteach.services.rewards import (
    RewardContext,
    advising_reward,
    estimate_joint_value,
    greedy_return,
    joint_advising_reward,
    learning_measure,
)


def _report():
    return TabularQ(5, 2, alpha=0.1).update(Transition(0, 1, 1.0, 1, True))


def _full_context(advised=True, cost=0.0, v_hat=0.5):
    report = UpdateReport(1.0, 0.9, 1.0, 0.81, 4.0, v_hat)
    return RewardContext(
        advised=advised,
        report=report,
        teacher_q=np.array([0.5, 0.2]),
        intended_action=1,
        task_reward=1.0,
        joint_value_before=0.5,
        joint_value_after=0.7,
        veg_tau=0.4,
        cost=cost,
    )


@pytest.mark.parametrize("kind", list(RewardKind))
def test_sin_consejo_la_recompensa_es_cero(kind):
    assert advising_reward(kind, RewardContext(advised=False, cost=0.5)) == 0.0


@given(st.sampled_from(list(RewardKind)), st.floats(0.0, 2.0))
def test_el_costo_se_resta_solo_cuando_hubo_consejo(kind, cost):
    free = advising_reward(kind, _full_context(cost=0.0))
    charged = advising_reward(kind, _full_context(cost=cost))
    assert charged == pytest.approx(free - cost)


def test_qtr_diferencia_contra_la_accion_pretendida():
    assert advising_reward(RewardKind.QTR, _full_context()) == pytest.approx(0.3)


def test_tdg_y_lg_con_alumno_tabular():
    ctx = RewardContext(advised=True, report=_report())
    assert advising_reward(RewardKind.TDG, ctx) == pytest.approx(0.1)
    assert advising_reward(RewardKind.LG, ctx) == pytest.approx(0.19)
    assert advising_reward(RewardKind.LGG, ctx) == pytest.approx(4.0)


def test_veg_umbral():
    assert advising_reward(RewardKind.VEG, _full_context(v_hat=0.5)) == 1.0
    assert advising_reward(RewardKind.VEG, _full_context(v_hat=0.3)) == 0.0


def test_veg_no_pasa_por_el_escalador():
    scaler = ReservoirScaler(10)
    assert advising_reward(RewardKind.VEG, _full_context(v_hat=0.5), scaler) == 1.0
    assert scaler.seen == 0
    advising_reward(RewardKind.QTR, _full_context(), scaler)
    assert scaler.seen == 1


def test_jvg_sin_aprendizaje_es_cero_y_task_reward_es_r():
    ctx = RewardContext(advised=True, joint_value_before=0.3, joint_value_after=0.3, task_reward=1.0)
    assert advising_reward(RewardKind.JVG, ctx) == 0.0
    assert advising_reward(RewardKind.TASK_REWARD, ctx) == 1.0


def test_contexto_incompleto():
    with pytest.raises(MissingRewardContext):
        learning_measure(RewardKind.VEG, RewardContext(advised=True, report=_report()))
    with pytest.raises(MissingRewardContext):
        advising_reward(RewardKind.JVG, RewardContext(advised=True, joint_value_before=0.1))


def test_recompensa_conjunta():
    assert joint_advising_reward(0.1, 0.0) == pytest.approx(0.1)
    assert joint_advising_reward(0.0, 0.0) == 0.0
    veg = advising_reward(RewardKind.VEG, _full_context(cost=0.5))
    assert joint_advising_reward(veg, veg) == pytest.approx(1.0)


def test_valor_conjunto_de_la_politica_optima_del_juego_repetido():
    env = make_env(DomainConfig(name=DomainName.REPEATED))
    learners = make_learners(env)
    for t in range(5):
        learners[1].table[t] = [0.0, 1.0]
    assert estimate_joint_value(env, learners) == pytest.approx(sum(0.95**t for t in range(5)), abs=1e-9)


def test_valor_de_politicas_nuevas_en_hallway_es_cero():
    env = make_env(DomainConfig(name=DomainName.HALLWAY))
    # ambos empatan hacia la izquierda y nunca ocupan metas distintas
    assert estimate_joint_value(env, make_learners(env)) == 0.0


def test_valor_de_politicas_aleatorias_esta_acotado(rng):
    env = make_env(DomainConfig(name=DomainName.HALLWAY))
    learners = make_learners(env, "tabular")
    for learner in learners:
        learner.table[...] = rng.random(learner.table.shape)
    value = estimate_joint_value(env, learners, rollouts=100)
    assert 0.0 <= value <= env.optimal_value() + 1e-12


def test_estimar_no_altera_el_entorno_en_curso():
    env = make_env(DomainConfig(name=DomainName.HALLWAY))
    env.reset()
    env.step([1, 0])
    estimate_joint_value(env, make_learners(env))
    assert env.t == 1
    assert env.positions == [(7, 0), (9, 0)]
    with pytest.raises(ContractViolation):
        estimate_joint_value(env, make_learners(env), rollouts=0)


def test_retorno_greedy_usa_el_gamma_del_aprendiz():
    env = make_env(DomainConfig(name=DomainName.REPEATED))
    learners = [TabularQ(6, 2, gamma=0.5), TabularQ(6, 2, gamma=0.5)]
    for t in range(5):
        learners[1].table[t] = [0.0, 1.0]
    assert greedy_return(env, learners) == pytest.approx(1 + 0.5 + 0.25 + 0.125 + 0.0625)
