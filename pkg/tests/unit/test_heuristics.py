"""Heurísticas de enseñanza: importancia, solicitudes, consejos con presupuesto y AdHoc."""
import numpy as np
import pytest
from hypothesis import given, strategies as st

from coteach.exceptions import ContractViolation
from coteach.schemas.enums import HeuristicKind
from coteach.services.heuristics import (
    EXPERT_KINDS,
    STUDENT_INITIATED,
    TEACHER_INITIATED,
    HeuristicState,
    decide_advise,
    decide_request,
    effective_visits,
    give_probability,
    request_probability,
    state_importance,
)


def test_importancia_del_estado():
    assert state_importance([0.5, 0.2], 1) == pytest.approx(0.3)
    assert state_importance([0.5, 0.2], 0) == 0.0
    assert all(state_importance([0.4] * 4, a) == 0.0 for a in range(4))
    with pytest.raises(ContractViolation):
        state_importance([0.5, 0.2], 2)


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=6), st.data())
def test_importancia_nunca_es_negativa(q, data):
    a_hat = data.draw(st.integers(0, len(q) - 1))
    assert state_importance(q, a_hat) >= 0.0


def test_familias_de_heuristicas_son_disjuntas():
    assert not STUDENT_INITIATED & TEACHER_INITIATED
    assert HeuristicKind.NONE not in EXPERT_KINDS
    assert HeuristicKind.ADHOC_TD not in EXPERT_KINDS
    # AdHoc: el alumno pide y el maestro decide si responde
    assert HeuristicKind.ADHOC_VISIT in STUDENT_INITIATED
    assert HeuristicKind.ADHOC_TD in STUDENT_INITIATED


def test_solicitudes_de_alumno():
    state = HeuristicState.create(5, threshold=0.1)
    assert decide_request(HeuristicKind.ASK_IMPORTANT, state, [0.5, 0.2], 1)
    assert not decide_request(HeuristicKind.ASK_UNCERTAIN, state, [0.5, 0.2], 1)
    assert decide_request(HeuristicKind.ASK_UNCERTAIN, state, [0.5, 0.2], 0)
    assert not decide_request(HeuristicKind.NONE, state, [0.5, 0.2], 1)
    assert not decide_request(HeuristicKind.EARLY_ADVISING, state, [0.5, 0.2], 1)


def test_early_advising_agota_el_presupuesto():
    state = HeuristicState.create(5, budget=3)
    advice = [decide_advise(HeuristicKind.EARLY_ADVISING, state, 0, [0.1, 0.9], 2, 0) for _ in range(5)]
    assert advice == [1, 1, 1, None, None]
    assert state.budget == [0, 3]


def test_importance_advising_segun_el_umbral():
    state = HeuristicState.create(5, threshold=0.1)
    assert decide_advise(HeuristicKind.IMPORTANCE_ADVISING, state, 1, [0.5, 0.2], 0, 0) == 0
    assert decide_advise(HeuristicKind.IMPORTANCE_ADVISING, state, 1, [0.5, 0.45], 0, 0) is None
    assert state.budget == [100, 99]


def test_early_correcting_solo_corrige_diferencias():
    state = HeuristicState.create(5)
    assert decide_advise(HeuristicKind.EARLY_CORRECTING, state, 0, [0.1, 0.9], 0, 1) is None
    assert decide_advise(HeuristicKind.EARLY_CORRECTING, state, 0, [0.1, 0.9], 0, 0) == 1


def test_correct_important_exige_ambas_condiciones():
    state = HeuristicState.create(5, threshold=0.5)
    assert decide_advise(HeuristicKind.CORRECT_IMPORTANT, state, 0, [0.1, 0.9], 0, 0) == 1
    assert decide_advise(HeuristicKind.CORRECT_IMPORTANT, state, 0, [0.5, 0.6], 0, 0) is None
    assert decide_advise(HeuristicKind.CORRECT_IMPORTANT, state, 0, [0.1, 0.9], 0, 1) is None


def test_none_nunca_aconseja():
    state = HeuristicState.create(5)
    assert decide_advise(HeuristicKind.NONE, state, 0, [0.1, 0.9], 0, 0) is None


def test_adhoc_alumno_pide_siempre_en_estados_nuevos(rng):
    state = HeuristicState.create(5, upsilon=0.5)
    assert request_probability(HeuristicKind.ADHOC_VISIT, state, 1, 3) == 1.0
    assert decide_request(HeuristicKind.ADHOC_VISIT, state, [0.1, 0.9], 0, student=1, student_obs=3, rng=rng)


def test_adhoc_maestro_sin_visitas_no_aconseja(rng):
    state = HeuristicState.create(5, upsilon=0.5)
    assert give_probability(HeuristicKind.ADHOC_VISIT, state, 0, 3) == 0.0
    assert decide_advise(HeuristicKind.ADHOC_VISIT, state, 0, [0.1, 0.9], 3, 0, rng) is None
    assert state.budget == [100, 100]


def test_adhoc_visit_probabilidades_segun_visitas_propias():
    state = HeuristicState.create(5, upsilon=0.5)
    for _ in range(4):
        state.record_visit(1, 3, td_error=0.0)
    state.record_visit(0, 3, td_error=0.0)
    state.record_visit(0, 3, td_error=0.0)
    state.record_visit(0, 4, td_error=0.0)
    # el alumno 1 pide menos cuanto más visitó la observación
    assert request_probability(HeuristicKind.ADHOC_VISIT, state, 1, 3) == pytest.approx(1.5**-4)
    # el maestro 0 responde según sus propias visitas a la observación del alumno
    assert give_probability(HeuristicKind.ADHOC_VISIT, state, 0, 3) == pytest.approx(1 - 1.5**-2)
    assert give_probability(HeuristicKind.ADHOC_VISIT, state, 1, 3) == pytest.approx(1 - 1.5**-4)
    assert give_probability(HeuristicKind.ADHOC_VISIT, state, 0, 2) == 0.0


def test_adhoc_maestro_experimentado_aconseja_su_accion_greedy(rng):
    state = HeuristicState.create(5, upsilon=0.5)
    for _ in range(60):
        state.record_visit(0, 3, td_error=0.0)
    assert decide_advise(HeuristicKind.ADHOC_VISIT, state, 0, [0.1, 0.9], 3, 0, rng) == 1
    assert state.budget == [99, 100]


def test_adhoc_td_descuenta_visitas_con_errores_grandes():
    state = HeuristicState.create(5, upsilon=0.5)
    for agent in (0, 1):
        for _ in range(10):
            state.record_visit(agent, 3, td_error=-2.0)
    assert state.td_magnitude[1][3] == pytest.approx(2.0)
    assert effective_visits(HeuristicKind.ADHOC_TD, state, 1, 3) == 0.0
    assert effective_visits(HeuristicKind.ADHOC_VISIT, state, 1, 3) == 10.0
    assert request_probability(HeuristicKind.ADHOC_TD, state, 1, 3) == 1.0
    assert give_probability(HeuristicKind.ADHOC_TD, state, 0, 3) == 0.0

    state = HeuristicState.create(5, upsilon=0.5)
    for agent in (0, 1):
        state.record_visit(agent, 3, td_error=0.5)
        state.record_visit(agent, 3, td_error=0.5)
    assert request_probability(HeuristicKind.ADHOC_TD, state, 1, 3) == pytest.approx(1.5**-1)
    assert give_probability(HeuristicKind.ADHOC_TD, state, 0, 3) == pytest.approx(1 - 1.5**-1)


@given(st.integers(0, 30), st.integers(0, 30))
def test_adhoc_probabilidades_acotadas_y_monotonas(n_student, n_teacher):
    state = HeuristicState.create(2, upsilon=0.5)
    state.visit_counts[1][0] = n_student
    state.visit_counts[0][0] = n_teacher
    asks = request_probability(HeuristicKind.ADHOC_VISIT, state, 1, 0)
    gives = give_probability(HeuristicKind.ADHOC_VISIT, state, 0, 0)
    assert 0.0 <= asks <= 1.0
    assert 0.0 <= gives <= 1.0
    state.visit_counts[1][0] += 1
    state.visit_counts[0][0] += 1
    assert request_probability(HeuristicKind.ADHOC_VISIT, state, 1, 0) < asks
    assert give_probability(HeuristicKind.ADHOC_VISIT, state, 0, 0) > gives


def test_adhoc_necesita_generador():
    state = HeuristicState.create(5)
    with pytest.raises(ContractViolation):
        decide_advise(HeuristicKind.ADHOC_TD, state, 0, [0.1, 0.9], 3, 0)
    with pytest.raises(ContractViolation):
        decide_request(HeuristicKind.ADHOC_VISIT, state, [0.1, 0.9], 0, student=1, student_obs=3)


@given(st.integers(0, 20), st.lists(st.sampled_from(sorted(TEACHER_INITIATED)), max_size=40))
def test_presupuesto_acota_el_total_de_consejos(budget, kinds):
    state = HeuristicState.create(5, threshold=0.0, budget=budget)
    given_advice = sum(
        decide_advise(kind, state, 0, [0.0, 1.0], 0, 0) is not None for kind in kinds
    )
    assert given_advice <= budget
    assert state.budget[0] >= 0


def test_presupuesto_negativo_es_invalido():
    with pytest.raises(ContractViolation):
        HeuristicState.create(5, budget=-1)


def test_visitas_son_monotonas(rng):
    state = HeuristicState.create(3)
    previous = np.zeros(3)
    for obs in rng.integers(3, size=50):
        state.record_visit(0, int(obs), float(rng.normal()))
        assert np.all(state.visit_counts[0] >= previous)
        previous = state.visit_counts[0].copy()
