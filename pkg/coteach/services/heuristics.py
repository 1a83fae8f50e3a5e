"""
Heuristic teaching baselines behind the same request/advise interface as the
learned advising policies.

Student-initiated kinds (ask_*, AdHoc) decide when to request. The ask_* teacher
always answers with its greedy action; the AdHoc teacher answers with a
probability that grows with its own visits of the student's observation.
Teacher-initiated kinds are consulted every step without a request. Every
heuristic advice spends one unit of the teacher's budget.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from coteach.exceptions import ContractViolation
from coteach.schemas.enums import HeuristicKind

logger = logging.getLogger(__name__)

ADHOC = frozenset({HeuristicKind.ADHOC_VISIT, HeuristicKind.ADHOC_TD})
STUDENT_INITIATED = frozenset({HeuristicKind.ASK_IMPORTANT, HeuristicKind.ASK_UNCERTAIN}) | ADHOC
TEACHER_INITIATED = frozenset({
    HeuristicKind.EARLY_ADVISING,
    HeuristicKind.IMPORTANCE_ADVISING,
    HeuristicKind.EARLY_CORRECTING,
    HeuristicKind.CORRECT_IMPORTANT,
})
# Kinds whose teacher is a pre-trained expert rather than the live teammate
EXPERT_KINDS = frozenset(set(HeuristicKind) - {HeuristicKind.NONE} - ADHOC)


@dataclass
class HeuristicState:
    threshold: float = 0.01
    # budget[k]: advice teacher k may still give
    budget: List[int] = field(default_factory=lambda: [100, 100])
    # visit_counts[k][obs]: how often agent k acted from obs
    visit_counts: List[np.ndarray] = field(default_factory=list)
    # td_magnitude[k][obs]: running mean |TD error| of agent k at obs
    td_magnitude: List[np.ndarray] = field(default_factory=list)
    upsilon: float = 0.5

    @classmethod
    def create(cls, n_observations: int, threshold: float = 0.01, budget: int = 100,
               upsilon: float = 0.5) -> "HeuristicState":
        if budget < 0:
            raise ContractViolation(f"budget must be >= 0, got {budget}")
        return cls(
            threshold=threshold,
            budget=[budget, budget],
            visit_counts=[np.zeros(n_observations, dtype=np.int64) for _ in range(2)],
            td_magnitude=[np.zeros(n_observations) for _ in range(2)],
            upsilon=upsilon,
        )

    def record_visit(self, agent: int, obs: int, td_error: float) -> None:
        self.visit_counts[agent][obs] += 1
        n = self.visit_counts[agent][obs]
        self.td_magnitude[agent][obs] += (abs(td_error) - self.td_magnitude[agent][obs]) / n


def state_importance(q_vector, a_hat: int) -> float:
    q = np.asarray(q_vector, dtype=float)
    if not 0 <= a_hat < q.shape[0]:
        raise ContractViolation(f"action {a_hat} outside [0, {q.shape[0]})")
    return float(np.max(q) - q[a_hat])


def effective_visits(kind: HeuristicKind, state: HeuristicState, agent: int, obs: int) -> float:
    """Visit count of `agent` at `obs`; AdHocTD discounts it by the agent's mean |TD error| there."""
    visits = float(state.visit_counts[agent][obs])
    if kind == HeuristicKind.ADHOC_TD:
        visits *= 1.0 - min(1.0, float(state.td_magnitude[agent][obs]))
    return visits


def request_probability(kind: HeuristicKind, state: HeuristicState, student: int, student_obs: int) -> float:
    """Probability the AdHoc student asks: 1 in fresh states, decaying with its own visits."""
    return float((1.0 + state.upsilon) ** (-effective_visits(kind, state, student, student_obs)))


def give_probability(kind: HeuristicKind, state: HeuristicState, teacher: int, student_obs: int) -> float:
    """Probability the AdHoc teacher answers: 0 where it has never been, rising with its own visits."""
    return float(1.0 - (1.0 + state.upsilon) ** (-effective_visits(kind, state, teacher, student_obs)))


def decide_request(
    kind: HeuristicKind,
    state: HeuristicState,
    student_q,
    intended_action: int,
    student: Optional[int] = None,
    student_obs: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> bool:
    if kind in ADHOC:
        if rng is None or student is None or student_obs is None:
            raise ContractViolation(f"{kind.value} requests at random and needs the student, its observation and an rng")
        return bool(rng.random() < request_probability(kind, state, student, student_obs))
    importance = state_importance(student_q, intended_action)
    if kind == HeuristicKind.ASK_IMPORTANT:
        return importance >= state.threshold
    if kind == HeuristicKind.ASK_UNCERTAIN:
        return importance < state.threshold
    return False


def decide_advise(
    kind: HeuristicKind,
    state: HeuristicState,
    teacher: int,
    teacher_q,
    student_obs: int,
    intended_action: int,
    rng: Optional[np.random.Generator] = None,
) -> Optional[int]:
    """
    Advice from `teacher` to its peer, or None. `teacher_q` is the teacher's
    Q-vector at the student's observation; advice is always its greedy action.
    """
    if kind == HeuristicKind.NONE or state.budget[teacher] <= 0:
        return None
    q = np.asarray(teacher_q, dtype=float)
    greedy = int(np.argmax(q))

    if kind == HeuristicKind.IMPORTANCE_ADVISING:
        give = float(np.max(q) - np.min(q)) >= state.threshold
    elif kind == HeuristicKind.EARLY_CORRECTING:
        give = intended_action != greedy
    elif kind == HeuristicKind.CORRECT_IMPORTANT:
        give = float(np.max(q) - np.min(q)) >= state.threshold and intended_action != greedy
    elif kind in ADHOC:
        if rng is None:
            raise ContractViolation(f"{kind.value} advises at random and needs an rng")
        give = rng.random() < give_probability(kind, state, teacher, student_obs)
    else:
        # early advising and answers to ask_* requests
        give = True

    if not give:
        return None
    state.budget[teacher] -= 1
    return greedy
