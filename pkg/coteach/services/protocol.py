"""
The advice-exchange loop: per step, each agent may act as student, teacher or
both; advised actions pass through the student's behavioural policy before
execution; task learners update online; advising rewards and experiences are
produced for the learned advising policies.
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from coteach.exceptions import ContractViolation
from coteach.schemas.enums import HeuristicKind, RewardKind
from coteach.schemas.results import Phase2Stats
from coteach.schemas.trace import EpisodeTrace, StepRecord
from coteach.services.advising import (
    ACTOR_KEYS,
    AdvisingActionSet,
    AdvisingPolicySet,
    ReservoirScaler,
    actor_update,
    build_advising_obs,
    critic_update,
    select_advising_actions,
)
from coteach.services.envs import ActionRotation
from coteach.services.heuristics import (
    TEACHER_INITIATED,
    HeuristicState,
    decide_advise,
    decide_request,
)
from coteach.services.qlearn import Transition
from coteach.services.rewards import (
    RewardContext,
    advising_reward,
    estimate_joint_value,
    greedy_return,
    joint_advising_reward,
)

logger = logging.getLogger(__name__)


class TeachingAlgorithm(ABC):
    """Uniform request/advise interface for every teaching strategy."""

    # Teacher-initiated strategies are asked for advice without a request
    teacher_initiated: bool = False
    collects_experience: bool = False
    uses_advising_obs: bool = False

    def __init__(self, knowledge: Optional[Sequence] = None):
        # Optional fixed learners standing in for the teachers' own Q-functions
        self.knowledge = knowledge

    def teacher_q(self, teacher: int, learners: Sequence, student_obs: int) -> np.ndarray:
        source = self.knowledge[teacher] if self.knowledge is not None else learners[teacher]
        return source.q_values(student_obs)

    def begin_step(self, adv_obs, rng: np.random.Generator) -> None:
        pass

    @abstractmethod
    def request(self, student: int, student_obs: int, student_q: np.ndarray, intended: int,
                rng: np.random.Generator) -> bool:
        ...

    @abstractmethod
    def advise(self, teacher: int, teacher_q: np.ndarray, student_obs: int, intended: int,
               rng: np.random.Generator) -> Optional[int]:
        ...

    def observe(self, agent: int, obs: int, td_error: float) -> None:
        pass


class NoTeaching(TeachingAlgorithm):
    def request(self, student, student_obs, student_q, intended, rng) -> bool:
        return False

    def advise(self, teacher, teacher_q, student_obs, intended, rng) -> Optional[int]:
        return None


class HeuristicTeaching(TeachingAlgorithm):
    def __init__(self, kind: HeuristicKind, state: HeuristicState, knowledge: Optional[Sequence] = None):
        super().__init__(knowledge)
        self.kind = HeuristicKind(kind)
        self.state = state
        self.teacher_initiated = self.kind in TEACHER_INITIATED

    def request(self, student, student_obs, student_q, intended, rng) -> bool:
        return decide_request(self.kind, self.state, student_q, intended, student, student_obs, rng)

    def advise(self, teacher, teacher_q, student_obs, intended, rng) -> Optional[int]:
        return decide_advise(self.kind, self.state, teacher, teacher_q, student_obs, intended, rng)

    def observe(self, agent: int, obs: int, td_error: float) -> None:
        self.state.record_visit(agent, obs, td_error)


class LearnedTeaching(TeachingAlgorithm):
    uses_advising_obs = True

    def __init__(self, policy_set: AdvisingPolicySet, mode: str = "sample",
                 knowledge: Optional[Sequence] = None, collect: bool = True):
        super().__init__(knowledge)
        self.policy_set = policy_set
        self.mode = mode
        self.collects_experience = collect
        self.actions: Optional[AdvisingActionSet] = None

    def begin_step(self, adv_obs, rng) -> None:
        self.actions = select_advising_actions(self.policy_set, adv_obs, rng, self.mode)

    def request(self, student, student_obs, student_q, intended, rng) -> bool:
        return self.actions.requests[student]

    def advise(self, teacher, teacher_q, student_obs, intended, rng) -> Optional[int]:
        return self.actions.advice[teacher]


@dataclass(frozen=True)
class BehavioralPolicy:
    """Student-local map from an advised action index to the index it executes."""

    mapping: tuple

    def __post_init__(self):
        if sorted(self.mapping) != list(range(len(self.mapping))):
            raise ContractViolation(f"behavioural map {self.mapping} is not a bijection")

    def __call__(self, advised: int) -> int:
        return int(self.mapping[advised])

    @classmethod
    def identity(cls, n_actions: int) -> "BehavioralPolicy":
        return cls(tuple(range(n_actions)))

    @classmethod
    def from_rotation(cls, rotation: ActionRotation) -> "BehavioralPolicy":
        # advice arrives in the shared frame; the student re-expresses it in its rotated one
        return cls(rotation.permutation)


def run_episode(
    env,
    learners: Sequence,
    teaching_alg: TeachingAlgorithm,
    behavioral_policies: Sequence[BehavioralPolicy],
    reward_kind: Optional[RewardKind],
    cost: float,
    rng: np.random.Generator,
    collect: bool = False,
    veg_tau: Optional[float] = None,
    jvg_rollouts: int = 10,
    scaler: Optional[ReservoirScaler] = None,
) -> EpisodeTrace:
    if len(learners) != 2:
        raise ContractViolation(f"the advising protocol needs two agents, got {len(learners)}")
    gamma = learners[0].gamma
    collect = collect and teaching_alg.collects_experience
    needs_adv_obs = teaching_alg.uses_advising_obs or collect

    obs = env.reset(rng)
    adv_obs = build_advising_obs(obs, *learners, teaching_alg.knowledge) if needs_adv_obs else None
    trace = EpisodeTrace()
    discount = 1.0
    done = False
    while not done:
        intended = [learners[0].act(obs[0], rng), learners[1].act(obs[1], rng)]
        teaching_alg.begin_step(adv_obs, rng)

        requested = [False, False]
        advice: List[Optional[int]] = [None, None]
        teacher_qs = [None, None]
        for teacher in (0, 1):
            student = 1 - teacher
            if teaching_alg.teacher_initiated:
                ask = True
            else:
                ask = requested[student] = teaching_alg.request(
                    student, obs[student], learners[student].q_values(obs[student]), intended[student], rng
                )
            if not ask:
                continue
            teacher_qs[teacher] = teaching_alg.teacher_q(teacher, learners, obs[student])
            advice[teacher] = teaching_alg.advise(teacher, teacher_qs[teacher], obs[student], intended[student], rng)

        executed = list(intended)
        for teacher in (0, 1):
            if advice[teacher] is not None:
                student = 1 - teacher
                executed[student] = behavioral_policies[student](advice[teacher])
                trace.advice_counts[teacher] += 1

        advised_any = any(a is not None for a in advice)
        jvg = reward_kind == RewardKind.JVG and advised_any
        value_before = estimate_joint_value(env, learners, jvg_rollouts) if jvg else None

        step = env.step(executed)
        reports = [
            learner.update(Transition(obs[agent], executed[agent], step.reward, step.next_obs[agent], step.done))
            for agent, learner in enumerate(learners)
        ]
        for agent in (0, 1):
            teaching_alg.observe(agent, obs[agent], reports[agent].delta_pre)

        directional = [0.0, 0.0]
        if reward_kind is not None:
            value_after = estimate_joint_value(env, learners, jvg_rollouts) if jvg else None
            for teacher in (0, 1):
                student = 1 - teacher
                if teacher_qs[teacher] is None:
                    teacher_qs[teacher] = teaching_alg.teacher_q(teacher, learners, obs[student])
                ctx = RewardContext(
                    advised=advice[teacher] is not None,
                    report=reports[student],
                    teacher_q=teacher_qs[teacher],
                    intended_action=intended[student],
                    task_reward=step.reward,
                    joint_value_before=value_before,
                    joint_value_after=value_after,
                    veg_tau=veg_tau,
                    cost=cost,
                )
                directional[teacher] = advising_reward(reward_kind, ctx, scaler)
        joint = joint_advising_reward(*directional)

        next_adv_obs = build_advising_obs(step.next_obs, *learners, teaching_alg.knowledge) if needs_adv_obs else None
        if collect:
            teaching_alg.policy_set.buffer.add(
                adv_obs.vector(), teaching_alg.actions.encoded, joint, next_adv_obs.vector(), step.done
            )

        trace.steps.append(StepRecord(
            t=len(trace.steps),
            obs=list(obs),
            intended=intended,
            requested=requested,
            advice=advice,
            executed=executed,
            reward=step.reward,
            advising_rewards=directional,
            joint_advising_reward=joint,
        ))
        trace.episode_return += discount * step.reward
        discount *= gamma
        obs, adv_obs, done = step.next_obs, next_adv_obs, step.done
    return trace


@dataclass
class Phase1Result:
    # Greedy advice-free return after each episode
    curve: List[float] = field(default_factory=list)
    # Advice-inclusive return of each training episode
    training_returns: List[float] = field(default_factory=list)
    advice_rate_curve: List[List[float]] = field(default_factory=list)
    advice_counts: List[int] = field(default_factory=lambda: [0, 0])
    steps: int = 0


def run_phase1(
    env,
    learners: Sequence,
    teaching_alg: TeachingAlgorithm,
    episodes: int,
    behavioral_policies: Sequence[BehavioralPolicy],
    rng: np.random.Generator,
    reward_kind: Optional[RewardKind] = None,
    cost: float = 0.0,
    collect: bool = False,
    veg_tau: Optional[float] = None,
    jvg_rollouts: int = 10,
    scaler: Optional[ReservoirScaler] = None,
) -> Phase1Result:
    """Task-level learning from scratch with one greedy evaluation after every episode."""
    result = Phase1Result()
    for episode in range(episodes):
        trace = run_episode(
            env, learners, teaching_alg, behavioral_policies, reward_kind, cost, rng,
            collect=collect, veg_tau=veg_tau, jvg_rollouts=jvg_rollouts, scaler=scaler,
        )
        evaluation = greedy_return(env, learners)
        result.curve.append(evaluation)
        result.training_returns.append(trace.episode_return)
        result.advice_rate_curve.append([count / trace.length for count in trace.advice_counts])
        result.advice_counts = [a + b for a, b in zip(result.advice_counts, trace.advice_counts)]
        result.steps += trace.length
        logger.debug(f"Episode {episode}: greedy return {evaluation:.4f}, advice {trace.advice_counts}")
    return result


def run_phase2(policy_set: AdvisingPolicySet, passes: int, rng: np.random.Generator) -> Phase2Stats:
    """`passes` critic + actor updates on minibatches drawn from the replay buffer."""
    losses: List[float] = []
    norms = {key: [] for key in ACTOR_KEYS}
    for _ in range(passes):
        batch = policy_set.buffer.sample(policy_set.config.batch_size, rng)
        losses.append(critic_update(policy_set, batch))
        for key, norm in actor_update(policy_set, batch, rng).items():
            norms[key].append(norm)
    return Phase2Stats(
        passes=passes,
        critic_losses=losses,
        mean_critic_loss=float(np.mean(losses)) if losses else 0.0,
        actor_grad_norms={key: float(np.mean(v)) if v else 0.0 for key, v in norms.items()},
    )
