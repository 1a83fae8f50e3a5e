"""
Advising-level rewards for one advising direction (teacher -> student), the
joint reward, and greedy joint-value estimation.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from coteach.exceptions import ContractViolation, MissingRewardContext
from coteach.schemas.enums import RewardKind
from coteach.services.advising import ReservoirScaler, scale_reward
from coteach.services.qlearn import UpdateReport

logger = logging.getLogger(__name__)


@dataclass
class RewardContext:
    advised: bool
    report: Optional[UpdateReport] = None
    teacher_q: Optional[np.ndarray] = None
    intended_action: Optional[int] = None
    task_reward: Optional[float] = None
    joint_value_before: Optional[float] = None
    joint_value_after: Optional[float] = None
    veg_tau: Optional[float] = None
    cost: float = 0.0


_REQUIRED = {
    RewardKind.JVG: ("joint_value_before", "joint_value_after"),
    RewardKind.QTR: ("teacher_q", "intended_action"),
    RewardKind.LG: ("report",),
    RewardKind.LGG: ("report",),
    RewardKind.TDG: ("report",),
    RewardKind.VEG: ("report", "veg_tau"),
    RewardKind.TASK_REWARD: ("task_reward",),
}


def learning_measure(kind: RewardKind, ctx: RewardContext) -> float:
    """The raw (unscaled, cost-free) reward of an advised step."""
    missing = [name for name in _REQUIRED[kind] if getattr(ctx, name) is None]
    if missing:
        raise MissingRewardContext(f"{kind.value} reward needs {', '.join(missing)}")

    if kind == RewardKind.JVG:
        return float(ctx.joint_value_after - ctx.joint_value_before)
    if kind == RewardKind.QTR:
        q = np.asarray(ctx.teacher_q, dtype=float)
        return float(np.max(q) - q[ctx.intended_action])
    if kind == RewardKind.LG:
        return float(ctx.report.loss_pre - ctx.report.loss_post)
    if kind == RewardKind.LGG:
        return float(ctx.report.grad_sq_norm)
    if kind == RewardKind.TDG:
        return float(abs(ctx.report.delta_pre) - abs(ctx.report.delta_post))
    if kind == RewardKind.VEG:
        return 1.0 if ctx.report.v_hat_next > ctx.veg_tau else 0.0
    return float(ctx.task_reward)


def advising_reward(kind: RewardKind, ctx: RewardContext, scaler: Optional[ReservoirScaler] = None) -> float:
    """
    0 when the direction exchanged no advice. Otherwise the learning measure of
    `kind`, rescaled through `scaler` (never for VEG), minus the communication cost.
    """
    kind = RewardKind(kind)
    if not ctx.advised:
        return 0.0
    value = learning_measure(kind, ctx)
    if scaler is not None and kind != RewardKind.VEG:
        value = scale_reward(scaler, value)
    return value - ctx.cost


def joint_advising_reward(reward_i_to_j: float, reward_j_to_i: float) -> float:
    return float(reward_i_to_j + reward_j_to_i)


def greedy_return(env, learners: Sequence, gamma: Optional[float] = None) -> float:
    """Discounted return of one advice-free greedy episode on `env` (reset here)."""
    gamma = learners[0].gamma if gamma is None else gamma
    obs = env.reset()
    total, discount = 0.0, 1.0
    done = False
    while not done:
        actions = [learner.greedy_action(o) for learner, o in zip(learners, obs)]
        step = env.step(actions)
        total += discount * step.reward
        discount *= gamma
        obs, done = step.next_obs, step.done
    return total


def estimate_joint_value(env, learners: Sequence, rollouts: int = 10,
                         rng: Optional[np.random.Generator] = None) -> float:
    """Mean greedy discounted return from the initial state, on a scratch copy of `env`."""
    if rollouts < 1:
        raise ContractViolation(f"rollouts must be >= 1, got {rollouts}")
    scratch = env.clone()
    # greedy play on a deterministic domain repeats itself exactly
    n = 1 if getattr(scratch, "deterministic", False) else rollouts
    return float(np.mean([greedy_return(scratch, learners) for _ in range(n)]))
