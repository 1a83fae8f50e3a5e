"""
Task-level independent Q-learners, trained online one transition at a time.

Every update returns an UpdateReport with the quantities the advising rewards
consume: TD errors and squared losses before/after the update, the squared norm
of the loss gradient and the value estimate at the new observation.
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from coteach.exceptions import ContractViolation, PolicyFormatError
from coteach.schemas.policy_file import PolicyFile

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Transition:
    obs: int
    action: int
    reward: float
    next_obs: int
    done: bool


@dataclass(frozen=True)
class UpdateReport:
    delta_pre: float
    delta_post: float
    loss_pre: float
    loss_post: float
    grad_sq_norm: float
    v_hat_next: float


class TaskLearner(ABC):
    """Linear Q-function over binary features with epsilon-greedy behaviour."""

    kind: str = ""

    def __init__(self, n_observations: int, n_actions: int, alpha: float = 0.1,
                 gamma: float = 0.95, epsilon: float = 0.1):
        self.n_observations = n_observations
        self.n_actions = n_actions
        self.alpha = alpha
        self.gamma = gamma
        self.epsilon = epsilon

    def _check_obs(self, obs: int) -> int:
        if not 0 <= obs < self.n_observations:
            raise ContractViolation(f"observation {obs} outside [0, {self.n_observations})")
        return int(obs)

    @abstractmethod
    def q_values(self, obs: int) -> np.ndarray:
        ...

    @abstractmethod
    def _active_features(self, obs: int) -> int:
        """Number of parameters per action that Q(obs, .) reads."""

    @abstractmethod
    def _increment(self, obs: int, action: int, delta: float) -> None:
        """Move Q(obs, action) by alpha * delta."""

    @abstractmethod
    def to_policy_file(self) -> PolicyFile:
        ...

    def greedy_action(self, obs: int) -> int:
        # np.argmax breaks ties towards the lowest index
        return int(np.argmax(self.q_values(obs)))

    def act(self, obs: int, rng: np.random.Generator) -> int:
        if self.epsilon > 0.0 and rng.random() < self.epsilon:
            return int(rng.integers(self.n_actions))
        return self.greedy_action(obs)

    def value_estimate(self, obs: int) -> float:
        return float(np.max(self.q_values(obs)))

    def td_error(self, transition: Transition) -> float:
        target = transition.reward
        if not transition.done:
            target += self.gamma * self.value_estimate(transition.next_obs)
        return float(target - self.q_values(transition.obs)[transition.action])

    def update(self, transition: Transition) -> UpdateReport:
        self._check_obs(transition.obs)
        self._check_obs(transition.next_obs)
        if not 0 <= transition.action < self.n_actions:
            raise ContractViolation(f"action {transition.action} outside [0, {self.n_actions})")

        delta_pre = self.td_error(transition)
        # L = delta^2 with the target held fixed: grad = -2 * delta * phi
        grad_sq_norm = 4.0 * delta_pre**2 * self._active_features(transition.obs)
        self._increment(transition.obs, transition.action, delta_pre)
        delta_post = self.td_error(transition)

        return UpdateReport(
            delta_pre=delta_pre,
            delta_post=delta_post,
            loss_pre=delta_pre**2,
            loss_post=delta_post**2,
            grad_sq_norm=grad_sq_norm,
            v_hat_next=self.value_estimate(transition.next_obs),
        )

    def _meta(self) -> dict:
        return {
            "alpha": self.alpha,
            "gamma": self.gamma,
            "epsilon": self.epsilon,
            "n_observations": self.n_observations,
            "n_actions": self.n_actions,
        }


class TabularQ(TaskLearner):
    kind = "tabular_q"

    def __init__(self, n_observations: int, n_actions: int, alpha: float = 0.1,
                 gamma: float = 0.95, epsilon: float = 0.1):
        super().__init__(n_observations, n_actions, alpha, gamma, epsilon)
        self.table = np.zeros((n_observations, n_actions))

    def q_values(self, obs: int) -> np.ndarray:
        return self.table[self._check_obs(obs)].copy()

    def _active_features(self, obs: int) -> int:
        return 1

    def _increment(self, obs: int, action: int, delta: float) -> None:
        self.table[obs, action] += self.alpha * delta

    def to_policy_file(self) -> PolicyFile:
        return PolicyFile(
            kind=self.kind,
            shapes={"table": list(self.table.shape)},
            params={"table": self.table.tolist()},
            meta=self._meta(),
        )


class TileCodedQ(TaskLearner):
    """
    Tile coding over the (column, row) coordinates of an observation. Tiling k is
    displaced by k * (1, 3) * tile_width / tilings (wrapped into one tile), so the
    tilings are asymmetrically offset. Each tile's step size is alpha / tilings.
    """

    kind = "tile_q"

    def __init__(self, n_observations: int, n_actions: int, obs_shape: Tuple[int, int],
                 tilings: int = 4, tile_width: float = 2.0, alpha: float = 0.1,
                 gamma: float = 0.95, epsilon: float = 0.1):
        super().__init__(n_observations, n_actions, alpha, gamma, epsilon)
        width, height = obs_shape
        if width * height != n_observations:
            raise ContractViolation(f"obs_shape {obs_shape} does not cover {n_observations} observations")
        self.obs_shape = (int(width), int(height))
        self.tilings = tilings
        self.tile_width = float(tile_width)

        displacement = np.array([1.0, 3.0])
        self.offsets = np.array([(k * displacement * tile_width / tilings) % tile_width for k in range(tilings)])
        self.tiles_per_dim = tuple(int(np.floor((dim - 1 + tile_width) / tile_width)) + 1 for dim in self.obs_shape)
        self.n_tiles = self.tiles_per_dim[0] * self.tiles_per_dim[1]
        self.weights = np.zeros((tilings, self.n_tiles, n_actions))
        self._tile_index = self._build_tile_index()

    def _build_tile_index(self) -> np.ndarray:
        index = np.empty((self.n_observations, self.tilings), dtype=np.int64)
        width = self.obs_shape[0]
        for obs in range(self.n_observations):
            coords = np.array([obs % width, obs // width], dtype=float)
            for k in range(self.tilings):
                tx, ty = np.floor((coords + self.offsets[k]) / self.tile_width).astype(int)
                index[obs, k] = ty * self.tiles_per_dim[0] + tx
        return index

    def q_values(self, obs: int) -> np.ndarray:
        tiles = self._tile_index[self._check_obs(obs)]
        return self.weights[np.arange(self.tilings), tiles].sum(axis=0)

    def _active_features(self, obs: int) -> int:
        return self.tilings

    def _increment(self, obs: int, action: int, delta: float) -> None:
        tiles = self._tile_index[obs]
        self.weights[np.arange(self.tilings), tiles, action] += (self.alpha / self.tilings) * delta

    def to_policy_file(self) -> PolicyFile:
        meta = self._meta()
        meta.update({"obs_shape": list(self.obs_shape), "tilings": self.tilings, "tile_width": self.tile_width})
        return PolicyFile(
            kind=self.kind,
            shapes={"weights": list(self.weights.shape)},
            params={"weights": self.weights.tolist()},
            meta=meta,
        )


def _array(pf: PolicyFile, name: str) -> np.ndarray:
    if name not in pf.params:
        raise PolicyFormatError(f"{pf.kind} policy file is missing parameter '{name}'")
    array = np.asarray(pf.params[name], dtype=float)
    expected = tuple(pf.shapes.get(name, array.shape))
    if array.shape != expected:
        raise PolicyFormatError(f"parameter '{name}' has shape {array.shape}, header says {expected}")
    return array


def learner_from_policy_file(pf: PolicyFile) -> TaskLearner:
    meta = pf.meta
    try:
        common = dict(
            n_observations=int(meta["n_observations"]),
            n_actions=int(meta["n_actions"]),
            alpha=float(meta["alpha"]),
            gamma=float(meta["gamma"]),
            epsilon=float(meta["epsilon"]),
        )
        if pf.kind == TabularQ.kind:
            learner = TabularQ(**common)
            table = _array(pf, "table")
            if table.shape != learner.table.shape:
                raise PolicyFormatError(f"table shape {table.shape} does not match {learner.table.shape}")
            learner.table = table
            return learner
        if pf.kind == TileCodedQ.kind:
            learner = TileCodedQ(
                obs_shape=tuple(meta["obs_shape"]),
                tilings=int(meta["tilings"]),
                tile_width=float(meta["tile_width"]),
                **common,
            )
            weights = _array(pf, "weights")
            if weights.shape != learner.weights.shape:
                raise PolicyFormatError(f"weights shape {weights.shape} does not match {learner.weights.shape}")
            learner.weights = weights
            return learner
    except KeyError as e:
        raise PolicyFormatError(f"{pf.kind} policy file is missing metadata {e}")
    raise PolicyFormatError(f"'{pf.kind}' is not a task-level learner policy")


def check_compatible(learner: TaskLearner, n_observations: int, n_actions: int) -> None:
    """Refuse learners whose observation/action spaces differ from the domain's."""
    if learner.n_observations != n_observations or learner.n_actions != n_actions:
        raise PolicyFormatError(
            f"policy covers {learner.n_observations} observations x {learner.n_actions} actions, "
            f"domain needs {n_observations} x {n_actions}"
        )


def make_learners(env, kind: str = "auto", alpha: float = 0.1, gamma: float = 0.95,
                  epsilon: float = 0.1, tilings: int = 4, tile_width: float = 2.0) -> list[TaskLearner]:
    """Fresh zero-initialised learners, one per agent."""
    if kind == "auto":
        kind = "tile" if hasattr(env, "width") else "tabular"
    learners: list[TaskLearner] = []
    for agent in range(env.n_agents):
        n_actions = env.n_actions[agent]
        if kind == "tabular":
            learners.append(TabularQ(env.observation_count, n_actions, alpha, gamma, epsilon))
        else:
            if not hasattr(env, "width"):
                raise ContractViolation(f"tile coding needs a grid domain, not '{env.name}'")
            learners.append(TileCodedQ(
                env.observation_count, n_actions, (env.width, env.height),
                tilings=tilings, tile_width=tile_width, alpha=alpha, gamma=gamma, epsilon=epsilon,
            ))
    return learners


def set_epsilon(learners: Sequence[TaskLearner], epsilon: float) -> None:
    for learner in learners:
        learner.epsilon = epsilon
