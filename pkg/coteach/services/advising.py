"""
Learned advising policies: four decentralized actors (ask/teach for each agent)
trained against one centralized critic over the joint advising observation and
joint advising action.

Block order everywhere (observations, actions, replay rows):
    ask_i, ask_j, teach_i, teach_j
Student actors output 0 = keep quiet, 1 = request advice. Teacher actors output
a peer action index, with the last index meaning "no advice".
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from coteach.exceptions import ContractViolation, PolicyFormatError
from coteach.schemas.experiment import AdvisingConfig
from coteach.schemas.policy_file import PolicyFile
from coteach.services.neural import AdamState, Mlp, adam_step, gumbel_softmax, one_hot, softmax, softmax_backward

logger = logging.getLogger(__name__)

ACTOR_KEYS = ("ask_i", "ask_j", "teach_i", "teach_j")
NO_REQUEST, REQUEST = 0, 1


@dataclass
class AdvisingObsStudent:
    obs_one_hot: np.ndarray
    q: np.ndarray

    def vector(self) -> np.ndarray:
        return np.concatenate([self.obs_one_hot, self.q])


@dataclass
class AdvisingObsTeacher:
    peer_obs_one_hot: np.ndarray
    peer_q: np.ndarray
    own_q_at_peer: np.ndarray

    def vector(self) -> np.ndarray:
        return np.concatenate([self.peer_obs_one_hot, self.peer_q, self.own_q_at_peer])


@dataclass
class AdvisingObservation:
    ask_i: AdvisingObsStudent
    ask_j: AdvisingObsStudent
    teach_i: AdvisingObsTeacher
    teach_j: AdvisingObsTeacher

    def blocks(self) -> Dict[str, np.ndarray]:
        return {key: getattr(self, key).vector() for key in ACTOR_KEYS}

    def vector(self) -> np.ndarray:
        return np.concatenate([getattr(self, key).vector() for key in ACTOR_KEYS])


def build_advising_obs(joint_obs: Sequence[int], learner_i, learner_j, knowledge=None) -> AdvisingObservation:
    """
    Advising observations for both agents. `knowledge` optionally replaces the
    teachers' own Q-functions (pre-trained experts or transfer source policies)
    in the teacher blocks.
    """
    o_i, o_j = int(joint_obs[0]), int(joint_obs[1])
    teacher_i, teacher_j = knowledge if knowledge is not None else (learner_i, learner_j)
    n_obs = learner_i.n_observations
    for learner in (learner_j, teacher_i, teacher_j):
        if learner.n_observations != n_obs:
            raise ContractViolation(
                f"learners disagree on the observation encoding ({learner.n_observations} vs {n_obs})"
            )

    q_i_own = learner_i.q_values(o_i)
    q_j_own = learner_j.q_values(o_j)
    return AdvisingObservation(
        ask_i=AdvisingObsStudent(one_hot(o_i, n_obs), q_i_own),
        ask_j=AdvisingObsStudent(one_hot(o_j, n_obs), q_j_own),
        teach_i=AdvisingObsTeacher(one_hot(o_j, n_obs), q_j_own, teacher_i.q_values(o_j)),
        teach_j=AdvisingObsTeacher(one_hot(o_i, n_obs), q_i_own, teacher_j.q_values(o_i)),
    )


@dataclass
class AdvisingActionSet:
    # requests[k]: agent k asked its peer for advice
    requests: List[bool]
    # advice[k]: action teacher k offers its peer, None for "no advice"
    advice: List[Optional[int]]
    encoded: np.ndarray


@dataclass
class Minibatch:
    obs: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_obs: np.ndarray
    done: np.ndarray

    @property
    def size(self) -> int:
        return int(self.rewards.shape[0])


class ReplayBuffer:
    """Fixed-capacity FIFO of advising experiences with uniform sampling."""

    def __init__(self, capacity: int, obs_dim: int, act_dim: int):
        if capacity < 1:
            raise ContractViolation(f"replay capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_dim))
        self.actions = np.zeros((capacity, act_dim))
        self.rewards = np.zeros(capacity)
        self.next_obs = np.zeros((capacity, obs_dim))
        self.done = np.zeros(capacity)
        self._cursor = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def add(self, obs, actions, reward: float, next_obs, done: bool) -> None:
        k = self._cursor
        self.obs[k] = obs
        self.actions[k] = actions
        self.rewards[k] = reward
        self.next_obs[k] = next_obs
        self.done[k] = float(done)
        self._cursor = (k + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator) -> Minibatch:
        if self._size == 0:
            raise ContractViolation("cannot sample from an empty replay buffer")
        idx = rng.integers(self._size, size=batch_size)
        return Minibatch(
            obs=self.obs[idx],
            actions=self.actions[idx],
            rewards=self.rewards[idx],
            next_obs=self.next_obs[idx],
            done=self.done[idx],
        )


class ReservoirScaler:
    """
    Maps raw advising rewards to [-1, 1] through the empirical CDF of a uniform
    reservoir sample of every reward seen so far.
    """

    def __init__(self, capacity: int = 1000, rng: Optional[np.random.Generator] = None):
        if capacity < 1:
            raise ContractViolation(f"reservoir capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.samples: List[float] = []
        self.seen = 0

    def insert(self, value: float) -> None:
        self.seen += 1
        if len(self.samples) < self.capacity:
            self.samples.append(float(value))
            return
        slot = int(self.rng.integers(self.seen))
        if slot < self.capacity:
            self.samples[slot] = float(value)

    def cdf(self, value: float) -> float:
        if not self.samples:
            raise ContractViolation("empirical CDF of an empty reservoir")
        return float(np.mean(np.asarray(self.samples) <= value))


def scale_reward(scaler: ReservoirScaler, raw: float) -> float:
    scaler.insert(raw)
    return 2.0 * scaler.cdf(raw) - 1.0


class AdvisingPolicySet:
    def __init__(
        self,
        n_observations: int,
        n_actions: Tuple[int, int],
        config: Optional[AdvisingConfig] = None,
        rng: Optional[np.random.Generator] = None,
    ):
        self.config = config or AdvisingConfig()
        self.n_observations = int(n_observations)
        self.n_actions = (int(n_actions[0]), int(n_actions[1]))
        rng = rng if rng is not None else np.random.default_rng(0)
        nA_i, nA_j = self.n_actions

        self.obs_dims = {
            "ask_i": n_observations + nA_i,
            "ask_j": n_observations + nA_j,
            "teach_i": n_observations + nA_j + nA_i,
            "teach_j": n_observations + nA_i + nA_j,
        }
        self.act_dims = {"ask_i": 2, "ask_j": 2, "teach_i": nA_j + 1, "teach_j": nA_i + 1}
        self.obs_slices = self._slices(self.obs_dims)
        self.act_slices = self._slices(self.act_dims)
        self.obs_dim = sum(self.obs_dims.values())
        self.act_dim = sum(self.act_dims.values())

        hidden = [self.config.hidden_units] * self.config.hidden_layers
        self.actors = {key: Mlp([self.obs_dims[key], *hidden, self.act_dims[key]], rng) for key in ACTOR_KEYS}
        self.critic = Mlp([self.obs_dim + self.act_dim, *hidden, 1], rng)
        self.target_critic = self.critic.copy()
        self.actor_optims = {key: AdamState.for_params(net.params, self.config.lr) for key, net in self.actors.items()}
        self.critic_optim = AdamState.for_params(self.critic.params, self.config.lr)

        self.buffer = ReplayBuffer(self.config.buffer_capacity, self.obs_dim, self.act_dim)
        self.scaler = ReservoirScaler(self.config.reservoir_capacity, np.random.default_rng(rng.integers(2**32)))

    @staticmethod
    def _slices(dims: Dict[str, int]) -> Dict[str, slice]:
        slices, start = {}, 0
        for key in ACTOR_KEYS:
            slices[key] = slice(start, start + dims[key])
            start += dims[key]
        return slices

    @property
    def no_advice_index(self) -> Dict[str, int]:
        return {"teach_i": self.act_dims["teach_i"] - 1, "teach_j": self.act_dims["teach_j"] - 1}

    def logits(self, key: str, obs_block) -> np.ndarray:
        return self.actors[key].forward(obs_block)

    def probabilities(self, key: str, obs_block) -> np.ndarray:
        return softmax(self.logits(key, obs_block))

    def sync_target(self) -> None:
        self.target_critic = self.critic.copy()

    def encode_actions(self, indices: Dict[str, int]) -> np.ndarray:
        return np.concatenate([one_hot(indices[key], self.act_dims[key]) for key in ACTOR_KEYS])

    def greedy_joint_actions(self, obs_batch: np.ndarray) -> np.ndarray:
        parts = []
        for key in ACTOR_KEYS:
            logits = self.actors[key].forward(obs_batch[:, self.obs_slices[key]])
            parts.append(one_hot(np.argmax(logits, axis=-1), self.act_dims[key]))
        return np.concatenate(parts, axis=-1)

    def q_value(self, obs: np.ndarray, actions: np.ndarray, target: bool = False) -> np.ndarray:
        net = self.target_critic if target else self.critic
        return net.forward(np.concatenate([obs, actions], axis=-1))[..., 0]

    def to_policy_file(self) -> PolicyFile:
        params, shapes = {}, {}
        for name, net in [*self.actors.items(), ("critic", self.critic)]:
            for k, p in enumerate(net.params):
                params[f"{name}.{k}"] = p.tolist()
                shapes[f"{name}.{k}"] = list(p.shape)
        return PolicyFile(
            kind="advising_set",
            shapes=shapes,
            params=params,
            meta={
                "n_observations": self.n_observations,
                "n_actions": list(self.n_actions),
                "config": self.config.model_dump(),
            },
        )

    @classmethod
    def from_policy_file(cls, pf: PolicyFile, rng: Optional[np.random.Generator] = None) -> "AdvisingPolicySet":
        if pf.kind != "advising_set":
            raise PolicyFormatError(f"'{pf.kind}' is not an advising policy set")
        try:
            config = AdvisingConfig.model_validate(pf.meta["config"])
            policy_set = cls(int(pf.meta["n_observations"]), tuple(pf.meta["n_actions"]), config, rng)
            for name, net in [*policy_set.actors.items(), ("critic", policy_set.critic)]:
                net.load_params([np.asarray(pf.params[f"{name}.{k}"], dtype=float) for k in range(len(net.params))])
        except KeyError as e:
            raise PolicyFormatError(f"advising policy file is missing {e}")
        except ContractViolation as e:
            raise PolicyFormatError(f"advising policy file does not fit its own header: {e}")
        policy_set.sync_target()
        return policy_set


def select_advising_actions(
    policy_set: AdvisingPolicySet,
    adv_obs: AdvisingObservation,
    rng: Optional[np.random.Generator] = None,
    mode: str = "sample",
) -> AdvisingActionSet:
    """Each actor sees only its own observation block."""
    blocks = adv_obs.blocks()
    indices: Dict[str, int] = {}
    for key in ACTOR_KEYS:
        logits = policy_set.logits(key, blocks[key])
        if mode == "greedy":
            indices[key] = int(np.argmax(logits))
        elif mode == "sample":
            hard, _ = gumbel_softmax(logits, policy_set.config.temperature, rng)
            indices[key] = int(np.argmax(hard))
        else:
            raise ContractViolation(f"unknown selection mode '{mode}'")

    no_advice = policy_set.no_advice_index
    advice = [
        None if indices[key] == no_advice[key] else indices[key]
        for key in ("teach_i", "teach_j")
    ]
    return AdvisingActionSet(
        requests=[indices["ask_i"] == REQUEST, indices["ask_j"] == REQUEST],
        advice=advice,
        encoded=policy_set.encode_actions(indices),
    )


def critic_update(policy_set: AdvisingPolicySet, batch: Minibatch) -> float:
    """One Adam step on the mean squared TD error; returns the loss before the step."""
    if batch.size == 0:
        raise ContractViolation("critic_update needs a non-empty minibatch")
    gamma = policy_set.config.gamma
    next_actions = policy_set.greedy_joint_actions(batch.next_obs)
    target = batch.rewards + gamma * (1.0 - batch.done) * policy_set.q_value(batch.next_obs, next_actions, target=True)

    x = np.concatenate([batch.obs, batch.actions], axis=-1)
    q = policy_set.critic.forward(x)[:, 0]
    error = q - target
    loss = float(np.mean(error**2))

    grads, _ = policy_set.critic.backward(x, (2.0 * error / batch.size)[:, None])
    adam_step(policy_set.critic.params, grads, policy_set.critic_optim)

    tau = policy_set.config.polyak
    for target_p, p in zip(policy_set.target_critic.params, policy_set.critic.params):
        target_p *= 1.0 - tau
        target_p += tau * p
    return loss


def _actor_objective(
    policy_set: AdvisingPolicySet,
    key: str,
    batch: Minibatch,
    noise: np.ndarray,
    straight_through: bool = True,
) -> Tuple[float, List[np.ndarray]]:
    """
    J = mean Q(o, a) with actor `key`'s action replaced by its Gumbel-Softmax
    sample and the other actors' actions taken from the batch. Returns J and its
    gradient with respect to the actor parameters.
    """
    actor = policy_set.actors[key]
    obs_block = batch.obs[:, policy_set.obs_slices[key]]
    logits = actor.forward(obs_block)
    tau = policy_set.config.temperature
    hard, soft = gumbel_softmax(logits, tau, noise=noise)

    actions = batch.actions.copy()
    actions[:, policy_set.act_slices[key]] = hard if straight_through else soft
    x = np.concatenate([batch.obs, actions], axis=-1)
    q = policy_set.critic.forward(x)[:, 0]
    objective = float(np.mean(q))

    _, input_grad = policy_set.critic.backward(x, np.full((batch.size, 1), 1.0 / batch.size))
    action_grad = input_grad[:, batch.obs.shape[1]:][:, policy_set.act_slices[key]]
    logit_grad = softmax_backward(soft, action_grad) / tau
    param_grads, _ = actor.backward(obs_block, logit_grad)
    return objective, param_grads


def actor_update(
    policy_set: AdvisingPolicySet,
    batch: Minibatch,
    rng: np.random.Generator,
) -> Dict[str, float]:
    """One gradient-ascent Adam step per actor; returns each actor's gradient norm."""
    if batch.size == 0:
        raise ContractViolation("actor_update needs a non-empty minibatch")
    norms = {}
    for key in ACTOR_KEYS:
        noise = rng.gumbel(size=(batch.size, policy_set.act_dims[key]))
        _, grads = _actor_objective(policy_set, key, batch, noise)
        norms[key] = float(np.sqrt(sum(np.sum(g**2) for g in grads)))
        adam_step(policy_set.actors[key].params, [-g for g in grads], policy_set.actor_optims[key])
    return norms
