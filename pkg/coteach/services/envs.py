"""
Benchmark Dec-POMDPs: the repeated matrix game and the Hallway/Room grid worlds.

All domains are deterministic two-agent state machines with a shared reward.
Each agent observes only its own cell (or the step index in the repeated game).
"""
import copy
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from coteach.exceptions import ConfigError, ContractViolation
from coteach.schemas.enums import DomainName
from coteach.schemas.experiment import DomainConfig

logger = logging.getLogger(__name__)

GAMMA = 0.95

HALLWAY_ACTIONS = ("left", "right")
ROOM_ACTIONS = ("up", "right", "down", "left")
_MOVES = {"up": (0, -1), "right": (1, 0), "down": (0, 1), "left": (-1, 0)}

JointObservation = Tuple[int, ...]


@dataclass(frozen=True)
class StepResult:
    reward: float
    next_obs: JointObservation
    done: bool


class DecPOMDP:
    """Shared plumbing for the benchmark domains."""

    name: str = ""
    n_agents: int = 2
    deterministic: bool = True

    def __init__(self, horizon: int):
        if horizon < 1:
            raise ConfigError(f"horizon must be >= 1, got {horizon}")
        self.horizon = horizon
        self.t = 0
        self.done = False

    @property
    def n_actions(self) -> Tuple[int, ...]:
        raise NotImplementedError

    @property
    def observation_count(self) -> int:
        raise NotImplementedError

    def _check_step(self, joint_action: Sequence[int]) -> Tuple[int, ...]:
        if self.done:
            raise ContractViolation("step() called on a finished episode; call reset() first")
        if len(joint_action) != self.n_agents:
            raise ContractViolation(f"expected {self.n_agents} actions, got {len(joint_action)}")
        actions = tuple(int(a) for a in joint_action)
        for agent, action in enumerate(actions):
            if not 0 <= action < self.n_actions[agent]:
                raise ContractViolation(f"agent {agent} action {action} outside [0, {self.n_actions[agent]})")
        return actions

    def clone(self) -> "DecPOMDP":
        return copy.deepcopy(self)


class RepeatedGame(DecPOMDP):
    """Two agents play a fixed 2x2 cooperative matrix game for `horizon` steps."""

    name = DomainName.REPEATED.value
    PAYOFF = ((0.0, 1.0), (0.1, 0.0))

    def __init__(self, horizon: int = 5):
        super().__init__(horizon)
        self.payoff = np.array(self.PAYOFF)

    @property
    def n_actions(self) -> Tuple[int, ...]:
        return (2, 2)

    @property
    def observation_count(self) -> int:
        # step indices 0..horizon; the last one is only seen as a terminal next observation
        return self.horizon + 1

    def reset(self, rng: Optional[np.random.Generator] = None) -> JointObservation:
        self.t = 0
        self.done = False
        return (0, 0)

    def step(self, joint_action: Sequence[int]) -> StepResult:
        a_i, a_j = self._check_step(joint_action)
        reward = float(self.payoff[a_i, a_j])
        self.t += 1
        self.done = self.t >= self.horizon
        return StepResult(reward=reward, next_obs=(self.t, self.t), done=self.done)

    def optimal_value(self, gamma: float = GAMMA) -> float:
        best = float(self.payoff.max())
        return float(sum(best * gamma**t for t in range(self.horizon)))


class GridWorld(DecPOMDP):
    """
    Two agents on a width x height grid. The team earns +1 on the transition that
    first puts the agents on the two distinct goal cells (either assignment), which
    also ends the episode. Off-grid moves leave the agent in place and agents may
    share a cell.
    """

    def __init__(
        self,
        name: str,
        width: int,
        height: int,
        start_cells: Sequence[Tuple[int, int]],
        goal_cells: Sequence[Tuple[int, int]],
        horizon: int,
        actions: Sequence[str],
    ):
        super().__init__(horizon)
        self.name = name
        self.width = width
        self.height = height
        self.start_cells = tuple(tuple(c) for c in start_cells)
        self.goal_cells = tuple(tuple(c) for c in goal_cells)
        self.actions = tuple(actions)
        if len(self.start_cells) != 2 or len(self.goal_cells) != 2:
            raise ConfigError("grid domains need exactly two start cells and two goal cells")
        if self.goal_cells[0] == self.goal_cells[1]:
            raise ConfigError("goal cells must be distinct")
        for cell in self.start_cells + self.goal_cells:
            if not self.inside(cell):
                raise ConfigError(f"cell {cell} is outside the {width}x{height} grid")
        unknown = [a for a in self.actions if a not in _MOVES]
        if unknown:
            raise ConfigError(f"unknown grid actions: {unknown}")
        self._deltas = tuple(_MOVES[a] for a in self.actions)
        self.positions = list(self.start_cells)

    @property
    def n_actions(self) -> Tuple[int, ...]:
        return (len(self.actions), len(self.actions))

    @property
    def observation_count(self) -> int:
        return self.width * self.height

    def inside(self, cell: Tuple[int, int]) -> bool:
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height

    def cell_index(self, cell: Tuple[int, int]) -> int:
        x, y = cell
        return y * self.width + x

    def cell_of(self, index: int) -> Tuple[int, int]:
        return (index % self.width, index // self.width)

    def move(self, cell: Tuple[int, int], action: int) -> Tuple[int, int]:
        dx, dy = self._deltas[action]
        target = (cell[0] + dx, cell[1] + dy)
        return target if self.inside(target) else cell

    def is_success(self, positions: Sequence[Tuple[int, int]]) -> bool:
        return positions[0] != positions[1] and set(positions) == set(self.goal_cells)

    def observe(self) -> JointObservation:
        return tuple(self.cell_index(p) for p in self.positions)

    def reset(self, rng: Optional[np.random.Generator] = None) -> JointObservation:
        self.positions = list(self.start_cells)
        self.t = 0
        self.done = False
        return self.observe()

    def step(self, joint_action: Sequence[int]) -> StepResult:
        actions = self._check_step(joint_action)
        self.positions = [self.move(p, a) for p, a in zip(self.positions, actions)]
        self.t += 1
        success = self.is_success(self.positions)
        self.done = success or self.t >= self.horizon
        return StepResult(reward=1.0 if success else 0.0, next_obs=self.observe(), done=self.done)

    def transition_table(self) -> np.ndarray:
        """next_cell[c, a] for every cell index and action."""
        table = np.empty((self.observation_count, len(self.actions)), dtype=np.int64)
        for index in range(self.observation_count):
            cell = self.cell_of(index)
            for action in range(len(self.actions)):
                table[index, action] = self.cell_index(self.move(cell, action))
        return table

    def optimal_value(self, gamma: float = GAMMA) -> float:
        """Finite-horizon backward induction over joint cells from the start state."""
        n = self.observation_count
        nxt = self.transition_table()
        success = np.zeros((n, n))
        g0, g1 = (self.cell_index(g) for g in self.goal_cells)
        success[g0, g1] = success[g1, g0] = 1.0

        n_i = nxt[:, None, :, None]
        n_j = nxt[None, :, None, :]
        reward = success[n_i, n_j]
        value = np.zeros((n, n))
        for _ in range(self.horizon):
            q = reward + gamma * (1.0 - reward) * value[n_i, n_j]
            value = q.max(axis=(2, 3))
        s_i, s_j = (self.cell_index(c) for c in self.start_cells)
        return float(value[s_i, s_j])

    def flipped(self, axis: str) -> "GridWorld":
        if axis == "horizontal":
            mirror = lambda c: (self.width - 1 - c[0], c[1])  # noqa: E731
        elif axis == "vertical":
            mirror = lambda c: (c[0], self.height - 1 - c[1])  # noqa: E731
        else:
            raise ConfigError(f"unknown flip axis '{axis}' (use horizontal or vertical)")
        return GridWorld(
            name=self.name,
            width=self.width,
            height=self.height,
            start_cells=[mirror(c) for c in self.start_cells],
            goal_cells=[mirror(c) for c in self.goal_cells],
            horizon=self.horizon,
            actions=self.actions,
        )


class Corridor(DecPOMDP):
    """Single-agent 1-D corridor with a fixed goal; the oracle domain for task learners."""

    name = "corridor"
    n_agents = 1

    def __init__(self, length: int = 17, start: int = 8, goal: int = 16, horizon: int = 200):
        super().__init__(horizon)
        if not (0 <= start < length and 0 <= goal < length) or start == goal:
            raise ConfigError("corridor start and goal must be distinct cells inside the corridor")
        self.length = length
        self.start = start
        self.goal = goal
        self.position = start

    @property
    def n_actions(self) -> Tuple[int, ...]:
        return (2,)

    @property
    def observation_count(self) -> int:
        return self.length

    def reset(self, rng: Optional[np.random.Generator] = None) -> JointObservation:
        self.position = self.start
        self.t = 0
        self.done = False
        return (self.position,)

    def step(self, joint_action: Sequence[int]) -> StepResult:
        (action,) = self._check_step(joint_action)
        self.position = min(max(self.position + (1 if action == 1 else -1), 0), self.length - 1)
        self.t += 1
        success = self.position == self.goal
        self.done = success or self.t >= self.horizon
        return StepResult(reward=1.0 if success else 0.0, next_obs=(self.position,), done=self.done)

    def optimal_value(self, gamma: float = GAMMA) -> float:
        distance = abs(self.goal - self.start)
        return gamma ** (distance - 1) if distance <= self.horizon else 0.0


@dataclass(frozen=True)
class ActionRotation:
    """Quarter-turn rotation of a cyclic action listing (up/right/down/left or left/right)."""

    degrees: int = 0
    n_actions: int = 4

    def __post_init__(self):
        if self.n_actions not in (2, 4):
            raise ConfigError(f"rotations need 2 or 4 actions, got {self.n_actions}")
        quarter = 360 // self.n_actions
        if self.degrees % quarter:
            raise ConfigError(f"{self.degrees} degrees is not a rotation of a {self.n_actions}-action space")

    @property
    def shift(self) -> int:
        return (self.degrees // (360 // self.n_actions)) % self.n_actions

    @property
    def permutation(self) -> Tuple[int, ...]:
        return tuple((k + self.shift) % self.n_actions for k in range(self.n_actions))

    def _check(self, index: int) -> int:
        if not 0 <= index < self.n_actions:
            raise ContractViolation(f"action index {index} outside [0, {self.n_actions})")
        return int(index)

    def rotate(self, index: int) -> int:
        return (self._check(index) + self.shift) % self.n_actions

    def inverse(self, index: int) -> int:
        return (self._check(index) - self.shift) % self.n_actions


def rotate_action(rotation: ActionRotation, action_index: int) -> int:
    return rotation.rotate(action_index)


class HeterogeneousActions:
    """
    Wraps a domain so that one agent acts in a rotated action frame: its index k
    executes the shared-frame action rotation.inverse(k). Everything else is
    delegated to the wrapped domain.
    """

    def __init__(self, env: DecPOMDP, rotation: ActionRotation, agent: int = 1):
        self.env = env
        self.rotation = rotation
        self.agent = agent

    def __getattr__(self, name):
        # copy and pickle look up dunders before __init__ has run
        if name == "env" or name.startswith("__"):
            raise AttributeError(name)
        return getattr(self.env, name)

    def step(self, joint_action: Sequence[int]) -> StepResult:
        actions = list(joint_action)
        actions[self.agent] = self.rotation.inverse(actions[self.agent])
        return self.env.step(actions)

    def clone(self) -> "HeterogeneousActions":
        return copy.deepcopy(self)


def flip(env, axis: str):
    """Mirror start and goal cells of a grid domain across `axis`."""
    if isinstance(env, HeterogeneousActions):
        return HeterogeneousActions(flip(env.env, axis), env.rotation, env.agent)
    if not isinstance(env, GridWorld):
        raise ContractViolation(f"only grid domains can be flipped, not '{env.name}'")
    return env.flipped(axis)


def make_env(domain: DomainConfig):
    """Build a domain from its config section, applying overrides, flip and rotation."""
    if domain.name == DomainName.REPEATED:
        if domain.flip:
            raise ConfigError("the repeated game cannot be flipped")
        env = RepeatedGame(horizon=domain.horizon or 5)
    elif domain.name == DomainName.HALLWAY:
        env = GridWorld(
            name=DomainName.HALLWAY.value,
            width=domain.width or 17,
            height=domain.height or 1,
            start_cells=domain.start_cells or [(6, 0), (10, 0)],
            goal_cells=domain.goal_cells or [(0, 0), (16, 0)],
            horizon=domain.horizon or 30,
            actions=HALLWAY_ACTIONS,
        )
    else:
        env = GridWorld(
            name=DomainName.ROOM.value,
            width=domain.width or 17,
            height=domain.height or 5,
            start_cells=domain.start_cells or [(6, 2), (10, 2)],
            goal_cells=domain.goal_cells or [(0, 2), (16, 2)],
            horizon=domain.horizon or 60,
            actions=ROOM_ACTIONS,
        )

    if domain.flip:
        env = flip(env, domain.flip)
    if domain.rotation_degrees % 360:
        rotation = ActionRotation(domain.rotation_degrees, env.n_actions[1])
        env = HeterogeneousActions(env, rotation, agent=1)
    logger.debug(f"Built domain {env.name} (rotation={domain.rotation_degrees}, flip={domain.flip})")
    return env
