from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

from coteach.schemas.enums import LEARNED, DomainName, HeuristicKind, RewardKind

DEFAULT_PHASE1_EPISODES = {
    DomainName.REPEATED: 50,
    DomainName.HALLWAY: 100,
    DomainName.ROOM: 150,
}


class DomainConfig(BaseModel):
    name: DomainName = DomainName.HALLWAY
    # Overrides; None keeps the domain's default layout
    width: Optional[int] = None
    height: Optional[int] = None
    start_cells: Optional[List[Tuple[int, int]]] = None
    goal_cells: Optional[List[Tuple[int, int]]] = None
    horizon: Optional[int] = None
    # Heterogeneous teams: agent j acts in a rotated action frame
    rotation_degrees: int = 0
    behavioral: Literal["identity", "rotation"] = "identity"
    flip: Optional[Literal["horizontal", "vertical"]] = None


class QLearnConfig(BaseModel):
    learner: Literal["auto", "tabular", "tile"] = "auto"  # auto: tabular for repeated, tile-coded for grids
    alpha: float = Field(0.1, gt=0, le=1)
    gamma: float = Field(0.95, gt=0, le=1)
    epsilon: float = Field(0.1, ge=0, le=1)
    tilings: int = Field(4, ge=1)
    tile_width: float = Field(2.0, gt=0)


class AdvisingConfig(BaseModel):
    hidden_units: int = Field(32, ge=1)
    hidden_layers: int = Field(3, ge=1)
    lr: float = Field(1e-3, gt=0)
    gamma: float = Field(0.99, ge=0, le=1)
    temperature: float = Field(1.0, gt=0)
    polyak: float = Field(0.01, gt=0, le=1)
    buffer_capacity: int = Field(100_000, ge=1)
    batch_size: int = Field(64, ge=1)
    reservoir_capacity: int = Field(1000, ge=1)
    load_path: Optional[str] = None  # start from a saved advising policy set
    freeze: bool = False  # execute the loaded policies without Phase II updates


class RewardConfig(BaseModel):
    kind: RewardKind = RewardKind.VEG
    cost: float = Field(0.0, ge=0)
    veg_tau: Optional[float] = None  # None: calibrated from no-teaching reference runs
    veg_fraction: float = Field(0.8, gt=0)
    jvg_rollouts: int = Field(10, ge=1)
    scale: bool = True  # reservoir rescaling for every kind except VEG


class HeuristicConfig(BaseModel):
    threshold: float = Field(0.01, ge=0)
    budget: int = Field(100, ge=0)
    upsilon: float = Field(0.5, gt=0)
    expert_paths: Optional[List[str]] = None  # one policy file per agent
    expert_episodes: int = Field(2000, ge=1)


class ExperimentConfig(BaseModel):
    label: Optional[str] = None
    algorithm: str = LEARNED
    domain: DomainConfig = Field(default_factory=DomainConfig)
    qlearn: QLearnConfig = Field(default_factory=QLearnConfig)
    advising: AdvisingConfig = Field(default_factory=AdvisingConfig)
    rewards: RewardConfig = Field(default_factory=RewardConfig)
    heuristic: HeuristicConfig = Field(default_factory=HeuristicConfig)
    phase1_episodes: Optional[int] = Field(None, ge=0)
    phase2_episodes: int = Field(10, ge=1)
    evaluation_rollouts: int = Field(10, ge=1)
    seeds: List[int] = Field(default_factory=lambda: list(range(10)))
    out_dir: str = "results"

    @field_validator("algorithm")
    @classmethod
    def _known_algorithm(cls, value: str) -> str:
        value = value.lower()
        if value != LEARNED and value not in {k.value for k in HeuristicKind}:
            allowed = ", ".join([LEARNED] + [k.value for k in HeuristicKind])
            raise ValueError(f"Unknown algorithm '{value}'. Allowed: {allowed}")
        return value

    @model_validator(mode="after")
    def _domain_defaults(self) -> "ExperimentConfig":
        if self.phase1_episodes is None:
            self.phase1_episodes = DEFAULT_PHASE1_EPISODES[self.domain.name]
        return self

    @property
    def is_learned(self) -> bool:
        return self.algorithm == LEARNED

    @property
    def heuristic_kind(self) -> Optional[HeuristicKind]:
        return None if self.is_learned else HeuristicKind(self.algorithm)

    @property
    def display_label(self) -> str:
        if self.label:
            return self.label
        if self.is_learned:
            label = f"learned-{self.rewards.kind.value}"
        else:
            label = self.algorithm
        if self.domain.rotation_degrees:
            label += f"-rot{self.domain.rotation_degrees}"
        if self.rewards.cost and self.is_learned:
            label += f"-c{self.rewards.cost:g}"
        return label
