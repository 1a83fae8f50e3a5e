from typing import Dict, List, Optional

from pydantic import BaseModel


class Phase2Stats(BaseModel):
    passes: int
    critic_losses: List[float] = []
    mean_critic_loss: float = 0.0
    actor_grad_norms: Dict[str, float] = {}


class RunResult(BaseModel):
    label: str
    algorithm: str
    domain: str
    seed: int
    reward_kind: Optional[str] = None
    cost: float = 0.0
    # Greedy, advice-free return after each Phase I episode of the final generation
    curve: List[float]
    # Advice-inclusive epsilon-greedy return of each training episode
    training_returns: List[float] = []
    # advice_rate_curve[episode] = [rate of agent i advising j, rate of j advising i]
    advice_rate_curve: List[List[float]] = []
    advice_counts: List[int] = [0, 0]
    v_bar: float
    auc: float
    normalized_auc: float
    optimum: float
    phase2: List[Phase2Stats] = []
    policy_paths: List[str] = []

    @property
    def total_advice(self) -> int:
        return int(sum(self.advice_counts))

    @property
    def advice_per_episode(self) -> float:
        return self.total_advice / len(self.curve) if self.curve else 0.0


class CellFailure(BaseModel):
    label: str
    seed: int
    error: str


class MetricSummary(BaseModel):
    mean: float
    std: float


class AlgorithmSummary(BaseModel):
    label: str
    runs: int
    v_bar: MetricSummary
    auc: MetricSummary
    normalized_auc: MetricSummary
    advice_per_episode: MetricSummary
    best_v_bar: bool = False
    best_auc: bool = False


class ComparisonReport(BaseModel):
    algorithms: List[AlgorithmSummary]
    # p_values[metric][label_a][label_b]
    p_values: Dict[str, Dict[str, Dict[str, float]]] = {}
    failures: List[CellFailure] = []
    significance: float = 0.05
