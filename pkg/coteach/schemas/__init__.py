from coteach.schemas.enums import (
    LEARNED,
    DomainName,
    RewardKind,
    HeuristicKind,
)
from coteach.schemas.experiment import (
    DomainConfig,
    QLearnConfig,
    AdvisingConfig,
    RewardConfig,
    HeuristicConfig,
    ExperimentConfig,
)
from coteach.schemas.results import (
    Phase2Stats,
    RunResult,
    CellFailure,
    AlgorithmSummary,
    ComparisonReport,
)
from coteach.schemas.trace import StepRecord, EpisodeTrace
from coteach.schemas.policy_file import POLICY_FORMAT_VERSION, PolicyFile

__all__ = [
    "LEARNED",
    "DomainName",
    "RewardKind",
    "HeuristicKind",
    "DomainConfig",
    "QLearnConfig",
    "AdvisingConfig",
    "RewardConfig",
    "HeuristicConfig",
    "ExperimentConfig",
    "Phase2Stats",
    "RunResult",
    "CellFailure",
    "AlgorithmSummary",
    "ComparisonReport",
    "StepRecord",
    "EpisodeTrace",
    "POLICY_FORMAT_VERSION",
    "PolicyFile",
]
