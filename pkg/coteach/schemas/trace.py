from typing import List, Optional

from pydantic import BaseModel


class StepRecord(BaseModel):
    t: int
    obs: List[int]
    intended: List[int]
    requested: List[bool]
    # advice[k]: action teacher k advised its peer, None when no advice flowed
    advice: List[Optional[int]]
    executed: List[int]
    reward: float
    # advising_rewards[k]: reward of the direction where k is the teacher
    advising_rewards: List[float] = [0.0, 0.0]
    joint_advising_reward: float = 0.0


class EpisodeTrace(BaseModel):
    steps: List[StepRecord] = []
    episode_return: float = 0.0
    # advice_counts[k]: advice given by agent k to its peer
    advice_counts: List[int] = [0, 0]

    @property
    def length(self) -> int:
        return len(self.steps)
