import enum


class DomainName(str, enum.Enum):
    REPEATED = "repeated"
    HALLWAY = "hallway"
    ROOM = "room"


class RewardKind(str, enum.Enum):
    JVG = "jvg"  # joint value gain
    QTR = "qtr"  # teacher's importance of the intended action
    LG = "lg"    # task loss reduction
    LGG = "lgg"  # squared task gradient norm
    TDG = "tdg"  # TD error reduction
    VEG = "veg"  # value estimate above threshold
    TASK_REWARD = "task_reward"  # counterexample only: rewards advice with r


class HeuristicKind(str, enum.Enum):
    NONE = "none"  # independent Q-learning, no teaching
    ASK_IMPORTANT = "ask_important"
    ASK_UNCERTAIN = "ask_uncertain"
    EARLY_ADVISING = "early_advising"
    IMPORTANCE_ADVISING = "importance_advising"
    EARLY_CORRECTING = "early_correcting"
    CORRECT_IMPORTANT = "correct_important"
    ADHOC_VISIT = "adhoc_visit"
    ADHOC_TD = "adhoc_td"


LEARNED = "learned"
