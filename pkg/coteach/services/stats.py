"""Significance testing for algorithm comparisons."""
from typing import Sequence

import numpy as np
from scipy import stats

from coteach.exceptions import ConfigError


def welch_t_test(samples_a: Sequence[float], samples_b: Sequence[float]) -> float:
    """
    Two-sided Welch p-value. Zero-variance pairs are decided by exact equality:
    1.0 when both groups hold the same constant, 0.0 when they hold different ones.
    """
    a = np.asarray(samples_a, dtype=float)
    b = np.asarray(samples_b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ConfigError(f"Welch's test needs at least 2 samples per group, got {a.size} and {b.size}")

    if np.ptp(a) == 0.0 and np.ptp(b) == 0.0:
        return 1.0 if a[0] == b[0] else 0.0
    result = stats.ttest_ind(a, b, equal_var=False)
    p_value = float(result.pvalue)
    return 1.0 if np.isnan(p_value) else p_value


def is_significant(p_value: float, significance: float = 0.05) -> bool:
    return p_value < significance
