"""Brute-force best-subset search, used to check the splicing solver."""

from __future__ import annotations

import itertools
import math

from .model import Dataset
from .pseudolikelihood import DEFAULT_CAP, NodeObjective

MAX_SUBSETS = 10**6


class CombinatorialBudgetError(ValueError):
    pass


def exhaustive_best_subset(dataset: Dataset | NodeObjective, i: int, d: int,
                           cap: float = DEFAULT_CAP, budget: int = MAX_SUBSETS):
    """Best support of size ``d`` for node ``i`` by full enumeration.

    Returns ``(support, pl_value)``; ties keep the lexicographically smallest
    support.
    """
    objective = dataset if isinstance(dataset, NodeObjective) else NodeObjective(dataset, i)
    others = [j for j in range(objective.p) if j != i]
    if not 0 <= d <= len(others):
        raise ValueError(f"d={d} outside 0..{len(others)}")
    count = math.comb(len(others), d)
    if count > budget:
        raise CombinatorialBudgetError(f"C({len(others)}, {d}) = {count} supports exceeds budget {budget}")
    best, best_val = None, -math.inf
    for A in itertools.combinations(others, d):
        val = objective.maximize(A, cap=cap).pl_value
        if val > best_val:
            best, best_val = A, val
    return tuple(best), best_val
