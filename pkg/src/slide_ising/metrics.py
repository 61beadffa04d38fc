"""Structure and parameter recovery metrics over unordered node pairs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import CouplingMatrix


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def as_dict(self) -> dict:
        return {"tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn}


def _entries(J) -> np.ndarray:
    return J.entries if isinstance(J, CouplingMatrix) else np.asarray(J, dtype=np.float64)


def _pairs(J_hat, J_star):
    a, b = _entries(J_hat), _entries(J_star)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    iu = np.triu_indices(a.shape[0], 1)
    return a[iu], b[iu]


def confusion(J_hat, J_star) -> ConfusionCounts:
    est, true = _pairs(J_hat, J_star)
    e, t = est != 0, true != 0
    return ConfusionCounts(tp=int(np.sum(e & t)), tn=int(np.sum(~e & ~t)),
                           fp=int(np.sum(e & ~t)), fn=int(np.sum(~e & t)))


def mcc_from_counts(c: ConfusionCounts) -> float:
    denom = (c.tp + c.fp) * (c.tp + c.fn) * (c.tn + c.fp) * (c.tn + c.fn)
    if denom == 0:
        return 0.0
    return (c.tp * c.tn - c.fp * c.fn) / math.sqrt(denom)


def rates_from_counts(c: ConfusionCounts) -> tuple[float, float, float]:
    """TPR, FPR and MCC; empty denominators give TPR=1, FPR=0, MCC=0."""
    tpr = c.tp / (c.tp + c.fn) if c.tp + c.fn else 1.0
    fpr = c.fp / (c.tn + c.fp) if c.tn + c.fp else 0.0
    return tpr, fpr, mcc_from_counts(c)


def structure_metrics(J_hat, J_star) -> tuple[float, float, float, ConfusionCounts]:
    c = confusion(J_hat, J_star)
    return (*rates_from_counts(c), c)


def mse(J_hat, J_star) -> float:
    est, true = _pairs(J_hat, J_star)
    if est.size == 0:
        return 0.0
    return float(np.mean((est - true) ** 2))


def exact_recovery(J_hat, J_star) -> bool:
    est, true = _pairs(J_hat, J_star)
    return bool(np.array_equal(est != 0, true != 0))


def metrics_dict(J_hat, J_star) -> dict:
    tpr, fpr, mcc, c = structure_metrics(J_hat, J_star)
    return {"tpr": tpr, "fpr": fpr, "mcc": mcc, "mse": mse(J_hat, J_star),
            "exact_recovery": exact_recovery(J_hat, J_star), "counts": c.as_dict()}
