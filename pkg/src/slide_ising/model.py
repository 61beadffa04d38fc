"""Ising model containers and the exact small-p distribution.

Spins are encoded as int8 values in {-1, +1} everywhere. Configuration index
``s`` of an exact table maps to spins through its bits: bit ``j`` set means
``z_j = -1``, so index 0 is the all-plus state.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

MAX_EXACT_P = 20


class DimensionTooLargeError(ValueError):
    """Raised when an exact 2^p enumeration is requested for too many nodes."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FamilyParams:
    """Bounds (minimum signal, maximum neighborhood weight, maximum degree)."""

    lam: float
    gamma: float
    d: int

    def admits(self, J: "CouplingMatrix", atol: float = 1e-12) -> bool:
        f = J.family()
        return f.lam >= self.lam - atol and f.gamma <= self.gamma + atol and f.d <= self.d


@dataclass(frozen=True, eq=False)
class CouplingMatrix:
    """Symmetric, zero-diagonal interaction matrix ``J``."""

    entries: np.ndarray

    def __post_init__(self):
        J = np.array(self.entries, dtype=np.float64)
        if J.ndim != 2 or J.shape[0] != J.shape[1]:
            raise ValueError(f"coupling matrix must be square, got shape {J.shape}")
        if not np.array_equal(J, J.T):
            raise ValueError("coupling matrix must be symmetric")
        if np.any(np.diag(J) != 0):
            raise ValueError("coupling matrix must have a zero diagonal")
        object.__setattr__(self, "entries", _frozen(J))

    @classmethod
    def zeros(cls, p: int) -> "CouplingMatrix":
        return cls(np.zeros((p, p)))

    @classmethod
    def from_edges(cls, p: int, edges) -> "CouplingMatrix":
        """Build from an iterable of ``(i, j, value)`` triples."""
        J = np.zeros((p, p))
        for i, j, v in edges:
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            J[i, j] = J[j, i] = v
        return cls(J)

    @property
    def p(self) -> int:
        return self.entries.shape[0]

    def support(self) -> np.ndarray:
        return self.entries != 0

    def edges(self) -> list[tuple[int, int, float]]:
        iu, ju = np.nonzero(np.triu(self.entries, 1))
        return [(int(i), int(j), float(self.entries[i, j])) for i, j in zip(iu, ju)]

    def degrees(self) -> np.ndarray:
        return self.support().sum(axis=1)

    def family(self) -> FamilyParams:
        """Tightest family bounds satisfied by this matrix."""
        vals = np.abs(self.entries[np.triu(self.support(), 1)])
        lam = float(vals.min()) if vals.size else float("inf")
        gamma = float(np.abs(self.entries).sum(axis=1).max()) if self.p else 0.0
        d = int(self.degrees().max()) if self.p else 0
        return FamilyParams(lam=lam, gamma=gamma, d=d)

    def __eq__(self, other):
        if not isinstance(other, CouplingMatrix):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Dataset:
    """``n x p`` matrix of +-1 spins, one row per sample."""

    spins: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.spins)
        if z.ndim != 2:
            raise ValueError(f"spins must be a 2-d array, got ndim={z.ndim}")
        if z.size and not np.all((z == 1) | (z == -1)):
            raise ValueError("spins must take values in {-1, +1}")
        object.__setattr__(self, "spins", _frozen(z.astype(np.int8, copy=True)))

    @property
    def n(self) -> int:
        return self.spins.shape[0]

    @property
    def p(self) -> int:
        return self.spins.shape[1]

    @cached_property
    def patterns(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct rows up to a global sign flip, with their multiplicities.

        Every pairwise product ``z_i z_j`` is invariant under ``z -> -z``, so
        this is all the pseudo-likelihood ever needs.
        """
        z = self.spins * self.spins[:, :1] if self.p else self.spins
        if self.p <= 62:
            key = (z < 0).astype(np.int64) @ (np.int64(1) << np.arange(self.p, dtype=np.int64))
            _, idx, counts = np.unique(key, return_index=True, return_counts=True)
            rows = z[idx]
        else:
            rows, counts = np.unique(z, axis=0, return_counts=True)
        rows.setflags(write=False)
        return rows, counts

    def moments(self) -> np.ndarray:
        """Empirical pairwise moments ``E[z_i z_j]``."""
        z = self.spins.astype(np.float64)
        return z.T @ z / self.n

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return np.array_equal(self.spins, other.spins)

    __hash__ = None


def configurations(p: int, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Spin rows for configuration indices ``start..stop-1``."""
    stop = 2**p if stop is None else stop
    idx = np.arange(start, stop, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(p, dtype=np.int64)) & 1
    return (1 - 2 * bits).astype(np.int8)


@dataclass(frozen=True, eq=False)
class ExactDistribution:
    p: int
    log_partition: float
    probabilities: np.ndarray

    def configurations(self) -> np.ndarray:
        return configurations(self.p)

    def prob(self, z) -> float:
        z = np.asarray(z)
        idx = int(((z < 0).astype(np.int64) << np.arange(self.p)).sum())
        return float(self.probabilities[idx])

    def moments(self) -> np.ndarray:
        """Exact ``E[z_i z_j]`` under the distribution."""
        out = np.zeros((self.p, self.p))
        chunk = 1 << 16
        for start in range(0, 2**self.p, chunk):
            z = configurations(self.p, start, min(start + chunk, 2**self.p)).astype(np.float64)
            w = self.probabilities[start:start + len(z)]
            out += (z * w[:, None]).T @ z
        return out


def _energies(J: np.ndarray) -> np.ndarray:
    p = J.shape[0]
    total = 2**p
    out = np.empty(total)
    chunk = 1 << 16
    for start in range(0, total, chunk):
        stop = min(start + chunk, total)
        z = configurations(p, start, stop).astype(np.float64)
        # sum_{i<j} J_ij z_i z_j = z^T J z / 2
        out[start:stop] = 0.5 * np.einsum("ri,ri->r", z @ J, z)
    return out


def exact_distribution(J: CouplingMatrix) -> ExactDistribution:
    """Enumerate all ``2^p`` configurations of the Ising model ``J``."""
    if J.p > MAX_EXACT_P:
        raise DimensionTooLargeError(
            f"exact enumeration needs p <= {MAX_EXACT_P}, got p={J.p}")
    e = _energies(J.entries)
    m = e.max()
    log_z = float(m + np.log(np.exp(e - m).sum()))
    probs = np.exp(e - log_z)
    return ExactDistribution(p=J.p, log_partition=log_z, probabilities=_frozen(probs))


def conditional_prob(J_i, z, i: int) -> float:
    """``P(z_i | z_{-i})`` for the current value of ``z_i``."""
    J_i = np.asarray(J_i, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    field = J_i @ z - J_i[i] * z[i]
    return float(1.0 / (1.0 + np.exp(-2.0 * z[i] * field)))
