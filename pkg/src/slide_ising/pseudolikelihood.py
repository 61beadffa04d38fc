"""Nodewise log pseudo-likelihood, its derivatives and support-restricted maximization.

The objective for node ``i`` is the per-sample MEAN of the log conditional

    L(J_i) = -(1/n) sum_r log(1 + exp(-2 z_i^r sum_{j != i} J_ij z_j^r)).

All work happens on the design matrix ``W[r, j] = z_i^r z_j^r`` (column ``i``
zeroed), so the margin of sample ``r`` is simply ``W[r] @ J_i``. Rows equal up
to a global spin flip give the same ``W`` row, so the dataset's distinct
patterns are used with frequency weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Dataset

DEFAULT_CAP = 15.0
GRAD_TOL = 1e-8
STEP_TOL = 1e-6
MAX_ITER = 100
MAX_HALVINGS = 30


def softplus(x):
    """``log(1 + e^x)`` without overflow."""
    x = np.asarray(x, dtype=np.float64)
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x, dtype=np.float64)))


@dataclass(frozen=True, eq=False)
class RestrictedSolution:
    """Maximizer of the node objective over a fixed support."""

    node: int
    support: tuple
    coefficients: np.ndarray
    pl_value: float
    gradient: np.ndarray
    converged: bool
    capped: bool
    iterations: int = 0

    def full(self, p: int | None = None) -> np.ndarray:
        p = self.gradient.size if p is None else p
        out = np.zeros(p)
        if self.support:
            out[list(self.support)] = self.coefficients
        return out


class NodeObjective:
    """Pseudo-likelihood of one node against a fixed dataset."""

    def __init__(self, dataset: Dataset, i: int):
        if not 0 <= i < dataset.p:
            raise IndexError(f"node {i} out of range for p={dataset.p}")
        rows, counts = dataset.patterns
        W = rows.astype(np.float64) * rows[:, i:i + 1]
        W[:, i] = 0.0
        W.setflags(write=False)
        self.W = W
        self.WT = np.ascontiguousarray(W.T)
        self.n, self.p = dataset.n, dataset.p
        self.weights = counts / self.n
        self.i = i
        self.cov = self.WT @ self.weights

    def _check(self, J_i):
        J_i = np.asarray(J_i, dtype=np.float64)
        if J_i.shape != (self.p,):
            raise ValueError(f"coefficient vector must have length {self.p}")
        if J_i[self.i] != 0:
            raise ValueError(f"self-coupling J_ii must be 0 (node {self.i})")
        return J_i

    def _value_from_margin(self, m):
        return -float(softplus(-2.0 * m) @ self.weights)

    def _gradient_from_margin(self, m):
        return self.WT @ (2.0 * sigmoid(-2.0 * m) * self.weights)

    def value(self, J_i) -> float:
        return self._value_from_margin(self.W @ self._check(J_i))

    def gradient(self, J_i) -> np.ndarray:
        return self._gradient_from_margin(self.W @ self._check(J_i))

    def hessian(self, J_i, support) -> np.ndarray:
        """Hessian restricted to ``support`` (rows/columns in the given order)."""
        m = self.W @ self._check(J_i)
        A = np.asarray(list(support), dtype=np.intp)
        q = sigmoid(-2.0 * m)
        WA = self.W[:, A]
        return -(WA.T * (4.0 * q * (1.0 - q) * self.weights)) @ WA

    def _line_search(self, WA, c, f, step):
        t = 1.0
        for _ in range(MAX_HALVINGS + 1):
            c_new = c + t * step
            m_new = WA @ c_new
            f_new = self._value_from_margin(m_new)
            if f_new >= f:
                return c_new, m_new, f_new
            t *= 0.5
        return None

    def maximize(self, support, warm_start=None, cap: float = DEFAULT_CAP,
                 tol: float = GRAD_TOL, max_iter: int = MAX_ITER) -> RestrictedSolution:
        """Damped Newton ascent over the coordinates in ``support``.

        Converged means the support gradient is below ``tol`` and the Newton
        step has collapsed; under (quasi-)separation the step never shrinks, so
        iterates run to ``cap``, get clamped, and the solution is flagged capped.
        """
        A = np.array(sorted(int(j) for j in support), dtype=np.intp)
        if self.i in A:
            raise ValueError(f"support may not contain the node itself ({self.i})")
        if A.size > self.n:
            raise ValueError(f"support size {A.size} exceeds sample count {self.n}")
        WA = np.ascontiguousarray(self.W[:, A])
        if warm_start is None:
            c = np.zeros(A.size)
        else:
            c = np.clip(np.asarray(warm_start, dtype=np.float64)[A], -cap, cap)
        m = WA @ c
        f = self._value_from_margin(m)
        converged = capped = False
        it = 0
        if A.size == 0:
            converged = True
        while not converged and it < max_iter:
            it += 1
            q = sigmoid(-2.0 * m)
            g = WA.T @ (2.0 * q * self.weights)
            negH = (WA.T * (4.0 * q * (1.0 - q) * self.weights)) @ WA
            try:
                step = np.linalg.solve(negH, g)
                if not np.all(np.isfinite(step)):
                    raise np.linalg.LinAlgError
            except np.linalg.LinAlgError:
                step = g
            if np.max(np.abs(g)) <= tol and np.max(np.abs(step)) <= STEP_TOL:
                converged = True
                break
            accepted = self._line_search(WA, c, f, step)
            if accepted is None and step is not g:
                accepted = self._line_search(WA, c, f, g)
            if accepted is None:
                # no ascent possible at machine precision
                converged = bool(np.max(np.abs(g)) <= tol)
                break
            c, m, f = accepted
            if np.max(np.abs(c)) > cap:
                c = np.clip(c, -cap, cap)
                m = WA @ c
                f = self._value_from_margin(m)
                capped = True
                break
        return RestrictedSolution(
            node=self.i, support=tuple(int(j) for j in A), coefficients=c, pl_value=f,
            gradient=self._gradient_from_margin(m), converged=converged, capped=capped,
            iterations=it)


def pl_value(J_i, dataset: Dataset, i: int) -> float:
    return NodeObjective(dataset, i).value(J_i)


def pl_gradient(J_i, dataset: Dataset, i: int) -> np.ndarray:
    return NodeObjective(dataset, i).gradient(J_i)


def pl_hessian(J_i, dataset: Dataset, i: int, support) -> np.ndarray:
    return NodeObjective(dataset, i).hessian(J_i, support)


def maximize_on_support(dataset: Dataset, i: int, support, warm_start=None,
                        cap: float = DEFAULT_CAP) -> RestrictedSolution:
    return NodeObjective(dataset, i).maximize(support, warm_start=warm_start, cap=cap)
