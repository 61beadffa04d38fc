"""Eigenvector layout and two-way partition of an estimated coupling matrix."""

from __future__ import annotations

import numpy as np

from .model import CouplingMatrix

_ZERO = 1e-12


def _matrix(J) -> np.ndarray:
    a = J.entries if isinstance(J, CouplingMatrix) else np.asarray(J, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or not np.allclose(a, a.T):
        raise ValueError("expected a symmetric square matrix")
    return a


def _orient(v: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(v) > _ZERO)
    if nz.size and v[nz[0]] < 0:
        v = -v
    return v


def spectral_layout(J) -> np.ndarray:
    """``p x 2`` coordinates from the eigenvectors of the two largest-|eigenvalue| modes.

    Each column has unit norm and its first nonzero coordinate positive. An
    all-zero matrix gives the first two canonical basis vectors.
    """
    a = _matrix(J)
    p = a.shape[0]
    if p < 2:
        raise ValueError("layout needs at least two nodes")
    if not np.any(a):
        return np.eye(p)[:, :2].copy()
    vals, vecs = np.linalg.eigh(a)
    order = sorted(range(p), key=lambda k: (-abs(vals[k]), k))[:2]
    return np.column_stack([_orient(vecs[:, k] / np.linalg.norm(vecs[:, k])) for k in order])


def leading_eigenvector(J) -> np.ndarray:
    """Eigenvector of the largest eigenvalue.

    When that eigenvalue is repeated (e.g. disconnected identical blocks) the
    eigenspace is resolved to its direction orthogonal to the projection of
    the all-ones vector, which contrasts the blocks instead of averaging them.
    """
    a = _matrix(J)
    vals, vecs = np.linalg.eigh(a)
    top = vals[-1]
    tol = 1e-9 * max(1.0, abs(top))
    space = vecs[:, np.abs(vals - top) <= tol]
    if space.shape[1] == 1:
        return _orient(space[:, 0])
    ones = space.T @ np.ones(a.shape[0])
    if np.linalg.norm(ones) <= _ZERO:
        return _orient(space[:, -1])
    # coefficient vectors orthogonal to the ones-projection; take the first
    basis = np.linalg.svd(ones[None, :])[2][1:]
    return _orient(space @ basis[0])


def spectral_bipartition(J) -> np.ndarray:
    """Labels in {0, 1}: 1 where the leading eigenvector is positive."""
    a = _matrix(J)
    if not np.any(a):
        return np.zeros(a.shape[0], dtype=np.int64)
    v = leading_eigenvector(a)
    return (v > _ZERO).astype(np.int64)
