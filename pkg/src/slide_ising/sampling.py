"""Exact (small p) and single-site Gibbs samplers."""

from __future__ import annotations

import numba
import numpy as np

from .model import CouplingMatrix, Dataset, ExactDistribution

# uniforms drawn per chunk in the Gibbs sampler
_CHUNK_DRAWS = 1 << 20


def sample_exact(dist: ExactDistribution, n: int, seed: int) -> Dataset:
    """Draw ``n`` i.i.d. configurations from an enumerated distribution."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(dist.probabilities)
    u = rng.random(n) * cdf[-1]
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), cdf.size - 1)
    bits = (idx[:, None] >> np.arange(dist.p, dtype=np.int64)) & 1
    return Dataset((1 - 2 * bits).astype(np.int8))


@numba.njit(cache=True)
def _gibbs_sweeps(z, J, u, record_every, out, out_start):
    p = z.shape[0]
    k = out_start
    for s in range(u.shape[0]):
        for i in range(p):
            h = 0.0
            for j in range(p):
                if j != i:
                    h += J[i, j] * z[j]
            if u[s, i] * (1.0 + np.exp(-2.0 * h)) < 1.0:
                z[i] = 1
            else:
                z[i] = -1
        if record_every > 0 and (s + 1) % record_every == 0:
            out[k, :] = z
            k += 1
    return k


def gibbs_sample(J: CouplingMatrix, n: int, burn_in: int | None = None,
                 thin: int = 10, seed: int = 0) -> Dataset:
    """Single-site systematic-scan Gibbs sampler.

    The chain starts from a uniformly random configuration, runs ``burn_in``
    full sweeps, then records the state after every ``thin``-th sweep until
    ``n`` samples are collected. ``burn_in`` defaults to ``100 * p``.
    """
    p = J.p
    if burn_in is None:
        burn_in = 100 * p
    if n < 1 or burn_in < 0 or thin < 1:
        raise ValueError(f"need n >= 1, burn_in >= 0, thin >= 1; got {n}, {burn_in}, {thin}")
    rng = np.random.default_rng(seed)
    Jm = np.ascontiguousarray(J.entries, dtype=np.float64)
    z = np.where(rng.random(p) < 0.5, 1, -1).astype(np.int8)
    out = np.empty((n, p), dtype=np.int8)
    sweeps_per_chunk = max(thin, (_CHUNK_DRAWS // max(p, 1)) // thin * thin)
    empty = np.empty((0, p), dtype=np.int8)

    remaining = burn_in
    while remaining > 0:
        k = min(remaining, sweeps_per_chunk)
        _gibbs_sweeps(z, Jm, rng.random((k, p)), 0, empty, 0)
        remaining -= k

    recorded = 0
    while recorded < n:
        k = min((n - recorded) * thin, sweeps_per_chunk)
        recorded = _gibbs_sweeps(z, Jm, rng.random((k, p)), thin, out, recorded)
    return Dataset(out)
