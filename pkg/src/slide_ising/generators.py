"""Benchmark graph generators: random regular graphs and periodic square lattices."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import networkx as nx
import numpy as np

from .model import CouplingMatrix, FamilyParams

MAX_RETRIES = 1000


class GraphGenerationError(RuntimeError):
    pass


class DegreeInfeasibleError(ValueError):
    pass


class MatchingNotFoundError(GraphGenerationError):
    pass


class Pattern(str, enum.Enum):
    FERRO = "ferro"
    FERRO_ONE_WEAK = "ferro-one-weak"
    MIXED_TWO_WEAK = "mixed-two-weak"
    FERRO_ONE_WEAK_NEGATIVE = "ferro-one-weak-negative"
    DEGREE_DISENTANGLED = "degree-disentangled"


def _edge_key(a, b):
    return (a, b) if a < b else (b, a)


def _pairing_model(p: int, d: int, rng: np.random.Generator,
                   forbidden: frozenset = frozenset()) -> list[tuple[int, int]]:
    """Random simple d-regular edge list by stub pairing with full rejection."""
    if d == 0:
        return []
    # a pairing is simple with probability about exp(-(d^2 - 1) / 4)
    tries = MAX_RETRIES * math.ceil(math.exp(min((d * d - 1) / 4, 10.0)))
    for _ in range(tries):
        stubs = np.repeat(np.arange(p), d)
        rng.shuffle(stubs)
        a, b = stubs[0::2], stubs[1::2]
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        if np.any(lo == hi):
            continue
        edges = set(zip(lo.tolist(), hi.tolist()))
        if len(edges) < len(lo) or edges & forbidden:
            continue
        return sorted(edges)
    raise GraphGenerationError(
        f"no simple {d}-regular graph on {p} nodes after {tries} pairings")


def _random_perfect_matching(edges, p: int, rng: np.random.Generator):
    g = nx.Graph()
    g.add_nodes_from(range(p))
    w = rng.random(len(edges))
    for (a, b), wi in zip(edges, w):
        g.add_edge(a, b, weight=float(wi))
    m = nx.max_weight_matching(g, maxcardinality=True)
    if 2 * len(m) != p:
        raise MatchingNotFoundError(f"graph on {p} nodes has no perfect matching")
    return sorted(_edge_key(a, b) for a, b in m)


def declared_family(pattern: Pattern, d: int, beta: float, lam: float) -> FamilyParams:
    """Family bounds a generated model is guaranteed to satisfy."""
    pattern = Pattern(pattern)
    if pattern is Pattern.FERRO:
        return FamilyParams(lam=beta, gamma=d * beta, d=d)
    lam_decl = lam if (pattern is Pattern.DEGREE_DISENTANGLED and d == 1) else min(beta, lam)
    return FamilyParams(lam=lam_decl, gamma=(d - 1) * beta + max(beta, lam), d=d)


def _assign_weights(edges, p, d, pattern, beta, lam, rng, matching=()):
    pattern = Pattern(pattern)
    gamma = declared_family(pattern, d, beta, lam).gamma
    m = len(edges)
    if pattern is Pattern.DEGREE_DISENTANGLED:
        mset = set(matching)
        return [(a, b, lam if (a, b) in mset else beta) for a, b in edges]
    if pattern is Pattern.MIXED_TWO_WEAK:
        base = np.where(rng.random(m) < 0.5, beta, -beta)
    else:
        base = np.full(m, beta)
    if pattern is Pattern.FERRO:
        return [(a, b, float(v)) for (a, b), v in zip(edges, base)]

    if pattern is Pattern.MIXED_TWO_WEAK:
        if m < 2:
            raise DegreeInfeasibleError("mixed-two-weak needs at least two edges")
        weak = [lam, -lam]
    elif pattern is Pattern.FERRO_ONE_WEAK:
        weak = [lam]
    else:
        weak = [-lam]
    for _ in range(MAX_RETRIES):
        picks = rng.choice(m, size=len(weak), replace=False)
        vals = base.copy()
        vals[picks] = weak
        rows = np.zeros(p)
        for (a, b), v in zip(edges, vals):
            rows[a] += abs(v)
            rows[b] += abs(v)
        if rows.max() <= gamma + 1e-12:
            return [(a, b, float(v)) for (a, b), v in zip(edges, vals)]
    raise GraphGenerationError("could not place weak edges within the neighborhood-weight bound")


def generate_rrg(p: int, d: int, beta: float, lam: float,
                 pattern: Pattern | str = Pattern.FERRO_ONE_WEAK, seed: int = 0) -> CouplingMatrix:
    """Random d-regular coupling matrix with the given interaction pattern.

    For ``degree-disentangled`` the graph is a random perfect matching carrying
    weight ``lam`` joined with an edge-disjoint random (d-1)-regular graph
    carrying ``beta``, so every node has neighborhood weight ``(d-1)*beta + lam``.
    """
    pattern = Pattern(pattern)
    if d < 1 or d >= p or (p * d) % 2:
        raise DegreeInfeasibleError(f"no {d}-regular simple graph on {p} nodes")
    if beta <= 0 or lam <= 0:
        raise ValueError("beta and lambda must be positive")
    rng = np.random.default_rng(seed)
    matching = ()
    if pattern is Pattern.DEGREE_DISENTANGLED:
        if p % 2:
            raise DegreeInfeasibleError("degree-disentangled needs an even number of nodes")
        perm = rng.permutation(p)
        matching = sorted(_edge_key(int(a), int(b)) for a, b in zip(perm[0::2], perm[1::2]))
        rest = _pairing_model(p, d - 1, rng, frozenset(matching))
        edges = sorted(matching + rest)
    else:
        edges = _pairing_model(p, d, rng)
    return CouplingMatrix.from_edges(p, _assign_weights(edges, p, d, pattern, beta, lam, rng, matching))


def lattice_edges(L: int) -> list[tuple[int, int]]:
    """Edges of the L x L torus; node (r, c) has index r*L + c."""
    edges = set()
    for r in range(L):
        for c in range(L):
            v = r * L + c
            edges.add(_edge_key(v, r * L + (c + 1) % L))
            edges.add(_edge_key(v, ((r + 1) % L) * L + c))
    return sorted(edges)


def generate_pbsl(L: int, beta: float, lam: float,
                  pattern: Pattern | str = Pattern.FERRO_ONE_WEAK, seed: int = 0) -> CouplingMatrix:
    """Periodic-boundary square lattice (torus) with ``p = L**2`` and ``2p`` edges."""
    pattern = Pattern(pattern)
    if L < 3:
        raise DegreeInfeasibleError(f"lattice side must be >= 3, got {L}")
    if beta <= 0 or lam <= 0:
        raise ValueError("beta and lambda must be positive")
    rng = np.random.default_rng(seed)
    p = L * L
    edges = lattice_edges(L)
    matching = ()
    if pattern is Pattern.DEGREE_DISENTANGLED:
        if p % 2:
            raise MatchingNotFoundError(f"odd lattice with {p} nodes has no perfect matching")
        matching = _random_perfect_matching(edges, p, rng)
    return CouplingMatrix.from_edges(p, _assign_weights(edges, p, 4, pattern, beta, lam, rng, matching))


@dataclass(frozen=True)
class BenchmarkModel:
    """Generator recipe for a ground-truth coupling matrix.

    ``topology`` is ``"rrg"`` (uses ``p`` and ``d``) or ``"pbsl"`` (uses ``L``).
    """

    topology: str
    pattern: Pattern
    beta: float
    lam: float
    seed: int = 0
    p: int | None = None
    d: int | None = None
    L: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "pattern", Pattern(self.pattern))
        if self.topology == "rrg":
            if self.p is None or self.d is None:
                raise ValueError("rrg needs p and d")
            if self.d < 1 or self.d >= self.p or (self.p * self.d) % 2:
                raise DegreeInfeasibleError(f"no {self.d}-regular simple graph on {self.p} nodes")
        elif self.topology == "pbsl":
            if self.L is None or self.L < 3:
                raise DegreeInfeasibleError("pbsl needs L >= 3")
            object.__setattr__(self, "p", self.L * self.L)
            object.__setattr__(self, "d", 4)
        else:
            raise ValueError(f"unknown topology {self.topology!r}")

    @property
    def family(self) -> FamilyParams:
        return declared_family(self.pattern, self.d, self.beta, self.lam)

    def build(self) -> CouplingMatrix:
        if self.topology == "rrg":
            return generate_rrg(self.p, self.d, self.beta, self.lam, self.pattern, self.seed)
        return generate_pbsl(self.L, self.beta, self.lam, self.pattern, self.seed)

    def as_dict(self) -> dict:
        out = {"topology": self.topology, "pattern": self.pattern.value,
               "beta": self.beta, "lambda": self.lam, "seed": self.seed, "p": self.p, "d": self.d}
        if self.topology == "pbsl":
            out["L"] = self.L
        return out
