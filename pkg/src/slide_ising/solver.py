"""Best-subset pseudo-likelihood reconstruction by splicing.

Three nested loops: for every node, for every neighborhood size ``d``, swap
low-importance active neighbors for high-importance inactive ones until no
swap improves the objective by more than ``sigma(d)``; then pick ``d`` by the
information criterion and finally symmetrize and threshold the columns.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .model import CouplingMatrix, Dataset
from .pseudolikelihood import DEFAULT_CAP, NodeObjective, RestrictedSolution

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SlideConfig:
    """Hyperparameters of the reconstruction.

    ``None`` fields are resolved from the data: ``d_max`` from the sample
    size, ``tau`` from ``lam`` (``lam / 2``, else 0), the coefficient cap from
    ``gamma`` (``2 * gamma``, else 15), ``s_max`` to the current ``d``.
    """

    d_max: int | None = None
    sigma_const: float = 0.01
    s_max: int | None = None
    tau: float | None = None
    lam: float | None = None
    gamma: float | None = None
    cap: float | None = None
    threads: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.d_max is not None and self.d_max < 0:
            raise ValueError("d_max must be >= 0")
        if self.sigma_const < 0:
            raise ValueError("sigma_const must be >= 0")
        if self.tau is not None and self.tau < 0:
            raise ValueError("tau must be >= 0")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def resolved_d_max(self, n: int, p: int) -> int:
        limit = min(p - 1, n // 2)
        if self.d_max is not None:
            return max(0, min(self.d_max, limit))
        if p < 2:
            return 0
        return max(1, min(math.ceil(n / (math.log(p) * math.log(math.log(n)))), limit))

    def resolved_tau(self) -> float:
        if self.tau is not None:
            return self.tau
        return self.lam / 2 if self.lam is not None else 0.0

    def resolved_cap(self) -> float:
        if self.cap is not None:
            return self.cap
        return 2.0 * self.gamma if self.gamma is not None else DEFAULT_CAP

    def sigma(self, d: int, n: int, p: int) -> float:
        return self.sigma_const * gic_penalty(d, n, p)

    def as_dict(self) -> dict:
        return {"d_max": self.d_max, "sigma_const": self.sigma_const, "s_max": self.s_max,
                "tau": self.tau, "lambda": self.lam, "gamma": self.gamma, "cap": self.cap,
                "threads": self.threads, "seed": self.seed}


def gic_penalty(d: int, n: int, p: int) -> float:
    """``d log p log log n / n``: the criterion penalty on the mean scale."""
    if n < 3:
        raise ValueError(f"need n >= 3 for log log n > 0, got n={n}")
    if d == 0:
        return 0.0
    return d * math.log(p) * math.log(math.log(n)) / n


def gic(solution: RestrictedSolution, d: int, n: int, p: int, config: SlideConfig | None = None) -> float:
    return solution.pl_value - gic_penalty(d, n, p)


@dataclass(frozen=True, eq=False)
class SplicingState:
    active: tuple
    solution: RestrictedSolution
    k: int = 0


def _complement(node: int, active, p: int) -> list[int]:
    act = set(active)
    return [j for j in range(p) if j != node and j not in act]


def importance_sets(state: SplicingState, s: int) -> tuple[list[int], list[int]]:
    """The ``s`` weakest active and ``s`` strongest inactive candidates.

    Active members rank by squared coefficient (ascending), inactive ones by
    squared gradient (descending); ties go to the smaller node index.
    """
    sol = state.solution
    if not 1 <= s <= len(state.active):
        raise ValueError(f"s={s} outside 1..{len(state.active)}")
    coef = dict(zip(sol.support, sol.coefficients))
    backward = sorted(state.active, key=lambda j: (coef[j] ** 2, j))[:s]
    comp = _complement(sol.node, state.active, sol.gradient.size)
    forward = sorted(comp, key=lambda j: (-sol.gradient[j] ** 2, j))[:s]
    return sorted(backward), sorted(forward)


def splice_once(state: SplicingState, d: int, config: SlideConfig,
                objective: NodeObjective) -> tuple[SplicingState, bool]:
    """Try swap sizes ``s = 1..d`` in order and adopt the first that helps."""
    sigma = config.sigma(d, objective.n, objective.p)
    n_comp = objective.p - 1 - len(state.active)
    s_top = min(d, n_comp, config.s_max if config.s_max is not None else d)
    cap = config.resolved_cap()
    warm = state.solution.full(objective.p)
    for s in range(1, s_top + 1):
        out_set, in_set = importance_sets(state, s)
        trial = (set(state.active) - set(out_set)) | set(in_set)
        cand = objective.maximize(trial, warm_start=warm, cap=cap)
        if cand.pl_value - state.solution.pl_value > sigma:
            return SplicingState(active=cand.support, solution=cand, k=state.k + 1), True
    return state, False


def _initial_support(objective: NodeObjective, d: int, warm: RestrictedSolution | None) -> list[int]:
    if warm is None:
        base, grad, coef = [], objective.cov, {}
    else:
        base, grad = list(warm.support), warm.gradient
        coef = dict(zip(warm.support, warm.coefficients))
    comp = _complement(objective.i, base, objective.p)
    ranked = sorted(comp, key=lambda j: (-grad[j] ** 2, j))
    # at least the strongest outside candidate joins, then fill/trim to exactly d
    A = base + ranked[:1]
    A += ranked[1:1 + max(0, d - len(A))]
    if len(A) > d:
        A = sorted(A, key=lambda j: (-(coef.get(j, 0.0) ** 2), j))[:d]
    return sorted(A)


def _solve_fixed_d(objective, d, warm, config):
    cap = config.resolved_cap()
    A0 = _initial_support(objective, d, warm)
    warm_vec = warm.full(objective.p) if warm is not None else None
    state = SplicingState(active=tuple(A0), solution=objective.maximize(A0, warm_start=warm_vec, cap=cap))
    accepted = True
    while accepted:
        state, accepted = splice_once(state, d, config, objective)
    return state.solution, state.k


def solve_fixed_d(dataset: Dataset | NodeObjective, i: int, d: int,
                  warm: RestrictedSolution | None, config: SlideConfig) -> RestrictedSolution:
    """Splicing fixpoint for neighborhood size ``d`` of node ``i``.

    ``warm`` is the size ``d - 1`` solution; ``None`` starts from the empty model.
    """
    objective = dataset if isinstance(dataset, NodeObjective) else NodeObjective(dataset, i)
    if not 1 <= d <= objective.p - 1:
        raise ValueError(f"d={d} outside 1..{objective.p - 1}")
    return _solve_fixed_d(objective, d, warm, config)[0]


@dataclass(frozen=True, eq=False)
class NodeSolution:
    node: int
    per_d: list
    chosen_d: int
    chosen: RestrictedSolution
    gic_values: np.ndarray
    splices: list = field(default_factory=list)

    def trace(self) -> dict:
        return {"node": self.node, "chosen_d": self.chosen_d,
                "gic": [float(v) for v in self.gic_values],
                "pl": [float(s.pl_value) for s in self.per_d],
                "supports": [list(s.support) for s in self.per_d],
                "splices": list(self.splices),
                "capped": [bool(s.capped) for s in self.per_d]}


def solve_node(dataset: Dataset | NodeObjective, i: int, config: SlideConfig) -> NodeSolution:
    objective = dataset if isinstance(dataset, NodeObjective) else NodeObjective(dataset, i)
    n, p = objective.n, objective.p
    d_max = config.resolved_d_max(n, p)
    per_d = [objective.maximize(())]
    splices = [0]
    for d in range(1, d_max + 1):
        sol, k = _solve_fixed_d(objective, d, per_d[-1], config)
        per_d.append(sol)
        splices.append(k)
    gics = np.array([gic(s, d, n, p) for d, s in enumerate(per_d)])
    best = int(np.argmax(gics))
    log.debug("node %d: d_hat=%d splices=%s", i, best, splices)
    return NodeSolution(node=i, per_d=per_d, chosen_d=best, chosen=per_d[best],
                        gic_values=gics, splices=splices)


@dataclass(frozen=True, eq=False)
class SlideResult:
    coupling: CouplingMatrix
    nodes: list
    config: SlideConfig
    tau: float

    def trace(self) -> dict:
        return {"tau": self.tau, "config": self.config.as_dict(),
                "nodes": [ns.trace() for ns in self.nodes]}


def symmetrize(columns: np.ndarray, tau: float) -> np.ndarray:
    """Average ``J_ij`` with ``J_ji`` and zero entries whose mean is below ``tau``."""
    S = 0.5 * (columns + columns.T)
    S[np.abs(S) < tau] = 0.0
    np.fill_diagonal(S, 0.0)
    return S


def fit(dataset: Dataset, config: SlideConfig | None = None) -> SlideResult:
    config = config or SlideConfig()
    if dataset.n < 3:
        raise ValueError(f"need at least 3 samples, got {dataset.n}")
    p = dataset.p

    def run(i):
        return solve_node(dataset, i, config)

    if config.threads > 1 and p > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            nodes = list(pool.map(run, range(p)))
    else:
        nodes = [run(i) for i in range(p)]
    columns = np.vstack([ns.chosen.full(p) for ns in nodes]) if p else np.zeros((0, 0))
    tau = config.resolved_tau()
    return SlideResult(coupling=CouplingMatrix(symmetrize(columns, tau)), nodes=nodes,
                       config=config, tau=tau)


def reconstruct(dataset: Dataset, config: SlideConfig | None = None) -> CouplingMatrix:
    return fit(dataset, config).coupling


def with_known(config: SlideConfig, *, d: int | None = None, lam: float | None = None) -> SlideConfig:
    """Copy of ``config`` using a known maximum degree and/or minimum signal."""
    changes = {}
    if d is not None:
        changes["d_max"] = d
    if lam is not None:
        changes["lam"] = lam
    return replace(config, **changes)
