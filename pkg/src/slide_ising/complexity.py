"""Empirical sample complexity: the smallest n at which reconstruction is exact.

A cell (one benchmark model) is scanned on a geometric grid of sample sizes;
at each size a batch of independently seeded datasets is reconstructed and the
size passes when the fraction of exact recoveries reaches the threshold. The
first passing grid point is then refined by bisection against the last
failing one.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .generators import BenchmarkModel
from .metrics import exact_recovery
from .model import MAX_EXACT_P, CouplingMatrix, exact_distribution
from .sampling import gibbs_sample, sample_exact
from .solver import SlideConfig, reconstruct

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ComplexityProtocol:
    trials: int = 45
    success_threshold: float = 1.0
    n_start: int = 100
    factor: float = 1.3
    max_n: int = 200_000
    refine_tol: float = 0.05
    # stop a batch as soon as its pass/fail outcome is decided
    early_stop: bool = True
    sampler: str = "auto"
    burn_in: int | None = None
    thin: int = 10

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0.0 <= self.success_threshold <= 1.0:
            raise ValueError("success_threshold must lie in [0, 1]")
        if self.factor <= 1.0:
            raise ValueError("grid factor must exceed 1")
        if self.n_start < 3 or self.max_n < self.n_start:
            raise ValueError("need 3 <= n_start <= max_n")
        if self.sampler not in ("auto", "exact", "gibbs"):
            raise ValueError(f"unknown sampler {self.sampler!r}")

    @property
    def required(self) -> int:
        return math.ceil(self.success_threshold * self.trials - 1e-9)

    def grid(self) -> list[int]:
        out, x = [], float(self.n_start)
        while round(x) <= self.max_n:
            n = int(round(x))
            if not out or n > out[-1]:
                out.append(n)
            x *= self.factor
        return out

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class TracePoint:
    n: int
    successes: int
    trials: int
    passed: bool

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials if self.trials else float("nan")


@dataclass
class ComplexityResult:
    n_emp: int
    trace: list = field(default_factory=list)


class MaxNExceededError(RuntimeError):
    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


def trial_seed(seed: int, n: int, trial: int) -> int:
    return int(np.random.SeedSequence([seed, n, trial]).generate_state(1)[0])


class _Drawer:
    def __init__(self, J: CouplingMatrix, protocol: ComplexityProtocol):
        self.J = J
        self.protocol = protocol
        use_exact = protocol.sampler == "exact" or (protocol.sampler == "auto" and J.p <= MAX_EXACT_P)
        self.dist = exact_distribution(J) if use_exact else None

    def __call__(self, n, seed):
        if self.dist is not None:
            return sample_exact(self.dist, n, seed)
        return gibbs_sample(self.J, n, self.protocol.burn_in, self.protocol.thin, seed)


def success_batch(J: CouplingMatrix, n: int, protocol: ComplexityProtocol,
                  config: SlideConfig, seed: int, drawer=None) -> TracePoint:
    drawer = drawer or _Drawer(J, protocol)
    need, trials = protocol.required, protocol.trials
    successes = run = 0
    for t in range(trials):
        data = drawer(n, trial_seed(seed, n, t))
        successes += exact_recovery(reconstruct(data, config), J)
        run += 1
        if protocol.early_stop and (successes >= need or run - successes > trials - need):
            break
    return TracePoint(n=n, successes=successes, trials=run, passed=successes >= need)


def empirical_sample_complexity(model: BenchmarkModel | CouplingMatrix, protocol: ComplexityProtocol,
                                config: SlideConfig, seed: int = 0) -> ComplexityResult:
    J = model.build() if isinstance(model, BenchmarkModel) else model
    drawer = _Drawer(J, protocol)
    trace = []

    def evaluate(n):
        pt = success_batch(J, n, protocol, config, seed, drawer)
        trace.append(pt)
        log.info("n=%d successes=%d/%d", n, pt.successes, pt.trials)
        return pt.passed

    lo = hi = None
    for n in protocol.grid():
        if evaluate(n):
            hi = n
            break
        lo = n
    if hi is None:
        raise MaxNExceededError(f"no grid size up to {protocol.max_n} met the threshold", trace)
    while lo is not None and hi - lo > max(1, protocol.refine_tol * hi):
        mid = (lo + hi) // 2
        if evaluate(mid):
            hi = mid
        else:
            lo = mid
    return ComplexityResult(n_emp=hi, trace=trace)


def linear_fit(x, y) -> dict:
    """Least-squares line ``y = a + b x`` with its coefficient of determination."""
    x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
    A = np.column_stack([np.ones_like(x), x])
    (a, b), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (a + b * x)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
    return {"intercept": float(a), "slope": float(b), "r2": r2}
