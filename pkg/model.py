"""
Game primitives - parameters, jump-time distribution, realized costs and utilities

Time indices are 1-based throughout: periods run t = 1..T, and the value T+1
stands for "after the horizon" (no jump within the horizon for theta, never
declared for tau).
"""

import math
import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from errors import ParameterDomainError

logger = logging.getLogger(__name__)


def _check_probability(field: str, value: float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParameterDomainError(field, f"must be a real number (got {value!r})")
    if not math.isfinite(value) or not 0.0 <= value <= 1.0:
        raise ParameterDomainError(field, f"must lie in [0, 1] (got {value})")


@dataclass(frozen=True)
class ModelParams:
    """The game instance (mu, q, T, c)

    mu: P(s_1 = g)
    q:  per-step hazard of the jump g -> b
    T:  horizon length
    c:  delay cost per period after the jump
    """

    mu: float
    q: float
    T: int
    c: float

    def __post_init__(self):
        _check_probability("mu", self.mu)
        _check_probability("q", self.q)
        if isinstance(self.T, bool) or not isinstance(self.T, (int, np.integer)) or self.T < 1:
            raise ParameterDomainError("T", f"must be a positive integer (got {self.T!r})")
        if isinstance(self.c, bool) or not isinstance(self.c, (int, float)):
            raise ParameterDomainError("c", f"must be a real number (got {self.c!r})")
        if not math.isfinite(self.c) or self.c < 0:
            raise ParameterDomainError("c", f"must be nonnegative (got {self.c})")
        object.__setattr__(self, "T", int(self.T))

    def with_c(self, c: float) -> "ModelParams":
        return ModelParams(mu=self.mu, q=self.q, T=self.T, c=c)

    def with_horizon(self, T: int) -> "ModelParams":
        return ModelParams(mu=self.mu, q=self.q, T=T, c=self.c)

    def to_dict(self) -> dict:
        return {"mu": self.mu, "q": self.q, "T": self.T, "c": self.c}


@dataclass(frozen=True, eq=False)
class JumpDistribution:
    """Law of the jump time theta over {1, ..., T+1}

    pmf[i] holds P(theta = i + 1).
    """

    pmf: np.ndarray

    @property
    def T(self) -> int:
        return len(self.pmf) - 1

    def prob(self, theta: int) -> float:
        if not 1 <= theta <= self.T + 1:
            raise IndexError(f"theta={theta} outside 1..{self.T + 1}")
        return float(self.pmf[theta - 1])

    def cdf(self, t: int) -> float:
        """P(theta <= t)"""
        if not 0 <= t <= self.T + 1:
            raise IndexError(f"t={t} outside 0..{self.T + 1}")
        return float(self.pmf[:t].sum())


@dataclass(frozen=True, eq=False)
class JumpTables:
    """Precomputed per-time quantities indexed directly by t = 0..T+1

    surv[t]    = P(theta > t)
    cdf[t]     = P(theta <= t)
    cum_cdf[k] = sum_{l=1}^{k} P(theta <= l)    (cum_cdf[0] = 0)
    """

    surv: np.ndarray
    cdf: np.ndarray
    cum_cdf: np.ndarray


@dataclass(frozen=True)
class Episode:
    """One realized play of the game"""

    theta: int
    tau: int
    detector_cost: float
    principal_utility: float

    @classmethod
    def realize(cls, theta: int, tau: int, c: float) -> "Episode":
        return cls(
            theta=theta,
            tau=tau,
            detector_cost=detector_cost(tau, theta, c),
            principal_utility=float(tau - 1),
        )

    @property
    def false_alarm(self) -> bool:
        return self.tau < self.theta

    @property
    def delay(self) -> int:
        return max(self.tau - self.theta, 0)


def jump_pmf(params: ModelParams) -> JumpDistribution:
    """P(theta = theta') for theta' = 1..T+1"""
    T, mu, q = params.T, params.mu, params.q
    pmf = np.empty(T + 1)
    pmf[0] = 1.0 - mu
    if T >= 2:
        k = np.arange(T - 1)
        pmf[1:T] = mu * (1.0 - q) ** k * q
    pmf[T] = mu * (1.0 - q) ** (T - 1)
    return JumpDistribution(pmf=pmf)


@lru_cache(maxsize=4096)
def jump_tables(params: ModelParams) -> JumpTables:
    T, mu, q = params.T, params.mu, params.q
    surv = np.zeros(T + 2)
    surv[0] = 1.0
    surv[1:T + 1] = mu * (1.0 - q) ** np.arange(T)
    cdf = 1.0 - surv
    cum_cdf = np.concatenate(([0.0], np.cumsum(cdf[1:])))
    for arr in (surv, cdf, cum_cdf):
        arr.setflags(write=False)
    return JumpTables(surv=surv, cdf=cdf, cum_cdf=cum_cdf)


def survival(params: ModelParams, t: int) -> float:
    """P(theta > t) for 0 <= t <= T+1"""
    if not 0 <= t <= params.T + 1:
        raise IndexError(f"t={t} outside 0..{params.T + 1}")
    if t == 0:
        return 1.0
    if t == params.T + 1:
        return 0.0
    return params.mu * (1.0 - params.q) ** (t - 1)


def geometric_sum(q: float, n):
    """sum_{t=0}^{n-1} (1-q)^t for q in (0, 1], accurate when q is small"""
    n = np.asarray(n, dtype=float)
    if q >= 1.0:
        return np.where(n > 0, 1.0, 0.0)
    return -np.expm1(n * np.log1p(-q)) / q


def detector_cost(tau: int, theta: int, c: float) -> float:
    """Realized detector cost: 1 for a false alarm, c per period of delay otherwise"""
    if tau < 1 or theta < 1:
        raise IndexError(f"tau={tau}, theta={theta} must be >= 1")
    if tau < theta:
        return 1.0
    return c * (tau - theta)
