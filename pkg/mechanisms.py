"""
Disclosure mechanisms - time-based prioritized (TBP) mechanisms, silent-path policies,
their closed-form utilities and obedience slack

A general direct mechanism is represented only along the all-silent ("all-k")
message history: rho_g[t] / rho_b[t] is the probability of recommending silence at
time t when the chain is good / bad and every earlier message was k.
"""

import json
import math
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from errors import ParameterDomainError
from model import ModelParams, jump_tables

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class TbpMechanism:
    """Time-based prioritized mechanism (n_p, q_np)

    Silence in the bad state is recommended with probability 1 before n_p, q_np at n_p
    and 0 after; silence in the good state is always recommended. (n_p, 1) and
    (n_p + 1, 0) describe the same mechanism; `canonical` picks the second form.
    """

    n_p: int
    q_np: float

    def __post_init__(self):
        if isinstance(self.n_p, bool) or not isinstance(self.n_p, (int, np.integer)) or self.n_p < 1:
            raise ParameterDomainError("n_p", f"must be an integer >= 1 (got {self.n_p!r})")
        if not isinstance(self.q_np, (int, float)) or not math.isfinite(self.q_np) or not 0.0 <= self.q_np <= 1.0:
            raise ParameterDomainError("q_np", f"must lie in [0, 1] (got {self.q_np!r})")
        object.__setattr__(self, "n_p", int(self.n_p))
        object.__setattr__(self, "q_np", float(self.q_np))

    @classmethod
    def build(cls, n_p: int, q_np: float, T: int) -> "TbpMechanism":
        """Construct and canonicalize against horizon T"""
        return cls(n_p=n_p, q_np=q_np).canonical(T)

    def canonical(self, T: int) -> "TbpMechanism":
        if self.n_p > T:
            raise ParameterDomainError("n_p", f"threshold {self.n_p} exceeds horizon T={T}")
        if self.q_np >= 1.0 and self.n_p < T:
            return TbpMechanism(n_p=self.n_p + 1, q_np=0.0)
        return self

    @property
    def k_star(self) -> float:
        return self.n_p + self.q_np

    def to_dict(self) -> dict:
        return {"n_p": self.n_p, "q_np": self.q_np}

    @classmethod
    def from_dict(cls, data: dict) -> "TbpMechanism":
        return cls(n_p=int(data["n_p"]), q_np=float(data["q_np"]))


@dataclass(frozen=True, eq=False)
class SilentPathPolicy:
    """Per-time silence probabilities along the all-k history; index t-1 holds time t"""

    rho_g: np.ndarray
    rho_b: np.ndarray

    def __post_init__(self):
        rho_g = np.asarray(self.rho_g, dtype=float)
        rho_b = np.asarray(self.rho_b, dtype=float)
        if rho_g.ndim != 1 or rho_g.shape != rho_b.shape or len(rho_g) == 0:
            raise ParameterDomainError("policy", "rho_g and rho_b must be non-empty vectors of equal length")
        for name, arr in (("rho_g", rho_g), ("rho_b", rho_b)):
            if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
                raise ParameterDomainError(name, "entries must lie in [0, 1]")
        rho_g.setflags(write=False)
        rho_b.setflags(write=False)
        object.__setattr__(self, "rho_g", rho_g)
        object.__setattr__(self, "rho_b", rho_b)

    @property
    def T(self) -> int:
        return len(self.rho_g)

    @property
    def good_state_always_silent(self) -> bool:
        return bool(np.all(self.rho_g == 1.0))

    def is_obedience_feasible(self) -> bool:
        """A necessary condition for obedience: silence is never likelier in the bad state"""
        return bool(np.all(self.rho_g >= self.rho_b))

    def to_dict(self) -> dict:
        return {"rho_g": self.rho_g.tolist(), "rho_b": self.rho_b.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "SilentPathPolicy":
        return cls(rho_g=np.asarray(data["rho_g"], dtype=float), rho_b=np.asarray(data["rho_b"], dtype=float))


@dataclass(frozen=True)
class ObedienceReport:
    satisfied: bool
    slack: Tuple[float, ...]
    binding_times: List[int] = field(default_factory=list)

    @property
    def min_slack(self) -> float:
        return min(self.slack)


def tbp_silence_prob(mech: TbpMechanism, t: int, T: int) -> float:
    """Bad-state silence probability on the all-k path at time t"""
    if not 1 <= t <= T:
        raise IndexError(f"t={t} outside 1..{T}")
    if t < mech.n_p:
        return 1.0
    if t == mech.n_p:
        return mech.q_np
    return 0.0


def tbp_expected_utility(params: ModelParams, mech: TbpMechanism) -> float:
    """n_p - 1 + P(theta <= n_p) q_np + sum_{t=n_p}^{T} P(theta > t)"""
    if mech.n_p > params.T:
        raise ParameterDomainError("n_p", f"threshold {mech.n_p} exceeds horizon T={params.T}")
    tables = jump_tables(params)
    n_p = mech.n_p
    return float(n_p - 1 + tables.cdf[n_p] * mech.q_np + tables.surv[n_p:params.T + 1].sum())


def tbp_slack_vector(params: ModelParams, mech: TbpMechanism) -> np.ndarray:
    """RHS - LHS of the simplified obedience constraint for t = 1..n_p"""
    tables = jump_tables(params)
    n_p = mech.n_p
    t = np.arange(1, n_p + 1)
    continuation = tables.cum_cdf[n_p - 1] - tables.cum_cdf[t - 1] + tables.cdf[n_p] * mech.q_np
    return tables.surv[t] - params.c * continuation


def tbp_obedience(params: ModelParams, mech: TbpMechanism, tolerance: float = DEFAULT_TOLERANCE) -> ObedienceReport:
    if tolerance < 0:
        raise ParameterDomainError("tolerance", f"must be nonnegative (got {tolerance})")
    if mech.n_p > params.T:
        raise ParameterDomainError("n_p", f"threshold {mech.n_p} exceeds horizon T={params.T}")
    slack = tbp_slack_vector(params, mech)
    binding = [int(t) for t in np.flatnonzero(np.abs(slack) <= tolerance) + 1]
    satisfied = bool(slack.min() >= -tolerance)
    logger.debug(f"Obedience of {mech}: min slack {slack.min():.3e}, binding {binding}")
    return ObedienceReport(satisfied=satisfied, slack=tuple(float(s) for s in slack), binding_times=binding)


def tbp_to_silent_path(mech: TbpMechanism, T: int) -> SilentPathPolicy:
    if mech.n_p > T:
        raise ParameterDomainError("n_p", f"threshold {mech.n_p} exceeds horizon T={T}")
    rho_b = np.array([tbp_silence_prob(mech, t, T) for t in range(1, T + 1)])
    return SilentPathPolicy(rho_g=np.ones(T), rho_b=rho_b)


def tbp_utility_curve(params: ModelParams, k_values) -> np.ndarray:
    """Principal's utility as a function of k = n_p + q_np on [1, T + 1]"""
    out = []
    for k in np.atleast_1d(np.asarray(k_values, dtype=float)):
        if not 1.0 <= k <= params.T + 1:
            raise ParameterDomainError("k", f"must lie in [1, T+1] (got {k})")
        n_p = int(math.floor(k))
        mech = TbpMechanism(n_p=params.T, q_np=1.0) if n_p > params.T else TbpMechanism(n_p=n_p, q_np=k - n_p)
        out.append(tbp_expected_utility(params, mech))
    return np.array(out)


def full_info_policy(T: int) -> SilentPathPolicy:
    return SilentPathPolicy(rho_g=np.ones(T), rho_b=np.zeros(T))


def no_info_policy(T: int) -> SilentPathPolicy:
    return SilentPathPolicy(rho_g=np.ones(T), rho_b=np.ones(T))


def static_policy(T: int, rho_b: float) -> SilentPathPolicy:
    return SilentPathPolicy(rho_g=np.ones(T), rho_b=np.full(T, float(rho_b)))


def silent_path_masses(params: ModelParams, policy: SilentPathPolicy) -> Tuple[np.ndarray, np.ndarray]:
    """Joint probabilities P(s_t = g, m_{1:t} = k^t) and P(s_t = b, m_{1:t} = k^t), t = 1..T"""
    if policy.T != params.T:
        raise ParameterDomainError("policy", f"policy horizon {policy.T} != T={params.T}")
    good = np.empty(params.T)
    bad = np.empty(params.T)
    good[0] = params.mu * policy.rho_g[0]
    bad[0] = (1.0 - params.mu) * policy.rho_b[0]
    for i in range(1, params.T):
        good[i] = good[i - 1] * (1.0 - params.q) * policy.rho_g[i]
        bad[i] = (bad[i - 1] + good[i - 1] * params.q) * policy.rho_b[i]
    return good, bad


def policy_expected_utility(params: ModelParams, policy: SilentPathPolicy) -> float:
    """Expected tau - 1 under obedient play: sum_t P(m_{1:t} = k^t)"""
    good, bad = silent_path_masses(params, policy)
    return float((good + bad).sum())


MechanismDocument = Union[TbpMechanism, SilentPathPolicy]


def dump_mechanism(obj: MechanismDocument, path: Path) -> Path:
    """Write a mechanism or policy as a JSON document"""
    kind = "tbp" if isinstance(obj, TbpMechanism) else "silent_path"
    payload = {"kind": kind, **obj.to_dict()}
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2)
    logger.info(f"💾 Saved {kind} mechanism to {path}")
    return path


def load_mechanism(path: Path) -> MechanismDocument:
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    if "n_p" in data:
        return TbpMechanism.from_dict(data)
    if "rho_g" in data and "rho_b" in data:
        return SilentPathPolicy.from_dict(data)
    raise ParameterDomainError("policy", f"{path} holds neither {{n_p, q_np}} nor {{rho_g, rho_b}}")
