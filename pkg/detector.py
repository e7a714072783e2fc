"""
Detector best response - Bayesian beliefs along the all-silent message path and the
finite-horizon dynamic program over declare / wait

The DP runs on the reduced message tree: the all-k spine plus one-step d branches.
With rho_g = 1 a d message reveals the bad state, so a d branch is terminal with
zero continuation cost. Policies with rho_g < 1 anywhere are rejected.
"""

import logging
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional

import numpy as np
from scipy.optimize import brentq

from errors import ParameterDomainError, UnsupportedPolicyError
from mechanisms import SilentPathPolicy, silent_path_masses
from model import ModelParams

logger = logging.getLogger(__name__)

TIE_TOLERANCE = 1e-9
THRESHOLD_XTOL = 1e-12


class _Spine(NamedTuple):
    """Batched spine quantities, shape (B, n) unless noted; NaN marks unreachable times"""

    pi: np.ndarray             # posterior P(good) after k at each time
    p_k: np.ndarray            # P(k at t | spine through t-1); 0 once unreachable
    reach: np.ndarray          # P(spine through t)
    values: np.ndarray         # W_t at the spine belief
    wait_costs: np.ndarray     # c (1 - pi_t) + E[W_{t+1}]
    expected_cost: np.ndarray  # shape (B,), ex-ante cost of the optimal stopping rule


def _spine(c: float, q: float, prior, rho_g: np.ndarray, rho_b: np.ndarray) -> _Spine:
    """Forward Bayes pass and backward DP for a batch of policies

    prior is P(good) at the first spine time, before its message and without a
    hazard step; it broadcasts against the batch dimension.
    """
    rho_g = np.atleast_2d(rho_g)
    rho_b = np.atleast_2d(rho_b)
    B, n = rho_b.shape
    pred = np.broadcast_to(np.asarray(prior, dtype=float), (B,)).copy()

    pi = np.full((B, n), np.nan)
    p_k = np.zeros((B, n))
    reached = np.ones(B, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        for i in range(n):
            pk = pred * rho_g[:, i] + (1.0 - pred) * rho_b[:, i]
            ok = reached & (pk > 0)
            p_k[:, i] = np.where(reached, pk, 0.0)
            post = np.where(ok, pred * rho_g[:, i] / np.where(ok, pk, 1.0), np.nan)
            pi[:, i] = post
            reached = ok
            pred = np.where(ok, post, 0.0) * (1.0 - q)

    values = np.full((B, n), np.nan)
    wait_costs = np.full((B, n), np.nan)
    carried = np.zeros(B)
    for i in reversed(range(n)):
        wait = c * (1.0 - pi[:, i]) + carried
        wait_costs[:, i] = wait
        values[:, i] = np.minimum(pi[:, i], wait)
        carried = np.where(p_k[:, i] > 0, p_k[:, i] * np.nan_to_num(values[:, i]), 0.0)

    return _Spine(
        pi=pi,
        p_k=p_k,
        reach=np.cumprod(p_k, axis=1),
        values=values,
        wait_costs=wait_costs,
        expected_cost=carried,
    )


def _wait_mask(spine: _Spine) -> np.ndarray:
    """Waiting weakly beats declaring; unreachable times count as obeyed"""
    with np.errstate(invalid="ignore"):
        waits = spine.wait_costs <= spine.pi + TIE_TOLERANCE
    return np.where(np.isnan(spine.pi), True, waits)


def _require_reduced(policy: SilentPathPolicy):
    if not policy.good_state_always_silent:
        raise UnsupportedPolicyError("detector DP needs rho_g = 1 at every t; the d branch is otherwise not terminal")


def _require_horizon(params: ModelParams, policy: SilentPathPolicy):
    if policy.T != params.T:
        raise ParameterDomainError("policy", f"policy horizon {policy.T} != T={params.T}")


@dataclass(frozen=True, eq=False)
class BeliefPath:
    """Posterior P(good) on the all-k path; pi[0] is the prior, NaN marks unreachable times"""

    pi: np.ndarray

    @property
    def reachable(self) -> np.ndarray:
        return ~np.isnan(self.pi)


@dataclass(frozen=True, eq=False)
class DetectorSolution:
    beliefs: BeliefPath
    values: np.ndarray
    wait_is_optimal: np.ndarray
    reach: np.ndarray
    expected_cost: float
    thresholds: List[Optional[float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        def clean(arr):
            return [None if np.isnan(x) else float(x) for x in arr]

        return {
            "beliefs": clean(self.beliefs.pi),
            "values": clean(self.values),
            "wait_is_optimal": [bool(x) for x in self.wait_is_optimal],
            "expected_cost": self.expected_cost,
            "thresholds": self.thresholds,
        }


def belief_update(pi: float, rho_g: float, rho_b: float, q: float, message: str) -> Optional[float]:
    """Posterior P(good) after one hazard step and message; None if the message has probability 0"""
    for name, value in (("pi", pi), ("rho_g", rho_g), ("rho_b", rho_b), ("q", q)):
        if not 0.0 <= value <= 1.0:
            raise ParameterDomainError(name, f"must lie in [0, 1] (got {value})")
    pred = pi * (1.0 - q)
    if message == "k":
        good, bad = pred * rho_g, (1.0 - pred) * rho_b
    elif message == "d":
        good, bad = pred * (1.0 - rho_g), (1.0 - pred) * (1.0 - rho_b)
    else:
        raise ParameterDomainError("message", f"must be 'k' or 'd' (got {message!r})")
    if good + bad == 0:
        return None
    return good / (good + bad)


def solve_dp(params: ModelParams, policy: SilentPathPolicy, with_thresholds: bool = True) -> DetectorSolution:
    _require_horizon(params, policy)
    _require_reduced(policy)
    spine = _spine(params.c, params.q, params.mu, policy.rho_g, policy.rho_b)
    wait_ok = _wait_mask(spine)[0]
    thresholds: List[Optional[float]] = []
    if with_thresholds:
        thresholds = [threshold_at(params, policy, t) for t in range(1, params.T + 1)]
    solution = DetectorSolution(
        beliefs=BeliefPath(pi=np.concatenate(([params.mu], spine.pi[0]))),
        values=spine.values[0],
        wait_is_optimal=wait_ok,
        reach=spine.reach[0],
        expected_cost=float(spine.expected_cost[0]),
        thresholds=thresholds,
    )
    logger.debug(f"DP solved: expected cost {solution.expected_cost:.6g}, waits {int(wait_ok.sum())}/{params.T}")
    return solution


def best_response_obeys_batch(params: ModelParams, rho_b: np.ndarray) -> np.ndarray:
    """Obedience of many rho_g = 1 policies at once; rho_b has shape (B, T)"""
    rho_b = np.atleast_2d(np.asarray(rho_b, dtype=float))
    if rho_b.shape[1] != params.T:
        raise ParameterDomainError("policy", f"policy horizon {rho_b.shape[1]} != T={params.T}")
    spine = _spine(params.c, params.q, params.mu, np.ones_like(rho_b), rho_b)
    return _wait_mask(spine).all(axis=1)


def best_response_obeys(params: ModelParams, policy: SilentPathPolicy) -> bool:
    """True iff the DP waits at every reachable k history; d branches reveal the bad state"""
    _require_horizon(params, policy)
    _require_reduced(policy)
    return bool(best_response_obeys_batch(params, policy.rho_b)[0])


def wait_value(params: ModelParams, policy: SilentPathPolicy, t: int, pi) -> np.ndarray:
    """Cost of waiting at time t with belief pi, continuing optimally; vectorized over pi"""
    _require_horizon(params, policy)
    _require_reduced(policy)
    if not 1 <= t <= params.T:
        raise IndexError(f"t={t} outside 1..{params.T}")
    pi = np.atleast_1d(np.asarray(pi, dtype=float))
    own = params.c * (1.0 - pi)
    if t == params.T:
        return own
    rest_g = np.tile(policy.rho_g[t:], (len(pi), 1))
    rest_b = np.tile(policy.rho_b[t:], (len(pi), 1))
    sub = _spine(params.c, params.q, pi * (1.0 - params.q), rest_g, rest_b)
    return own + sub.expected_cost


def threshold_at(params: ModelParams, policy: SilentPathPolicy, t: int) -> float:
    """Belief below which declaring at time t beats waiting"""
    def gap(x: float) -> float:
        return float(x - wait_value(params, policy, t, x)[0])

    if gap(0.0) >= 0:
        return 0.0
    if gap(1.0) < 0:
        return 1.0
    return float(brentq(gap, 0.0, 1.0, xtol=THRESHOLD_XTOL))


def obedience_margins(params: ModelParams, policy: SilentPathPolicy) -> List[Optional[float]]:
    """Declare cost minus obedient-continuation cost at each reachable k history

    A nonnegative margin means obeying the recommendation to stay silent is a best
    one-shot response when the detector obeys afterwards. None marks unreachable times.
    """
    _require_horizon(params, policy)
    spine = _spine(params.c, params.q, params.mu, policy.rho_g, policy.rho_b)
    pi, p_k = spine.pi[0], spine.p_k[0]
    T, c, q = params.T, params.c, params.q
    margins: List[Optional[float]] = [None] * T
    carried = 0.0
    for i in reversed(range(T)):
        via_k = 0.0
        if not np.isnan(pi[i]):
            cost = c * (1.0 - pi[i]) + carried
            margins[i] = float(pi[i] - cost)
            via_k = p_k[i] * cost
        pred = pi[i - 1] * (1.0 - q) if i > 0 and not np.isnan(pi[i - 1]) else 0.0
        # a d message ends play: the detector pays only if still in the good state
        carried = via_k + pred * (1.0 - policy.rho_g[i])
    return margins


def obedient_cost(params: ModelParams, policy: SilentPathPolicy) -> float:
    """Ex-ante detector cost of obeying every recommendation, summed forward"""
    good, bad = silent_path_masses(params, policy)
    pred_good = np.concatenate(([params.mu], good[:-1] * (1.0 - params.q)))
    false_alarm = float((pred_good * (1.0 - policy.rho_g)).sum())
    delay = params.c * float(bad.sum())
    return false_alarm + delay
