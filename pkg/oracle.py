"""
Brute-force baselines for certifying the solver at small horizons

Nothing here reuses the closed-form obedience constraints: TBP candidates are
certified with the detector DP, tau^No is found by literal summation over the
jump-time law, and the detector optimum is found by enumerating stopping rules.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Dict, List

import numpy as np

from detector import best_response_obeys_batch, solve_dp
from errors import InvariantViolation, ParameterDomainError, ScaleError, UnsupportedPolicyError
from mechanisms import SilentPathPolicy, TbpMechanism, tbp_to_silent_path
from model import ModelParams, detector_cost, jump_pmf, jump_tables
from solver import algorithm1, algorithm1_fast, q_cap, tau_no

logger = logging.getLogger(__name__)

MAX_BRUTE_FORCE_T = 12
MAX_ENUMERATION_T = 10
UTILITY_TIE = 1e-12


@dataclass(frozen=True)
class OracleResult:
    best_mechanism: TbpMechanism
    best_utility: float
    grid_step: float
    feasible_count: int

    def to_dict(self) -> dict:
        return {
            "n_p": self.best_mechanism.n_p,
            "q_np": self.best_mechanism.q_np,
            "best_utility": self.best_utility,
            "grid_step": self.grid_step,
            "feasible_count": self.feasible_count,
        }


def brute_force_tbp(params: ModelParams, grid_step: float = 1e-3, max_T: int = MAX_BRUTE_FORCE_T) -> OracleResult:
    """Best DP-certified TBP mechanism over n_p x a uniform grid of q_np"""
    if not 0 < grid_step <= 0.1:
        raise ParameterDomainError("grid_step", f"must lie in (0, 0.1] (got {grid_step})")
    if params.T > max_T:
        raise ScaleError(f"brute-force TBP search is limited to T <= {max_T} (got T={params.T})")

    T = params.T
    tables = jump_tables(params)
    q_grid = np.linspace(0.0, 1.0, int(round(1.0 / grid_step)) + 1)

    best_n_p, best_q, best_utility = None, None, -np.inf
    feasible_count = 0
    for n_p in range(1, T + 1):
        rho_b = np.zeros((len(q_grid), T))
        rho_b[:, :n_p - 1] = 1.0
        rho_b[:, n_p - 1] = q_grid
        obeys = best_response_obeys_batch(params, rho_b)
        feasible_count += int(obeys.sum())
        if not obeys.any():
            continue
        base = n_p - 1 + tables.surv[n_p:T + 1].sum()
        utilities = base + tables.cdf[n_p] * q_grid
        # ties keep the smaller q, and the smaller n_p from earlier iterations
        candidates = np.flatnonzero(obeys)
        j = candidates[np.argmax(utilities[candidates])]
        if utilities[j] > best_utility + UTILITY_TIE:
            best_n_p, best_q, best_utility = n_p, float(q_grid[j]), float(utilities[j])

    if best_n_p is None:
        raise InvariantViolation(f"no obedient TBP mechanism on the grid for {params}")
    mechanism = TbpMechanism.build(best_n_p, best_q, T)
    logger.info(f"🔍 Oracle best {mechanism} with utility {best_utility:.6g} ({feasible_count} obedient grid points)")
    return OracleResult(
        best_mechanism=mechanism,
        best_utility=best_utility,
        grid_step=grid_step,
        feasible_count=feasible_count,
    )


def brute_force_tau_no(params: ModelParams) -> int:
    """Earliest tau minimizing E[J] by explicit summation over theta"""
    if params.c == 0:
        return params.T + 1
    pmf = jump_pmf(params)
    thetas = range(1, params.T + 2)
    costs = [
        sum(pmf.prob(theta) * detector_cost(tau, theta, params.c) for theta in thetas)
        for tau in range(1, params.T + 2)
    ]
    best_cost = min(costs)
    return next(tau for tau, cost in enumerate(costs, start=1) if cost <= best_cost + UTILITY_TIE)


def _survive(rho_b: np.ndarray, start: int, stop: int) -> float:
    """P(k at every time start..stop | bad from start); 1 for an empty range"""
    if stop < start:
        return 1.0
    return float(np.prod(rho_b[start - 1:stop]))


def _branch_costs(params: ModelParams, pmf: np.ndarray, rho_b: np.ndarray) -> np.ndarray:
    """Cheapest declaration time on the d branch opened at each t = 1..T

    Every deterministic declaration time s in t..T+1 is scored exactly.
    """
    T, c = params.T, params.c
    out = np.zeros(T)
    for t in range(1, T + 1):
        weights = {
            theta: pmf[theta - 1] * _survive(rho_b, theta, t - 1) * (1.0 - rho_b[t - 1])
            for theta in range(1, t + 1)
        }
        options = [
            sum(w * detector_cost(s, theta, c) for theta, w in weights.items())
            for s in range(t, T + 2)
        ]
        out[t - 1] = min(options)
    return out


def enumerate_stopping_rules(params: ModelParams, policy: SilentPathPolicy) -> float:
    """Minimum expected detector cost over all stopping rules on the reduced message tree"""
    if params.T > MAX_ENUMERATION_T:
        raise ScaleError(f"stopping-rule enumeration is limited to T <= {MAX_ENUMERATION_T} (got T={params.T})")
    if policy.T != params.T:
        raise ParameterDomainError("policy", f"policy horizon {policy.T} != T={params.T}")
    if not policy.good_state_always_silent:
        raise UnsupportedPolicyError("stopping-rule enumeration needs rho_g = 1 at every t")

    T = params.T
    pmf = jump_pmf(params).pmf
    rho_b = policy.rho_b
    branch = _branch_costs(params, pmf, rho_b)

    best = np.inf
    for declares in itertools.product((False, True), repeat=T):
        stop = declares.index(True) + 1 if True in declares else T + 1
        last = min(stop, T)
        cost = 0.0
        for theta in range(1, T + 2):
            cost += pmf[theta - 1] * _survive(rho_b, theta, last) * detector_cost(stop, theta, params.c)
        cost += branch[:last].sum()
        best = min(best, cost)
    logger.debug(f"Enumerated {2 ** T} stopping rules, minimum cost {best:.6g}")
    return float(best)


def check_solver(params: ModelParams, grid_step: float = 1e-3, q_tolerance: float = 2e-3) -> List[Dict]:
    """Solver against the DP-certified grid search and against its accelerated variant"""
    result = algorithm1(params)
    fast = algorithm1_fast(params)
    oracle = brute_force_tbp(params, grid_step)
    base = params.to_dict()
    rows = [
        {
            **base,
            "check": "solver_vs_oracle",
            "expected": oracle.best_mechanism.k_star,
            "observed": result.k_star,
            "delta": abs(result.q_star - oracle.best_mechanism.q_np),
            "tolerance": q_tolerance,
            "passed": result.n_p_star == oracle.best_mechanism.n_p
            and abs(result.q_star - oracle.best_mechanism.q_np) <= q_tolerance,
        },
        {
            **base,
            "check": "fast_vs_full",
            "expected": result.k_star,
            "observed": fast.k_star,
            "delta": abs(result.q_star - fast.q_star),
            "tolerance": 1e-12,
            "passed": result.n_p_star == fast.n_p_star and abs(result.q_star - fast.q_star) <= 1e-12,
        },
    ]
    tau = tau_no(params)
    literal_tau = brute_force_tau_no(params)
    rows.append({
        **base,
        "check": "tau_no",
        "expected": literal_tau,
        "observed": tau,
        "delta": abs(tau - literal_tau),
        "tolerance": 0,
        "passed": tau == literal_tau,
    })
    if params.c > 0:
        rows.append(_cap_argmin_row(params, tau, base))
    return rows


def _cap_argmin_row(params: ModelParams, tau: int, base: dict) -> dict:
    """tau^No attains the smallest cap for every threshold at or beyond it"""
    tables = jump_tables(params)
    worst = 0.0
    for n_p in range(tau, params.T + 1):
        if tables.cdf[n_p] == 0:
            continue
        caps = [q_cap(params, n_p, t) for t in range(1, n_p + 1)]
        lowest = min(caps)
        worst = max(worst, (caps[tau - 1] - lowest) / max(1.0, abs(lowest)))
    return {
        **base,
        "check": "cap_argmin_at_tau_no",
        "expected": 0.0,
        "observed": worst,
        "delta": worst,
        "tolerance": 1e-9,
        "passed": worst <= 1e-9,
    }


def check_detector(params: ModelParams, policy: SilentPathPolicy, label: str, tolerance: float = 1e-9) -> Dict:
    """DP value against exhaustive stopping-rule enumeration"""
    dp_cost = solve_dp(params, policy, with_thresholds=False).expected_cost
    enumerated = enumerate_stopping_rules(params, policy)
    return {
        **params.to_dict(),
        "check": f"dp_vs_enumeration[{label}]",
        "expected": enumerated,
        "observed": dp_cost,
        "delta": abs(dp_cost - enumerated),
        "tolerance": tolerance,
        "passed": abs(dp_cost - enumerated) <= tolerance,
    }


def optimal_policy(params: ModelParams) -> SilentPathPolicy:
    return tbp_to_silent_path(algorithm1(params).mechanism, params.T)
